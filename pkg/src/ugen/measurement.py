"""Two-outcome weak measurements on the system qubit.

``M_pm = 1/2 (e_plus I pm e_minus n.sigma)`` with
``e_pm = sqrt((1+eps)/2) pm sqrt((1-eps)/2)``, so that ``M_+^2 + M_-^2 = I``.
eps = 0 is the trivial measurement and eps = 1 a projective one along n.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .errors import DegenerateOutcomeError, ParameterError
from .qstate import I2, PAULIS, TwoQubitState

PROB_FLOOR = 1e-14

Sign = Literal["+", "-"]


def _sign_value(sign) -> int:
    if sign in ("+", 1, +1):
        return 1
    if sign in ("-", -1):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


@dataclass(frozen=True)
class WeakMeasurement:
    epsilon: float
    axis: np.ndarray

    def __post_init__(self):
        eps = float(self.epsilon)
        if not 0.0 <= eps <= 1.0:
            raise ParameterError(f"epsilon must lie in [0, 1], got {eps}")
        n = np.asarray(self.axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ParameterError(f"measurement axis must be a unit vector, got |n|={np.linalg.norm(n)}")
        n = n.copy()
        n.setflags(write=False)
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "axis", n)

    @classmethod
    def normalized(cls, epsilon: float, axis) -> "WeakMeasurement":
        n = np.asarray(axis, dtype=float)
        return cls(epsilon, n / np.linalg.norm(n))

    @property
    def coefficients(self) -> tuple[float, float]:
        return coefficients(self.epsilon)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "axis": self.axis.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "WeakMeasurement":
        return cls(d["epsilon"], d["axis"])


@dataclass(frozen=True)
class MeasurementOutcome:
    sign: str
    post_state: TwoQubitState
    probability: float


def coefficients(epsilon: float) -> tuple[float, float]:
    """``(e_plus, e_minus)`` for measurement strength ``epsilon``."""
    p = np.sqrt((1 + epsilon) / 2)
    q = np.sqrt((1 - epsilon) / 2)
    return float(p + q), float(p - q)


def build_operators(m: WeakMeasurement) -> tuple[np.ndarray, np.ndarray]:
    """The Hermitian pair ``(M_+, M_-)``."""
    ep, em = m.coefficients
    ns = np.einsum("i,ijk->jk", m.axis, PAULIS)
    return 0.5 * (ep * I2 + em * ns), 0.5 * (ep * I2 - em * ns)


def apply_closed_form(state: TwoQubitState, m: WeakMeasurement, sign: Sign = "+") -> MeasurementOutcome:
    """Post-selected state after measuring the system, computed in Pauli coordinates.

    The ``-`` outcome is the ``+`` formula with epsilon replaced by -epsilon.

    Raises
    ------
    DegenerateOutcomeError
        If the requested outcome has probability below 1e-14.
    """
    eps = _sign_value(sign) * m.epsilon
    n = m.axis
    a, b, T = state.a, state.b, state.T
    denom = 1 + eps * (n @ a)
    prob = 0.5 * denom
    if prob < PROB_FLOOR:
        raise DegenerateOutcomeError(f"outcome {sign} has probability {prob:.3g}")
    s = np.sqrt(1 - m.epsilon**2)
    nn = np.outer(n, n)
    a2 = (s * a + (1 - s) * nn @ a + eps * n) / denom
    b2 = (b + eps * T.T @ n) / denom
    T2 = (s * T + (1 - s) * nn @ T + eps * np.outer(n, b)) / denom
    # rounding can push a pure marginal a hair outside the unit ball
    return MeasurementOutcome(
        "+" if _sign_value(sign) > 0 else "-",
        TwoQubitState(_clip_ball(a2), _clip_ball(b2), T2),
        float(prob),
    )


def _clip_ball(v: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(v)
    return v / r if r > 1 else v


def measurement_fidelity(a, m: WeakMeasurement, sign: Sign = "+") -> float:
    """Fidelity between the system state and its post-selected image.

    ``1 - [1 - (a.n)^2][1 - sqrt(1 - eps^2)] / (2 (1 pm eps a.n))``
    """
    a = np.asarray(a, dtype=float)
    an = float(a @ m.axis)
    denom = 2 * (1 + _sign_value(sign) * m.epsilon * an)
    if denom < 2 * PROB_FLOOR:
        raise DegenerateOutcomeError("outcome has zero probability")
    return 1 - (1 - an**2) * (1 - np.sqrt(1 - m.epsilon**2)) / denom


def power_coefficients(epsilon: float, k: int) -> tuple[float, float]:
    """Coefficients of ``M_pm^k = 1/2 (c_plus I pm c_minus n.sigma)``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    p = ((1 + epsilon) / 2) ** (k / 2)
    q = ((1 - epsilon) / 2) ** (k / 2)
    return float(p + q), float(p - q)


def repeated_norm_function(epsilon, k: int):
    """``h(eps) = (1 + eps)^k + (1 - eps)^k``; a single measurement at some
    strength reproduces ``M_pm^k`` exactly iff ``h(eps) = 2^k``."""
    epsilon = np.asarray(epsilon, dtype=float)
    return (1 + epsilon) ** k + (1 - epsilon) ** k


def single_shot_equivalent(epsilon: float, k: int, tol: float = 1e-12) -> Optional[float]:
    """Strength of one measurement equal to ``k`` repetitions, or None.

    A match needs both power coefficients to coincide with the single-shot
    ones, which forces ``c_plus^2 + c_minus^2 = 2``.  The trivial measurement
    (eps = 0) is accepted up to the scalar it accrues.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    cp, cm = power_coefficients(epsilon, k)
    if abs(cm) <= tol:
        return 0.0
    if abs(cp**2 + cm**2 - 2) > tol:
        return None
    return float(min(1.0, cp * np.sqrt(max(0.0, 2 - cp**2))))


def post_measurement_arrays(a, b, T, epsilon, axes):
    """Vectorised ``+`` outcome transform over a batch of axes, shape (..., 3).

    Returns unnormalised-free ``(a', b', T', probability)`` arrays without the
    validity checks of :func:`apply_closed_form`.
    """
    n = np.asarray(axes, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    T = np.asarray(T, dtype=float)
    s = np.sqrt(1 - epsilon**2)
    na = n @ a
    denom = 1 + epsilon * na
    a2 = (s * a + ((1 - s) * na + epsilon)[..., None] * n) / denom[..., None]
    b2 = (b + epsilon * n @ T) / denom[..., None]
    nT = n @ T
    T2 = (
        s * T
        + (1 - s) * n[..., :, None] * nT[..., None, :]
        + epsilon * n[..., :, None] * b[None, :]
    ) / denom[..., None, None]
    return a2, b2, T2, 0.5 * denom
