"""Non-completely-positive subsystem dynamics for a correlated CNOT family.

The experiment pairs ``U_t = exp(-i t CNOT)`` with the correlated states

    Lambda_p(tau) = tau (x) I/2 + (1 - p)(Phi+ - I/4),

defined for system inputs with ``|tau| <= p``.  Dynamical matrices act on
row-major vectorised density matrices, ``vec(rho) = (rho00, rho01, rho10, rho11)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InvalidStateError
from .matching import MatchingProblem
from .qstate import I2, TwoQubitState, bloch_to_density, check_density, decompose, partial_trace
from .unitary import CNOT, rotation_unitary

_PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
PHI_PLUS_DM = np.outer(_PHI_PLUS, _PHI_PLUS.conj())
# correlation offset of Lambda_p per unit (1 - p)
_OFFSET = PHI_PLUS_DM - np.eye(4) / 4
R_Y_HALF_PI = rotation_unitary([0, 1, 0], np.pi / 2)
_DOMAIN_TOL = 1e-12


@dataclass(frozen=True)
class DynamicalMatrix:
    A: np.ndarray

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return (self.A @ rho.reshape(4)).reshape(2, 2)

    def realigned(self) -> np.ndarray:
        return realign(self.A)


def _tau_matrix(tau) -> np.ndarray:
    if hasattr(tau, "density"):
        return tau.density
    tau = np.asarray(tau)
    return tau if tau.shape == (2, 2) else bloch_to_density(tau)


def lambda_state(p: float, tau) -> TwoQubitState:
    """``Lambda_p(tau)`` in Pauli coordinates: ``a = tau``, ``b = 0``, ``T = (1 - p) diag(1, -1, 1)``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    rho_s = _tau_matrix(tau)
    r = np.real([np.trace(rho_s @ s) for s in (np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1]))])
    if np.linalg.norm(r) > p + _DOMAIN_TOL:
        raise DomainError(f"|tau| = {np.linalg.norm(r):.6g} exceeds p = {p}")
    rho = np.kron(rho_s, I2 / 2) + (1 - p) * _OFFSET
    try:
        check_density(rho)
    except InvalidStateError as exc:
        raise InvalidStateError(f"Lambda_{p} is not a valid state: {exc}") from exc
    return decompose(rho)


def evolution_unitary(t: float) -> np.ndarray:
    """``exp(-i t CNOT) = cos t I - i sin t CNOT`` since CNOT squares to the identity."""
    return np.cos(t) * np.eye(4) - 1j * np.sin(t) * CNOT


def evolve_time(t: float, rho) -> np.ndarray:
    U = evolution_unitary(t)
    return U @ np.asarray(rho, dtype=complex) @ U.conj().T


def dynamical_matrix(p: float, t: float) -> DynamicalMatrix:
    """The closed-form dynamical matrix with ``a = (1 - e^{-2it})(1 - p)/4``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    a = (1 - np.exp(-2j * t)) * (1 - p) / 4
    ph = np.exp(-1j * t) * np.cos(t)
    A = np.array(
        [
            [1, 0, 0, 0],
            [a, ph, 0, a],
            [np.conj(a), 0, np.conj(ph), np.conj(a)],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )
    return DynamicalMatrix(A)


def dynamical_matrix_numeric(p: float, t: float, pre: Optional[np.ndarray] = None) -> DynamicalMatrix:
    """Dynamical matrix from direct evolution.

    The input-to-output map is affine on trace-one inputs; its linear
    extension ``X -> Tr_E[U (X (x) I/2 + Tr(X)(1 - p) C) U^dag]`` is read off
    on matrix units.  ``pre`` is an optional system unitary applied to the
    correlated state before evolution, with inputs taken as the rotated
    system states.
    """
    U = evolution_unitary(t)
    C = (1 - p) * _OFFSET
    if pre is not None:
        W = np.kron(pre, I2)
        C = W @ C @ W.conj().T
    A = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        E = np.zeros(4, dtype=complex)
        E[k] = 1
        X = E.reshape(2, 2)
        rho = np.kron(X, I2 / 2) + np.trace(X) * C
        A[:, k] = partial_trace(U @ rho @ U.conj().T, "system").reshape(4)
    return DynamicalMatrix(A)


def realign(A) -> np.ndarray:
    """Index reshuffle ``B[(i k), (j l)] = A[(i j), (k l)]``."""
    A = A.A if isinstance(A, DynamicalMatrix) else np.asarray(A)
    return A.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def realigned_spectrum(A) -> np.ndarray:
    """Ascending eigenvalues of the realigned matrix (Hermitian part, to absorb rounding)."""
    B = realign(A)
    return np.linalg.eigvalsh(0.5 * (B + B.conj().T))


def min_negative_eigenvalue_closed_form(t: float) -> float:
    """``sin(t/2) (sin(t/2) - sqrt(1 + 3 sin^2(t/2)) / 2)``."""
    s = np.sin(t / 2)
    return float(s * (s - 0.5 * np.sqrt(1 + 3 * s * s)))


def mitigated_dynamical_matrix(p: float, t: float) -> DynamicalMatrix:
    """``diag(1, e^{-it} cos t, e^{it} cos t, 1)``: the correlation terms cancel after ``R_Y(pi/2)``."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    ph = np.exp(-1j * t) * np.cos(t)
    return DynamicalMatrix(np.diag([1, ph, np.conj(ph), 1]).astype(complex))


def env_solution_all_inputs(t: float, zeta, n_samples: int = 50, seed: int = 0) -> float:
    """Largest matching residual of ``zeta`` over random inputs of the ``p = 1`` family.

    Any ``zeta`` in the yz-plane reproduces the system dynamics for every input.
    """
    problem = MatchingProblem(evolution_unitary(t))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        v = rng.normal(size=3)
        v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
        state = lambda_state(1.0, v)
        worst = max(worst, float(np.linalg.norm(problem.residual(state, zeta))))
    return worst


def spectra_table(ps, t_grid) -> list[dict]:
    """Rows of ``(p, t, closed_form, numeric_min_eig, mitigated_min_eig)``."""
    rows = []
    for p in ps:
        for t in t_grid:
            rows.append(
                {
                    "p": float(p),
                    "t": float(t),
                    "closed_form": min_negative_eigenvalue_closed_form(t),
                    "numeric_min_eig": float(realigned_spectrum(dynamical_matrix(p, t))[0]),
                    "mitigated_min_eig": float(realigned_spectrum(mitigated_dynamical_matrix(p, t))[0]),
                }
            )
    return rows
