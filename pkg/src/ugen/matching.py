"""The dynamics-matching condition.

For a global unitary ``U`` and a correlated state ``rho``, look for an
environment state ``zeta`` with

    Tr_E(U rho U^dag) = Tr_E(U (rho_S (x) zeta) U^dag).

The right-hand side is affine in the Bloch vector of ``zeta``, so the
condition is a 3x3 linear system ``A zeta = c`` in system-Pauli components.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

import numpy as np

from .channel import KrausChannel
from .errors import ConsistencyError
from .qstate import TwoQubitState, bloch_to_density, _as_vec3
from .unitary import NonlocalParams, pauli_transfer

SINGULAR_CUTOFF = 1e-12
RESIDUAL_TOL = 1e-9
ENV_NORM_TOL = 1e-9


class Feasibility(str, enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class EnvSolution:
    zeta: np.ndarray
    residual_norm: float
    feasibility: Feasibility

    @property
    def is_valid(self) -> bool:
        return self.feasibility is Feasibility.VALID

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.zeta))

    def to_dict(self) -> dict:
        return {
            "zeta": [float(z) for z in self.zeta],
            "residual": float(self.residual_norm),
            "feasibility": self.feasibility.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def classify(zeta, residual: float, tol: float = RESIDUAL_TOL) -> Feasibility:
    if residual > tol:
        return Feasibility.INCONSISTENT
    if np.linalg.norm(zeta) <= 1 + ENV_NORM_TOL:
        return Feasibility.VALID
    return Feasibility.INVALID


def min_norm_solve(A, c):
    """Minimum-norm least-squares solution of ``A x = c`` (batched over leading axes)."""
    u, s, vh = np.linalg.svd(A)
    keep = s > SINGULAR_CUTOFF
    inv = np.where(keep, 1 / np.where(keep, s, 1), 0.0)
    coef = np.einsum("...ji,...j->...i", u, c) * inv
    x = np.einsum("...ji,...j->...i", vh, coef)
    res = np.linalg.norm(np.einsum("...ij,...j->...i", A, x) - c, axis=-1)
    return x, res


class MatchingProblem:
    """Precomputed Pauli transfer data for repeated solves against one unitary."""

    def __init__(self, U):
        self.U = np.asarray(U, dtype=complex)
        R = pauli_transfer(self.U)
        # only the system-output rows are needed: R_sys[i, m, n] = R[i, 0, m, n]
        self._R = R[:, 0]
        trace_row = np.zeros((4, 4))
        trace_row[0, 0] = 1.0
        if np.abs(self._R[0] - trace_row).max() > 1e-10:
            raise ConsistencyError("unitary does not preserve the trace")

    def linear_system(self, a, b, T):
        """``(A, c)`` such that matching holds iff ``A zeta = c``; batched over leading axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        T = np.asarray(T, dtype=float)
        R = self._R[1:]
        a1 = np.concatenate([np.ones(a.shape[:-1] + (1,)), a], axis=-1)
        A = np.einsum("...m,imj->...ij", a1, R[:, :, 1:])
        const = np.einsum("...m,im->...i", a1, R[:, :, 0])
        target = const + np.einsum("...n,in->...i", b, R[:, 0, 1:]) + np.einsum(
            "...mn,imn->...i", T, R[:, 1:, 1:]
        )
        return A, target - const

    def solve_arrays(self, a, b, T):
        A, c = self.linear_system(a, b, T)
        return min_norm_solve(A, c)

    def solve(self, state: TwoQubitState, tol: float = RESIDUAL_TOL) -> EnvSolution:
        zeta, res = self.solve_arrays(state.a, state.b, state.T)
        return EnvSolution(zeta, float(res), classify(zeta, float(res), tol))

    def residual(self, state: TwoQubitState, zeta) -> np.ndarray:
        """System-Bloch mismatch (product minus correlated) for a given ``zeta``."""
        A, c = self.linear_system(state.a, state.b, state.T)
        return A @ _as_vec3(zeta) - c


def solve_env(U, state: TwoQubitState, tol: float = RESIDUAL_TOL) -> EnvSolution:
    """Minimum-norm environment Bloch vector satisfying the matching condition.

    ``INVALID`` certifies that no valid ``zeta`` exists: the returned vector is the
    point of the solution set closest to the origin.
    """
    return MatchingProblem(U).solve(state, tol)


def matching_residuals(p: NonlocalParams, a, b, T, zeta) -> np.ndarray:
    """The three matching conditions for ``U = Omega(p)``, written out explicitly."""
    a1, a2, a3 = _as_vec3(a)
    b1, b2, b3 = _as_vec3(b)
    z1, z2, z3 = _as_vec3(zeta)
    t = np.asarray(T, dtype=float)
    s1, s2, s3 = np.sin(2 * p.alpha)
    c1, c2, c3 = np.cos(2 * p.alpha)
    t12, t13, t21, t23, t31, t32 = t[0, 1], t[0, 2], t[1, 0], t[1, 2], t[2, 0], t[2, 1]
    r1 = (t32 - a3 * z2) * c3 * s2 + ((-t23 + a2 * z3) * c2 + (b1 - z1) * s2) * s3
    r2 = (-t31 + a3 * z1) * c3 * s1 + ((t13 - a1 * z3) * c1 + (b2 - z2) * s1) * s3
    r3 = (t21 - a2 * z1) * c2 * s1 + ((-t12 + a1 * z2) * c1 + (b3 - z3) * s1) * s2
    return np.array([r1, r2, r3])


def kraus_from_env(U, zeta) -> KrausChannel:
    """Kraus operators ``sqrt(p_j) <eta|U|zeta_j>`` of the product-state channel."""
    U = np.asarray(U, dtype=complex).reshape(2, 2, 2, 2)
    z = zeta.bloch if hasattr(zeta, "bloch") else _as_vec3(zeta)
    probs, vecs = np.linalg.eigh(bloch_to_density(z))
    ops = []
    for pj, vj in zip(probs, vecs.T):
        if pj <= 1e-15:
            continue
        # U[s, e, s', e'] contracted with zeta_j on e'
        cols = np.einsum("aebf,f->aeb", U, vj)
        for eta in range(2):
            ops.append(np.sqrt(pj) * cols[:, eta, :])
    return KrausChannel(tuple(ops))
