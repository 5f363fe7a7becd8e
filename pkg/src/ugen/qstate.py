"""Two-qubit state algebra in Pauli coordinates.

Index convention used everywhere in the package: Pauli matrices are ordered
(X, Y, Z) = (sigma_1, sigma_2, sigma_3), and tensor products are ordered
system (x) environment, so the system is the most significant qubit of a 4x4
matrix.  A two-qubit state is carried as ``(a, b, T)`` with

    rho = 1/4 (I(x)I + a.sigma(x)I + I(x)b.sigma + sum_ij T_ij sigma_i(x)sigma_j).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import InvalidStateError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.array([SX, SY, SZ])
#: identity followed by X, Y, Z
PAULI_BASIS = np.array([I2, SX, SY, SZ])
# PAULI_PRODUCTS[m, n] = sigma_m (x) sigma_n, m, n in 0..3
PAULI_PRODUCTS = np.einsum("mij,nkl->mnikjl", PAULI_BASIS, PAULI_BASIS).reshape(4, 4, 4, 4)

BLOCH_TOL = 1e-12
PSD_TOL = 1e-10


def _as_vec3(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {np.shape(v)}")
    return arr


@dataclass(frozen=True)
class QubitState:
    """Single-qubit state given by its Bloch vector."""

    bloch: np.ndarray

    def __post_init__(self):
        v = _as_vec3(self.bloch)
        if np.linalg.norm(v) > 1 + BLOCH_TOL:
            raise InvalidStateError(f"Bloch vector {v} lies outside the unit ball")
        v.setflags(write=False)
        object.__setattr__(self, "bloch", v)

    def density(self) -> np.ndarray:
        return bloch_to_density(self.bloch)

    @classmethod
    def from_density(cls, rho) -> "QubitState":
        return cls(density_to_bloch(rho))


@dataclass(frozen=True)
class TwoQubitState:
    """Two-qubit state in Pauli coordinates.

    Attributes
    ----------
    a : ndarray, shape (3,)
        System Bloch vector.
    b : ndarray, shape (3,)
        Environment Bloch vector.
    T : ndarray, shape (3, 3)
        Correlation matrix, ``T[i, j] = Tr(rho sigma_i (x) sigma_j)``.
    """

    a: np.ndarray
    b: np.ndarray
    T: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        a, b = _as_vec3(self.a), _as_vec3(self.b)
        T = np.asarray(self.T, dtype=float)
        if T.shape != (3, 3):
            raise ValueError(f"correlation matrix must be 3x3, got {T.shape}")
        for name, v in (("a", a), ("b", b)):
            if np.linalg.norm(v) > 1 + BLOCH_TOL:
                raise InvalidStateError(f"Bloch vector {name}={v} lies outside the unit ball")
        T = T.copy()
        for arr in (a, b, T):
            arr.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "T", T)

    def density(self) -> np.ndarray:
        return reconstruct(self)

    def pauli_vector(self) -> np.ndarray:
        """4x4 real array ``r[m, n] = Tr(rho sigma_m (x) sigma_n)`` with sigma_0 = I."""
        r = np.empty((4, 4))
        r[0, 0] = 1.0
        r[1:, 0] = self.a
        r[0, 1:] = self.b
        r[1:, 1:] = self.T
        return r

    @classmethod
    def from_pauli_vector(cls, r) -> "TwoQubitState":
        r = np.asarray(r, dtype=float)
        return cls(r[1:, 0] / r[0, 0], r[0, 1:] / r[0, 0], r[1:, 1:] / r[0, 0])

    @classmethod
    def product(cls, a, b) -> "TwoQubitState":
        a, b = _as_vec3(a), _as_vec3(b)
        return cls(a, b, np.outer(a, b))

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "T": self.T.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TwoQubitState":
        return cls(d["a"], d["b"], d["T"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "TwoQubitState":
        return cls.from_dict(json.loads(s))


def bloch_to_density(v) -> np.ndarray:
    v = _as_vec3(v)
    return 0.5 * (I2 + np.einsum("i,ijk->jk", v, PAULIS))


def density_to_bloch(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("ijk,kj->i", PAULIS, rho).real


def check_density(rho, tol: float = PSD_TOL) -> np.ndarray:
    """Return ``rho`` as a complex array, raising InvalidStateError if it is not a state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"density matrix must be square, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise InvalidStateError("density matrix is not positive semidefinite")
    return rho


def decompose(rho) -> TwoQubitState:
    """Pauli coordinates ``(a, b, T)`` of a 4x4 density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 density matrix, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > PSD_TOL:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > PSD_TOL:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho).real:.3g}")
    r = np.einsum("mnij,ji->mn", PAULI_PRODUCTS, rho).real
    return TwoQubitState.from_pauli_vector(r)


def reconstruct(state: TwoQubitState) -> np.ndarray:
    """Dense 4x4 operator of a two-qubit state (validity is not checked)."""
    return 0.25 * np.einsum("mn,mnij->ij", state.pauli_vector(), PAULI_PRODUCTS)


def partial_trace(rho, keep: Literal["system", "environment"] = "system") -> np.ndarray:
    """Reduced 2x2 operator of a 4x4 operator."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    if keep == "system":
        return np.trace(r, axis1=1, axis2=3)
    if keep == "environment":
        return np.trace(r, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'system' or 'environment', not {keep!r}")


def fidelity_qubit(rho, sigma) -> float:
    """Uhlmann fidelity of two qubit states, ``Tr(rho sigma) + 2 sqrt(det rho det sigma)``."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    overlap = np.trace(rho @ sigma).real
    dets = max(np.linalg.det(rho).real, 0.0) * max(np.linalg.det(sigma).real, 0.0)
    return float(np.clip(overlap + 2 * np.sqrt(dets), 0.0, 1.0))


def min_eigenvalue(state: TwoQubitState) -> float:
    return float(np.linalg.eigvalsh(reconstruct(state)).min())


def is_valid(state: TwoQubitState, tol: float = PSD_TOL) -> tuple[bool, float]:
    """Whether the reconstructed operator is PSD within ``tol``; also the minimum eigenvalue."""
    lam = min_eigenvalue(state)
    return lam >= -tol, lam


def bell_state(name: str = "phi+") -> TwoQubitState:
    """One of the four Bell states, ``phi+``, ``phi-``, ``psi+`` or ``psi-``."""
    diag = {
        "phi+": (1, -1, 1),
        "phi-": (-1, 1, 1),
        "psi+": (1, 1, -1),
        "psi-": (-1, -1, -1),
    }[name]
    return TwoQubitState(np.zeros(3), np.zeros(3), np.diag(diag).astype(float))


def werner_state(lam: float) -> TwoQubitState:
    """``lam |psi-><psi-| + (1 - lam) I/4``."""
    return TwoQubitState(np.zeros(3), np.zeros(3), -lam * np.eye(3))


def apply_local(state: TwoQubitState, O_sys=None, O_env=None) -> TwoQubitState:
    """Rotate the Pauli coordinates by SO(3) matrices on either side."""
    Os = np.eye(3) if O_sys is None else np.asarray(O_sys, dtype=float)
    Oe = np.eye(3) if O_env is None else np.asarray(O_env, dtype=float)
    return TwoQubitState(Os @ state.a, Oe @ state.b, Os @ state.T @ Oe.T)
