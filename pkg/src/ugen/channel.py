"""Kraus channels on the system qubit and their single-ancilla dilations."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, ParameterError
from .qstate import I2, TwoQubitState, decompose, reconstruct

COMPLETENESS_TOL = 1e-10


@dataclass(frozen=True)
class KrausChannel:
    """Ordered list of 2x2 Kraus operators."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(np.array(K, dtype=complex).reshape(2, 2) for K in self.operators)
        if not ops:
            raise ParameterError("a channel needs at least one Kraus operator")
        for K in ops:
            K.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def completeness_defect(self) -> float:
        S = sum(K.conj().T @ K for K in self.operators)
        return float(np.linalg.norm(S - I2, 2))

    @property
    def is_trace_preserving(self) -> bool:
        return self.completeness_defect <= COMPLETENESS_TOL

    def __call__(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(K @ rho @ K.conj().T for K in self.operators)

    def to_dict(self) -> dict:
        return {
            "kraus": [
                [[float(z.real), float(z.imag)] for z in K.reshape(-1)] for K in self.operators
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KrausChannel":
        ops = []
        for flat in d["kraus"]:
            arr = np.asarray(flat, dtype=float)
            if arr.shape != (4, 2):
                raise ValueError("each Kraus operator needs 4 [re, im] pairs (row-major 2x2)")
            ops.append((arr[:, 0] + 1j * arr[:, 1]).reshape(2, 2))
        return cls(tuple(ops))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "KrausChannel":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class Dilation:
    """4x4 unitary on ancilla (x) system with ``K_i = <i|_A W |0>_A``."""

    W: np.ndarray

    def kraus(self) -> KrausChannel:
        blocks = self.W.reshape(2, 2, 2, 2)
        return KrausChannel((blocks[0, :, 0, :], blocks[1, :, 0, :]))

    def apply(self, rho) -> np.ndarray:
        """``Tr_A[W (|0><0| (x) rho) W^dag]``."""
        rho = np.asarray(rho, dtype=complex)
        d = rho.shape[0]
        anc = np.zeros((2, 2), dtype=complex)
        anc[0, 0] = 1
        W = np.kron(self.W, np.eye(d // 2)) if d > 2 else self.W
        out = W @ np.kron(anc, rho) @ W.conj().T
        return np.trace(out.reshape(2, d, 2, d), axis1=0, axis2=2)

    def to_dict(self) -> dict:
        return {"W": [[[float(z.real), float(z.imag)] for z in row] for row in self.W]}


def probabilistic_unitary_channel(ps: Sequence[float], Vs: Sequence[np.ndarray]) -> KrausChannel:
    """``(1 - sum p_j) rho + sum_j p_j V_j rho V_j^dag``."""
    ps = np.asarray(ps, dtype=float)
    if len(ps) != len(Vs):
        raise ParameterError("need one probability per unitary")
    if np.any(ps < 0) or ps.sum() > 1 + 1e-12:
        raise ParameterError(f"probabilities {ps} must be nonnegative and sum to at most 1")
    rest = max(0.0, 1 - ps.sum())
    ops = [np.sqrt(rest) * I2] + [np.sqrt(p) * np.asarray(V, dtype=complex) for p, V in zip(ps, Vs)]
    return KrausChannel(tuple(ops))


def apply_channel_system_side(ch: KrausChannel, state: TwoQubitState) -> TwoQubitState:
    """``sum_K (K (x) I) rho (K (x) I)^dag`` in Pauli coordinates."""
    rho = reconstruct(state)
    out = sum(np.kron(K, I2) @ rho @ np.kron(K, I2).conj().T for K in ch.operators)
    return decompose(out / np.trace(out).real)


def _complete_unitary(cols: np.ndarray) -> np.ndarray:
    """Extend orthonormal columns to a unitary with modified Gram-Schmidt."""
    d, k = cols.shape
    basis = [cols[:, i] for i in range(k)]
    candidates = list(np.eye(d, dtype=complex).T)
    while len(basis) < d:
        best, best_norm = None, -1.0
        for e in candidates:
            v = e.copy()
            for q in basis:
                v -= (q.conj() @ v) * q
            if np.linalg.norm(v) < 1e-8:
                # re-orthogonalise once more before giving up on this candidate
                for q in basis:
                    v -= (q.conj() @ v) * q
            nv = np.linalg.norm(v)
            if nv > best_norm:
                best, best_norm = v, nv
        if best_norm < 1e-8:
            raise ConsistencyError("could not complete the dilation to a unitary")
        for q in basis:
            best -= (q.conj() @ best) * q
        basis.append(best / np.linalg.norm(best))
    return np.column_stack(basis)


def stinespring_dilate(ch: KrausChannel) -> Dilation:
    """Unitary ``W`` whose ``|0>_A`` block column stacks the two Kraus operators."""
    if len(ch.operators) != 2:
        raise ParameterError("single-ancilla dilation needs exactly two Kraus operators")
    if ch.completeness_defect > COMPLETENESS_TOL:
        raise ParameterError(f"channel is not trace preserving (defect {ch.completeness_defect:.2e})")
    K1, K2 = ch.operators
    iso = np.vstack([K1, K2])
    # polish orthonormality of the isometry before completion
    u, _, vh = np.linalg.svd(iso, full_matrices=False)
    iso = u @ vh
    W = _complete_unitary(iso)
    return Dilation(W)


def experiment_with_dilation(W: np.ndarray, U: np.ndarray, rho_se: np.ndarray) -> np.ndarray:
    """``Tr_AE[(I (x) U)(W (x) I)(|0><0| (x) rho)(W^dag (x) I)(I (x) U^dag)]``."""
    anc = np.zeros((2, 2), dtype=complex)
    anc[0, 0] = 1
    big = np.kron(np.eye(2), U) @ np.kron(W, I2)
    out = big @ np.kron(anc, rho_se) @ big.conj().T
    # order is ancilla, system, environment
    out = out.reshape(2, 2, 2, 2, 2, 2)
    return np.einsum("aseate->st", out)
