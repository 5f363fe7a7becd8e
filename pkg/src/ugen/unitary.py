"""Global and local unitaries.

Any two-qubit gate factors as ``(L1 (x) L2) Omega(alpha) (R1 (x) R2)`` with the
nonlocal core ``Omega = exp(-i sum_k alpha_k sigma_k (x) sigma_k)``.  The core
is diagonal in the Bell basis, which is how it is evaluated here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .qstate import I2, PAULI_PRODUCTS, PAULIS, SX, SY, SZ

SPECIAL_TOL = 1e-9

# Bell basis columns: phi+, phi-, psi+, psi-
_BELL = np.array(
    [[1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1], [1, -1, 0, 0]], dtype=complex
) / np.sqrt(2)
# eigenvalues of (XX, YY, ZZ) on each Bell column
_BELL_SIGNS = np.array([[1, -1, 1], [-1, 1, 1], [1, 1, -1], [-1, -1, -1]], dtype=float)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def in_special_set(angle: float, tol: float = SPECIAL_TOL) -> bool:
    """Whether ``angle`` is an integer multiple of pi/2 (within ``tol``)."""
    x = angle / (np.pi / 2)
    return abs(x - np.round(x)) * (np.pi / 2) <= tol


@dataclass(frozen=True)
class NonlocalParams:
    """Nonlocal angles ``(alpha_1, alpha_2, alpha_3)`` in radians."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float).reshape(3).copy()
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    def special_mask(self, tol: float = SPECIAL_TOL) -> np.ndarray:
        return np.array([in_special_set(x, tol) for x in self.alpha])

    @property
    def family(self) -> int:
        """Number of free angles: 0 to 3 (``3`` means no angle is a multiple of pi/2)."""
        return int(3 - self.special_mask().sum())

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NonlocalParams":
        return cls(d["alpha"])


@dataclass(frozen=True)
class LocalRotation:
    axis: np.ndarray
    angle: float

    def __post_init__(self):
        n = np.asarray(self.axis, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ValueError(f"rotation axis must be a unit vector, got |n|={np.linalg.norm(n)}")
        n = n.copy()
        n.setflags(write=False)
        object.__setattr__(self, "axis", n)
        object.__setattr__(self, "angle", float(self.angle))


def nonlocal_unitary(p: NonlocalParams) -> np.ndarray:
    phases = np.exp(-1j * (_BELL_SIGNS @ p.alpha))
    return (_BELL * phases) @ _BELL.conj().T


def su2_to_so3(L) -> np.ndarray:
    """Rotation induced on Bloch vectors: ``O_ij = 1/2 Tr(sigma_i L sigma_j L^dag)``."""
    L = np.asarray(L, dtype=complex)
    return 0.5 * np.einsum("iab,bc,jcd,da->ij", PAULIS, L, PAULIS, L.conj().T).real


def rotation_unitary(axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)``."""
    n = np.asarray(axis, dtype=float)
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * np.einsum("i,ijk->jk", n, PAULIS)


def local_rotation_unitary(r: LocalRotation) -> np.ndarray:
    return rotation_unitary(r.axis, r.angle)


def rotvec_unitary(v) -> np.ndarray:
    """SU(2) element for rotation vector ``v`` (axis times angle)."""
    v = np.asarray(v, dtype=float)
    theta = np.linalg.norm(v)
    if theta < 1e-300:
        return I2.copy()
    return rotation_unitary(v / theta, theta)


def givens(plane: tuple[int, int], theta: float) -> np.ndarray:
    """Counterclockwise rotation by ``theta`` in coordinate plane ``(i, j)``, 1-based.

    For ``i > j`` the matrix has ``g_ii = g_jj = cos``, ``g_ij = sin`` and ``g_ji = -sin``.
    """
    i, j = plane
    if i == j or not {i, j} <= {1, 2, 3}:
        raise ValueError(f"invalid Givens plane {plane}")
    hi, lo = max(i, j) - 1, min(i, j) - 1
    g = np.eye(3)
    c, s = np.cos(theta), np.sin(theta)
    g[hi, hi] = g[lo, lo] = c
    g[hi, lo] = s
    g[lo, hi] = -s
    return g


def inducing_unitary(O) -> np.ndarray:
    """An SU(2) element whose adjoint action is the rotation ``O``.

    The double-cover sign is fixed so that the first entry (row-major) with
    modulus above 1e-12 has positive real part, or positive imaginary part if
    it is purely imaginary.
    """
    O = np.asarray(O, dtype=float)
    x, y, z, w = Rotation.from_matrix(O).as_quat()
    L = w * I2 - 1j * (x * SX + y * SY + z * SZ)
    for entry in L.reshape(-1):
        if abs(entry) > 1e-12:
            key = entry.real if abs(entry.real) > 1e-12 else entry.imag
            if key < 0:
                L = -L
            break
    return L


def entangling_power(p: NonlocalParams) -> float:
    """Normalised entangling power ``(3 - c1(c2 + c3) - c2 c3) / 4``, ``c_i = cos(4 alpha_i)``."""
    c1, c2, c3 = np.cos(4 * p.alpha)
    return float((3 - c1 * (c2 + c3) - c2 * c3) / 4)


def assemble_global(p: NonlocalParams, L1, L2, R1, R2) -> np.ndarray:
    """``(L1 (x) L2) Omega(p) (R1 (x) R2)``."""
    return np.kron(L1, L2) @ nonlocal_unitary(p) @ np.kron(R1, R2)


@dataclass(frozen=True)
class KAKForm:
    """A two-qubit gate given through its local/nonlocal factors."""

    params: NonlocalParams
    L1: np.ndarray = field(default_factory=lambda: I2.copy())
    L2: np.ndarray = field(default_factory=lambda: I2.copy())
    R1: np.ndarray = field(default_factory=lambda: I2.copy())
    R2: np.ndarray = field(default_factory=lambda: I2.copy())

    def matrix(self) -> np.ndarray:
        return assemble_global(self.params, self.L1, self.L2, self.R1, self.R2)

    @classmethod
    def nonlocal_only(cls, alpha) -> "KAKForm":
        return cls(NonlocalParams(alpha))


def cnot_kak() -> KAKForm:
    """Exact factorisation of CNOT (system qubit as control)."""
    L1 = np.exp(3j * np.pi / 4) * rotation_unitary([0, 0, 1], np.pi / 2) @ HADAMARD
    L2 = rotation_unitary([1, 0, 0], np.pi / 2)
    return KAKForm(NonlocalParams([np.pi / 4, 0, 0]), L1, L2, SX @ HADAMARD, SX.copy())


def swap_cnot_kak() -> KAKForm:
    """Exact factorisation of SWAP . CNOT (CNOT applied first)."""
    c = cnot_kak()
    return KAKForm(
        NonlocalParams([np.pi / 2, np.pi / 4, np.pi / 4]),
        np.exp(1j * np.pi / 4) * c.L2,
        c.L1,
        c.R1,
        c.R2,
    )


def pauli_transfer(U) -> np.ndarray:
    """Real 4x4x4x4 array ``R[k,l,m,n] = 1/4 Tr(P_kl U P_mn U^dag)``, ``P_kl = sigma_k (x) sigma_l``."""
    U = np.asarray(U, dtype=complex)
    conj = np.einsum("ab,mnbc,cd->mnad", U, PAULI_PRODUCTS, U.conj().T)
    return 0.25 * np.einsum("klda,mnad->klmn", PAULI_PRODUCTS, conj).real


def is_unitary(U, tol: float = 1e-10) -> bool:
    U = np.asarray(U)
    return bool(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() <= tol)


def schmidt_coefficients(psi) -> np.ndarray:
    """Schmidt coefficients of a two-qubit pure state vector."""
    return np.linalg.svd(np.asarray(psi).reshape(2, 2), compute_uv=False)


# magic basis: local gates SU(2) x SU(2) become real SO(4) matrices
_MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / np.sqrt(2)


def kron_factor(K) -> tuple[np.ndarray, np.ndarray]:
    """Split a 4x4 tensor product ``X (x) Y`` into unitary-scaled factors."""
    K = np.asarray(K, dtype=complex)
    realigned = K.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, s, vh = np.linalg.svd(realigned)
    X = np.sqrt(s[0]) * u[:, 0].reshape(2, 2)
    Y = np.sqrt(s[0]) * vh[0].reshape(2, 2)
    scale = np.sqrt(np.abs(np.linalg.det(X)))
    return X / scale, Y * scale


def kak_decompose(U, max_tries: int = 8) -> KAKForm:
    """Factor a dense two-qubit unitary as ``(L1 (x) L2) Omega(alpha) (R1 (x) R2)``.

    The global phase is absorbed into ``L1``.  Uses the magic-basis
    construction: ``M^dag U M = K1 D K2`` with ``K1, K2`` real orthogonal and
    ``D`` diagonal.
    """
    U = np.asarray(U, dtype=complex)
    if not is_unitary(U, 1e-8):
        raise ValueError("kak_decompose expects a unitary matrix")
    Um = _MAGIC.conj().T @ U @ _MAGIC
    phase = np.linalg.det(Um) ** 0.25
    Up = Um / phase
    M2 = Up.T @ Up
    rng = np.random.default_rng(0)
    for _ in range(max_tries):
        # Re(M2) and Im(M2) commute, so a generic real combination has their common eigenbasis
        r = rng.uniform(0.5, 2.0)
        _, P = np.linalg.eigh(M2.real + r * M2.imag)
        d2 = np.diag(P.T @ M2 @ P)
        if np.abs(P.T @ M2 @ P - np.diag(d2)).max() < 1e-9:
            break
    else:
        raise RuntimeError("failed to diagonalise the magic-basis symmetric form")
    if np.linalg.det(P) < 0:
        P[:, 0] *= -1
    D = np.sqrt(d2)
    K1 = Up @ P / D
    if np.linalg.det(K1).real < 0:
        D[0] *= -1
        K1[:, 0] *= -1
    A = _MAGIC @ K1 @ _MAGIC.conj().T
    B = _MAGIC @ P.T @ _MAGIC.conj().T
    N = phase * _MAGIC @ np.diag(D) @ _MAGIC.conj().T
    # N is Bell diagonal; read off -s_k . alpha + phi0 = arg(lambda_k)
    lam = np.einsum("ik,ij,jk->k", _BELL.conj(), N, _BELL)
    coef = np.hstack([-_BELL_SIGNS, np.ones((4, 1))])
    sol = np.linalg.solve(coef, np.angle(lam))
    alpha, phi0 = sol[:3], sol[3]
    L1, L2 = kron_factor(A)
    R1, R2 = kron_factor(B)
    kak = KAKForm(NonlocalParams(alpha), np.exp(1j * phi0) * L1, L2, R1, R2)
    # the Kronecker split is only fixed up to reciprocal scalars; repair the leftover phase
    ref = kak.matrix()
    k = np.unravel_index(np.argmax(np.abs(U)), U.shape)
    kak = KAKForm(kak.params, kak.L1 * (U[k] / ref[k]), kak.L2, kak.R1, kak.R2)
    if np.abs(kak.matrix() - U).max() > 1e-8:
        raise RuntimeError("KAK reconstruction failed")
    return kak
