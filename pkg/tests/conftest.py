import numpy as np
import pytest

PAULI = [
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.diag([1, -1]).astype(complex),
]


def random_density(rng, dim=4, rank=None):
    """Ginibre-distributed density matrix."""
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, dim=4):
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def pauli_coords(rho):
    """Brute-force (a, b, T) by tracing against every Pauli product."""
    r = np.array([[np.trace(rho @ np.kron(PAULI[m], PAULI[n])).real for n in range(4)] for m in range(4)])
    return r[1:, 0], r[0, 1:], r[1:, 1:]


def qubit_density(v):
    v = np.asarray(v, dtype=float)
    return 0.5 * (PAULI[0] + v[0] * PAULI[1] + v[1] * PAULI[2] + v[2] * PAULI[3])


def trace_env(rho):
    return np.einsum("aebe->ab", rho.reshape(2, 2, 2, 2))


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] *= -1
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
