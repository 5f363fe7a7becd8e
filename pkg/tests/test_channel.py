import numpy as np
import pytest

from conftest import qubit_density, random_density, random_unitary, trace_env
from ugen.channel import (
    Dilation,
    KrausChannel,
    apply_channel_system_side,
    experiment_with_dilation,
    probabilistic_unitary_channel,
    stinespring_dilate,
)
from ugen.errors import ParameterError
from ugen.qstate import decompose, reconstruct
from ugen.unitary import rotation_unitary, su2_to_so3


def random_two_term(rng):
    Z = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    u, _, vh = np.linalg.svd(Z, full_matrices=False)
    iso = u @ vh
    return KrausChannel((iso[:2], iso[2:]))


def test_probabilistic_unitary_examples(rng):
    V = random_unitary(rng, 2)
    rho = random_density(rng, 2)
    assert np.allclose(probabilistic_unitary_channel([1.0], [V])(rho), V @ rho @ V.conj().T)
    assert np.allclose(probabilistic_unitary_channel([0, 0], [V, V])(rho), rho)
    with pytest.raises(ParameterError):
        probabilistic_unitary_channel([0.7, 0.6], [V, V])
    with pytest.raises(ParameterError):
        probabilistic_unitary_channel([-0.1], [V])


def test_axis_rotations_fix_state():
    a = np.array([0.3, -0.2, 0.5])
    n = a / np.linalg.norm(a)
    ch = probabilistic_unitary_channel([0.25] * 3, [rotation_unitary(n, t) for t in (0.4, 1.7, 2.9)])
    rho = qubit_density(a)
    assert np.allclose(ch(rho), rho, atol=1e-14)


def test_system_side_examples(rng):
    s = decompose(random_density(rng))
    ident = KrausChannel((np.eye(2),))
    assert np.allclose(apply_channel_system_side(ident, s).T, s.T)
    V = random_unitary(rng, 2)
    out = apply_channel_system_side(KrausChannel((V,)), s)
    O = su2_to_so3(V)
    assert np.allclose(out.a, O @ s.a, atol=1e-12)
    assert np.allclose(out.b, s.b, atol=1e-12)
    assert np.allclose(out.T, O @ s.T, atol=1e-12)


def test_system_side_preserves_trace_and_env(rng):
    for _ in range(30):
        ch = random_two_term(rng)
        rho = random_density(rng)
        s = decompose(rho)
        out = apply_channel_system_side(ch, s)
        assert np.allclose(out.b, s.b, atol=1e-12)
        assert np.linalg.eigvalsh(reconstruct(out)).min() > -1e-10


def test_dilate_identity():
    d = stinespring_dilate(KrausChannel((np.eye(2), np.zeros((2, 2)))))
    assert np.allclose(d.W.conj().T @ d.W, np.eye(4))
    assert np.allclose(d.W[:, :2], np.vstack([np.eye(2), np.zeros((2, 2))]))


def test_amplitude_damping():
    g = 0.3
    ch = KrausChannel((np.diag([1, np.sqrt(1 - g)]), np.array([[0, np.sqrt(g)], [0, 0]])))
    d = stinespring_dilate(ch)
    assert np.abs(d.W.conj().T @ d.W - np.eye(4)).max() < 1e-12
    for v in ([0, 0, -1], [0.3, 0.2, 0.1], [1, 0, 0]):
        rho = qubit_density(v)
        assert np.abs(d.apply(rho) - ch(rho)).max() < 1e-12


def test_dilation_roundtrip(rng):
    for _ in range(20):
        ch = random_two_term(rng)
        d = stinespring_dilate(ch)
        back = d.kraus()
        for K, Kb in zip(ch.operators, back.operators):
            assert np.abs(K - Kb).max() < 1e-12
        for _ in range(10):
            rho = random_density(rng, 2)
            assert np.abs(d.apply(rho) - ch(rho)).max() < 1e-10


def test_full_experiment_form(rng):
    for _ in range(20):
        ch = random_two_term(rng)
        d = stinespring_dilate(ch)
        U = random_unitary(rng)
        rho = random_density(rng)
        got = experiment_with_dilation(d.W, U, rho)
        pre = sum(np.kron(K, np.eye(2)) @ rho @ np.kron(K, np.eye(2)).conj().T for K in ch.operators)
        assert np.abs(got - trace_env(U @ pre @ U.conj().T)).max() < 1e-10


def test_dilate_rejects_bad_input():
    with pytest.raises(ParameterError):
        stinespring_dilate(KrausChannel((np.eye(2),)))
    with pytest.raises(ParameterError):
        stinespring_dilate(KrausChannel((np.eye(2), np.eye(2))))


def test_channel_json(rng):
    ch = random_two_term(rng)
    back = KrausChannel.from_json(ch.to_json())
    assert all(np.array_equal(a, b) for a, b in zip(ch.operators, back.operators))
    assert isinstance(stinespring_dilate(ch), Dilation)
