import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import qubit_density, random_density, random_unitary, trace_env
from ugen.matching import (
    Feasibility,
    MatchingProblem,
    kraus_from_env,
    matching_residuals,
    solve_env,
)
from ugen.qstate import TwoQubitState, bell_state, decompose, reconstruct
from ugen.unitary import CNOT, SWAP, NonlocalParams, nonlocal_unitary


def product_output(U, a, zeta):
    rho = np.kron(qubit_density(a), qubit_density(zeta))
    return trace_env(U @ rho @ U.conj().T)


def correlated_output(U, state):
    rho = reconstruct(state)
    return trace_env(U @ rho @ U.conj().T)


def test_product_input_is_feasible(rng):
    for _ in range(20):
        U = random_unitary(rng)
        a, z = 0.9 * rng.uniform(-0.57, 0.57, 3), 0.9 * rng.uniform(-0.57, 0.57, 3)
        sol = solve_env(U, TwoQubitState.product(a, z))
        assert sol.feasibility is Feasibility.VALID
        assert sol.residual_norm < 1e-12
        assert np.allclose(product_output(U, a, sol.zeta), product_output(U, a, z), atol=1e-12)


def test_bell_cnot_not_valid():
    sol = solve_env(CNOT, bell_state("phi+"))
    assert sol.feasibility is not Feasibility.VALID
    # no zeta at all: the system output is fixed regardless of zeta
    assert sol.feasibility is Feasibility.INCONSISTENT


def test_bell_swap_cnot_not_valid():
    assert not solve_env(SWAP @ CNOT, bell_state("phi+")).is_valid


def test_residual_is_system_mismatch(rng):
    for _ in range(30):
        U = random_unitary(rng)
        state = decompose(random_density(rng))
        zeta = rng.uniform(-0.5, 0.5, 3)
        r = MatchingProblem(U).residual(state, zeta)
        diff = product_output(U, state.a, zeta) - correlated_output(U, state)
        assert np.allclose(r, [np.trace(diff @ P).real for P in _paulis()], atol=1e-12)


def _paulis():
    return [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def test_explicit_conditions_examples(rng):
    p = NonlocalParams(rng.uniform(0, 2 * np.pi, 3))
    a, b = rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 3)
    assert np.allclose(matching_residuals(p, a, b, np.outer(a, b), b), 0, atol=1e-14)
    # diagonal correlations with alpha_1 = 0: zeta = (b1, 0, 0)
    p0 = NonlocalParams([0.0, 0.7, 1.1])
    T = np.diag(rng.uniform(-0.3, 0.3, 3))
    assert np.allclose(matching_residuals(p0, a, b, T, [b[0], 0, 0]), 0, atol=1e-14)


def test_explicit_conditions_agree_with_solver(rng):
    for _ in range(50):
        p = NonlocalParams(rng.uniform(0, 2 * np.pi, 3))
        state = decompose(random_density(rng))
        sol = solve_env(nonlocal_unitary(p), state)
        r = matching_residuals(p, state.a, state.b, state.T, sol.zeta)
        if sol.residual_norm < 1e-12:
            assert np.abs(r).max() < 1e-10
        z = rng.uniform(-1, 1, 3)
        full = MatchingProblem(nonlocal_unitary(p)).residual(state, z)
        assert (np.abs(matching_residuals(p, state.a, state.b, state.T, z)).max() < 1e-12) == (np.abs(full).max() < 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_solution_is_min_norm(seed):
    rng = np.random.default_rng(seed)
    U, state = random_unitary(rng), decompose(random_density(rng))
    mp = MatchingProblem(U)
    A, c = mp.linear_system(state.a, state.b, state.T)
    sol = mp.solve(state)
    ref, *_ = np.linalg.lstsq(A, c, rcond=1e-12)
    assert np.allclose(sol.zeta, ref, atol=1e-9)
    assert sol.residual_norm == pytest.approx(np.linalg.norm(A @ ref - c), abs=1e-9)


def test_env_solution_json():
    d = solve_env(CNOT, bell_state("phi+")).to_dict()
    assert set(d) == {"zeta", "residual", "feasibility"}
    assert d["feasibility"] in {"valid", "invalid", "inconsistent"}


def test_kraus_identity_gate():
    ch = kraus_from_env(np.eye(4), [0.3, 0.1, -0.2])
    rho = qubit_density([0.2, -0.4, 0.1])
    assert np.allclose(ch(rho), rho)


def test_kraus_cnot_dephasing():
    ch = kraus_from_env(CNOT, [0, 0, 1])
    ops = [K for K in ch.operators if np.abs(K).max() > 1e-14]
    assert len(ops) == 2
    assert any(np.allclose(K, np.diag([1, 0])) for K in ops)
    assert any(np.allclose(K, np.diag([0, 1])) for K in ops)


def test_kraus_random_against_product_evolution(rng):
    for _ in range(50):
        U = random_unitary(rng)
        z = rng.normal(size=3)
        z *= rng.uniform() / np.linalg.norm(z)
        ch = kraus_from_env(U, z)
        assert ch.completeness_defect < 1e-12
        a = 0.9 * rng.normal(size=3) / np.sqrt(3)
        a /= max(1.0, np.linalg.norm(a))
        assert np.abs(ch(qubit_density(a)) - product_output(U, a, z)).max() < 1e-12
