import numpy as np
import pytest

from conftest import qubit_density
from ugen.errors import DomainError
from ugen.ncp import (
    PHI_PLUS_DM,
    R_Y_HALF_PI,
    dynamical_matrix,
    dynamical_matrix_numeric,
    env_solution_all_inputs,
    evolution_unitary,
    evolve_time,
    lambda_state,
    min_negative_eigenvalue_closed_form,
    mitigated_dynamical_matrix,
    realign,
    realigned_spectrum,
)
from ugen.qstate import partial_trace, reconstruct
from ugen.unitary import CNOT

T_GRID = np.pi / 2 * np.arange(1, 51) / 50


def test_lambda_examples():
    s = lambda_state(1.0, [0.3, 0.0, 0.2])
    assert np.allclose(s.T, 0)
    assert np.allclose(reconstruct(s), np.kron(qubit_density([0.3, 0, 0.2]), np.eye(2) / 2))
    assert np.allclose(reconstruct(lambda_state(0.0, [0, 0, 0])), PHI_PLUS_DM)
    with pytest.raises(DomainError):
        lambda_state(0.3, [0.5, 0, 0])


def test_lambda_marginal(rng):
    for _ in range(20):
        p = rng.uniform()
        v = rng.normal(size=3)
        v *= p * rng.uniform() / np.linalg.norm(v)
        rho = reconstruct(lambda_state(p, v))
        assert np.abs(partial_trace(rho, "system") - qubit_density(v)).max() < 1e-12


def test_evolution_unitary(rng):
    assert np.allclose(evolution_unitary(0), np.eye(4))
    rho = np.diag([0.1, 0.2, 0.3, 0.4]) + 0j
    assert np.allclose(evolve_time(np.pi / 2, rho), CNOT @ rho @ CNOT)
    U = evolution_unitary(np.pi)
    assert np.allclose(U @ rho @ U.conj().T, rho)
    for t in rng.uniform(0, 7, 10):
        U = evolution_unitary(t)
        assert np.abs(U.conj().T @ U - np.eye(4)).max() < 1e-12


def test_dynamical_matrix_examples():
    assert np.allclose(dynamical_matrix(0.4, 0.0).A, np.eye(4))
    A = dynamical_matrix(1.0, 0.8).A
    assert A[1, 0] == 0 and A[1, 3] == 0
    assert np.abs(dynamical_matrix(0.5, 0.7).A - dynamical_matrix_numeric(0.5, 0.7).A).max() < 1e-14


def test_dynamical_matrix_oracle_grid():
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        for t in T_GRID[::7]:
            assert np.abs(dynamical_matrix(p, t).A - dynamical_matrix_numeric(p, t).A).max() < 1e-12


def test_dynamical_matrix_maps_inputs(rng):
    p, t = 0.6, 0.9
    A = dynamical_matrix(p, t)
    for _ in range(10):
        v = rng.normal(size=3)
        v *= p * rng.uniform() / np.linalg.norm(v)
        rho = reconstruct(lambda_state(p, v))
        direct = partial_trace(evolve_time(t, rho), "system")
        assert np.abs(A(qubit_density(v)) - direct).max() < 1e-12


def test_realign_identity():
    ev = np.sort(realigned_spectrum(np.eye(4)))
    assert np.allclose(ev, [0, 0, 0, 2], atol=1e-14)
    # realignment is an involution
    A = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(realign(realign(A)), A)


def test_ncp_for_correlated_family():
    for p in (0.1, 0.5, 0.9):
        for t in T_GRID:
            assert realigned_spectrum(dynamical_matrix(p, t))[0] < 0


def test_cp_at_p_one():
    for t in T_GRID:
        assert realigned_spectrum(dynamical_matrix(1.0, t))[0] >= -1e-12


def test_closed_form_values():
    assert min_negative_eigenvalue_closed_form(0.0) == 0.0
    assert min_negative_eigenvalue_closed_form(np.pi / 2) == pytest.approx(-0.0590169943749, abs=1e-12)
    t = 0.3
    assert min_negative_eigenvalue_closed_form(t) == pytest.approx(realigned_spectrum(dynamical_matrix(0.5, t))[0], abs=1e-12)


def test_mitigated_map():
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        for t in np.linspace(0.1, np.pi / 2, 12):
            A = mitigated_dynamical_matrix(p, t)
            assert A.A[1, 0] == 0 and A.A[2, 3] == 0
            assert realigned_spectrum(A)[0] >= -1e-12
            num = dynamical_matrix_numeric(p, t, pre=R_Y_HALF_PI)
            assert np.abs(num.A - A.A).max() < 1e-12
    assert np.allclose(mitigated_dynamical_matrix(0.3, 0.0).A, np.eye(4))


def test_env_solution_all_inputs():
    assert env_solution_all_inputs(0.4, [0, 0, 0]) < 1e-12
    assert env_solution_all_inputs(0.4, [0, 0.3, -0.2]) < 1e-12
    assert env_solution_all_inputs(0.4, [0.5, 0, 0]) > 1e-6
