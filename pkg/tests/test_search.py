import json

import numpy as np
import pytest

from ugen.channel import stinespring_dilate
from ugen.qstate import TwoQubitState, bloch_to_density, werner_state
from ugen.search import (
    cases_from_json,
    cases_to_json,
    check_constraints,
    draw_case,
    generate_cases,
    make_case,
    optimize_local_unitary,
    optimize_two_term_kraus,
    sweep,
    validate_result,
)
from ugen.unitary import CNOT, NonlocalParams


@pytest.fixture(scope="module")
def small_sweep():
    return sweep(12, 7)


def test_generation_deterministic():
    a = [c.to_dict() for c in generate_cases(6, 11)]
    b = [c.to_dict() for c in generate_cases(6, 11)]
    assert a == b
    # per-case streams do not depend on how many cases are drawn
    assert draw_case(11, 4).to_dict() == a[4]


def test_generation_workers_match():
    a = [c.to_dict() for c in generate_cases(4, 3, workers=1)]
    b = [c.to_dict() for c in generate_cases(4, 3, workers=2)]
    assert a == b


def test_generated_cases_obey_constraints():
    for c in generate_cases(15, 5):
        assert check_constraints(c)
        al = c.alpha.alpha
        s2, c2 = np.sin(2 * al), np.cos(2 * al)
        T = c.state.T
        for i in range(3):
            for j in range(3):
                if i == j:
                    assert T[i, j] == 0
                else:
                    assert 0.25 <= abs(T[i, j]) <= 1
                    assert np.sign(T[i, j]) == np.sign(c2[i] * s2[j])
        assert np.all(np.abs(c.state.a) <= 0.5) and np.all(np.abs(c.state.b) <= 0.5)
        assert np.linalg.eigvalsh(c.state.density()).min() >= -1e-10
        assert c.retained == (not c.baseline.is_valid)


def test_tii_flag_draws_diagonal():
    c = draw_case(5, 0, tii=True)
    assert check_constraints(c, tii=True)
    assert np.any(np.diag(c.state.T) != 0)


def test_case_json_roundtrip():
    cases = generate_cases(3, 2)
    back = cases_from_json(cases_to_json(cases))
    assert [c.to_dict() for c in back] == [c.to_dict() for c in cases]
    assert [c.retained for c in back] == [c.retained for c in cases]


def test_baseline_feasible_case_rejected():
    c = make_case(0, NonlocalParams([0.2, 0.3, 0.4]), TwoQubitState.product([0.1, 0, 0], [0, 0.2, 0]))
    assert not c.retained
    with pytest.raises(ValueError):
        optimize_local_unitary(c)


def test_werner_cnot_local_unitary():
    c = make_case(0, NonlocalParams([np.pi / 4, 0, 0]), werner_state(0.8), U=CNOT)
    assert c.retained
    r = optimize_local_unitary(c)
    assert r.resolved and r.fidelity == pytest.approx(1, abs=1e-12)
    res, F = validate_result(c, r)
    assert res <= 1e-9 and F == pytest.approx(r.fidelity, abs=1e-9)


def test_sweep_results_validate(small_sweep):
    s = small_sweep.summary()
    assert s["retained"] > 0 and s["resolved"] == s["retained"]
    for o in small_sweep.retained:
        for r in (o.unitary, o.kraus):
            if r is None:
                continue
            res, F = validate_result(o.case, r)
            assert abs(res - r.residual) <= 1e-9 or res <= 1e-9
            assert F == pytest.approx(r.fidelity, abs=1e-9)
            assert 0 <= r.fidelity <= 1


def test_axis_stage_has_unit_fidelity(small_sweep):
    for o in small_sweep.retained:
        if o.unitary.stage == "axis_rotation":
            assert o.unitary.fidelity == pytest.approx(1, abs=1e-12)


def test_kraus_results_dilate(small_sweep):
    for o in small_sweep.retained:
        if o.kraus is None:
            continue
        assert o.kraus.resolved and o.kraus.fidelity >= 1 - 1e-6
        d = stinespring_dilate(o.kraus.kraus)
        assert np.abs(d.W.conj().T @ d.W - np.eye(4)).max() < 1e-10
        rho = bloch_to_density(o.case.state.a)
        assert np.abs(d.apply(rho) - o.kraus.kraus(rho)).max() < 1e-10


def test_kraus_on_axis_resolved_case():
    # a unitary solution is a degenerate two-term channel, so Kraus must also succeed
    c = make_case(0, NonlocalParams([np.pi / 4, 0, 0]), werner_state(0.6), U=CNOT)
    r = optimize_two_term_kraus(c)
    assert r.resolved and r.residual <= 1e-6 and r.fidelity >= 1 - 1e-6


def test_rows_columns(small_sweep):
    rows = small_sweep.rows()
    assert len(rows) == 12
    need = {"id", "alpha1", "alpha2", "alpha3", "retained", "stage", "fidelity", "residual", "zeta1", "zeta2", "zeta3"}
    assert need <= set(rows[0])
    json.dumps(small_sweep.summary())
