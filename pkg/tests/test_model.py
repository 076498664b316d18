from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decarb_planner.domain import AvailabilityMatrix
from decarb_planner.model import (
    BINARY_FAMILIES, MIN_BUDGET, MIN_EMISSION, InvalidInstance, binary_count, build_model,
    fixed_keys,
)
from decarb_planner.planning import solve_plan
from decarb_planner.report import audit_feasibility

from conftest import small_instances, tiny_instance
from oracles import highs_milp


def _row(model, name):
    i = model.problem.row_names.index(name)
    return model.problem.A[i], model.problem.senses[i], model.problem.rhs[i]


def _coef(model, row_name, key):
    return _row(model, row_name)[0][model.catalog[key]]


def test_bundled_binary_count(scenario2):
    assert binary_count(scenario2) == 486
    for objective in (MIN_BUDGET, MIN_EMISSION):
        m = build_model(scenario2, objective)
        assert int(m.problem.integer.sum()) == 486
        assert sum(m.catalog.count(f) for f in BINARY_FAMILIES) == 486


def test_single_period_has_no_ratchets():
    m = build_model(tiny_instance(K=1), MIN_BUDGET)
    assert m.ratchet_rows() == []


def test_ratchets_only_inside_commissioning_window(scenario2):
    m = build_model(scenario2, MIN_BUDGET)
    rows = set(m.ratchet_rows())
    # P6 runs in periods 1-2 only; P9 starts in period 2; P10 in period 4
    assert "ratchet_FS[P6,1]" in rows
    assert not any(r.startswith("ratchet_FS[P6,") and not r.endswith(",1]") for r in rows)
    assert "ratchet_FS[P9,1]" not in rows and "ratchet_FS[P9,2]" in rows
    assert "ratchet_FS[P10,3]" not in rows and "ratchet_FS[P10,4]" in rows
    # P7 is decommissioned at period 5, so nothing links periods 4 and 5
    assert "ratchet_FS[P7,4]" not in rows and "ratchet_FS[P7,3]" in rows
    for k in range(1, 6):
        assert f"ratchet_FC[{k},SOLAR]" in rows


def test_zero_fixing_outside_window(scenario2):
    m = build_model(scenario2, MIN_BUDGET)
    lb, ub = m.problem.lb, m.problem.ub
    for p in scenario2.plants:
        for k in range(1, 7):
            j = m.catalog[("FS", p.id, k)]
            a = m.catalog[("A", p.id, k)]
            if p.active(k):
                assert ub[j] == np.inf and ub[a] == 1
            else:
                assert lb[j] == ub[j] == 0 and lb[a] == ub[a] == 0
    for key in fixed_keys(m):
        j = m.catalog[key]
        assert lb[j] == ub[j] == 0.0


def test_availability_fixing(scenario1):
    m = build_model(scenario1, MIN_EMISSION)
    ub = m.problem.ub
    # CCS_2 becomes available in period 4 in the first scenario
    assert ub[m.catalog[("B", "P7", 3, "CCS_2")]] == 0
    assert ub[m.catalog[("B", "P7", 4, "CCS_2")]] == 1
    assert ub[m.catalog[("FEP", 6, "EP_1")]] == 0
    # renewables never carry CCS or alternative fuels
    assert ub[m.catalog[("FR", "P1", 4, "CCS_2")]] == 0
    assert ub[m.catalog[("FAS", "P3", 3, "SOLID_2")]] == 0


def test_ccs_intensity_coefficient(scenario2):
    m = build_model(scenario2, MIN_EMISSION)
    ccs = scenario2.ccs_techs[0]
    rr, x = ccs.removal_ratio_per_period[0], ccs.parasitic_loss_per_period[0]
    coal = next(p for p in scenario2.plants if p.fuel == "coal")
    want = coal.co2_intensity * (1 - rr) / (1 - x)
    assert _coef(m, "co2_load[1]", ("FNR", coal.id, 1, ccs.id)) == pytest.approx(want)


def test_emission_limit_and_budget_rows_follow_objective():
    inst = tiny_instance(K=2)
    mb = build_model(inst, MIN_BUDGET)
    me = build_model(inst, MIN_EMISSION)
    assert "emission_limit[1]" in mb.problem.row_names
    assert not any(r.startswith("budget[") for r in mb.problem.row_names)
    assert "budget[2]" in me.problem.row_names
    assert not any(r.startswith("emission_limit[") for r in me.problem.row_names)
    assert mb.problem.c[mb.catalog[("TC", 1)]] == 1 and mb.problem.c[mb.catalog[("TE", 1)]] == 0
    assert me.problem.c[me.catalog[("TE", 2)]] == 1 and me.problem.c[me.catalog[("TC", 2)]] == 0


@given(alpha=st.floats(0.01, 10))
def test_aff_scales_only_capital_terms(alpha):
    inst = tiny_instance(K=2)
    base = build_model(inst, MIN_BUDGET)
    scaled = build_model(inst.with_aff(alpha), MIN_BUDGET)
    A0, A1 = base.problem.A, scaled.problem.A
    names = base.problem.row_names
    for i, name in enumerate(names):
        if not name.startswith(("cost_", "cost_total")):
            assert np.array_equal(A0[i], A1[i]), name
    p = inst.plants[0]
    fns = ("FNS", p.id, 1)
    diff = _coef(scaled, "cost_plants[1]", fns) - _coef(base, "cost_plants[1]", fns)
    assert diff == pytest.approx((alpha - 1.0) * p.capacity_capex_per_period[0])
    a = ("A", p.id, 1)
    assert _coef(scaled, "cost_plants[1]", a) == pytest.approx(alpha * p.fixed_capex_per_period[0])


def test_plants_only_reduction():
    inst = tiny_instance(K=3, available=False, demand=12.0)
    m, sol = solve_plan(inst, MIN_EMISSION)
    assert sol.is_optimal
    for k in range(1, 4):
        fns = sum(sol.get("FNS", p.id, k) for p in inst.plants)
        fs = sum(sol.get("FS", p.id, k) for p in inst.plants)
        assert fns == pytest.approx(12.0, abs=1e-6) and fs == pytest.approx(12.0, abs=1e-6)
    free = [m.problem.var_names[j] for j in np.flatnonzero(m.problem.ub > 0)]
    assert not any(n.startswith(("FR", "FNR", "FAS", "FAG", "FC", "FEP", "FEC")) for n in free)


def test_unknown_objective_is_rejected():
    with pytest.raises(ValueError, match="objective"):
        build_model(tiny_instance(), "max_profit")


def test_singular_parasitic_loss_is_rejected():
    inst = tiny_instance()
    ccs = replace(inst.ccs_techs[0], parasitic_loss_per_period=(0.1, 1.0))
    with pytest.raises(ValueError, match="parasitic"):
        build_model(replace(inst, ccs_techs=(ccs,)), MIN_BUDGET)


def test_invalid_instance_is_rejected():
    inst = tiny_instance()
    bad = replace(inst.plants[0], lower_bound=9.0, upper_bound=1.0)
    with pytest.raises(InvalidInstance) as exc:
        build_model(replace(inst, plants=(bad, *inst.plants[1:])), MIN_BUDGET)
    assert exc.value.violations


def test_tiny_instance_uses_mitigation():
    # tight limit forces CCS, fuel switching or NETs onto the coal plant
    inst = tiny_instance(K=2, demand=12.0, limit=3.0)
    _, sol = solve_plan(inst, MIN_BUDGET)
    assert sol.is_optimal
    assert all(sol.get("TE", k) <= 3.0 + 1e-7 for k in (1, 2))
    assert audit_feasibility(inst, sol) == []


@given(small_instances(), st.sampled_from([MIN_BUDGET, MIN_EMISSION]))
def test_random_instances_match_highs(inst, objective):
    m, sol = solve_plan(inst, objective)
    status, value = highs_milp(m.problem)
    assert sol.status == status
    if status == "optimal":
        assert sol.objective_value == pytest.approx(value, rel=1e-6, abs=1e-6)
        assert audit_feasibility(inst, sol) == []


@given(small_instances(), st.sampled_from([MIN_BUDGET, MIN_EMISSION]))
def test_binary_ratchet_tightening_keeps_the_optimum(inst, objective):
    a = build_model(inst, objective, tighten=True)
    b = build_model(inst, objective, tighten=False)
    sa, sb = highs_milp(a.problem), highs_milp(b.problem)
    assert sa[0] == sb[0]
    if sa[0] == "optimal":
        assert sa[1] == pytest.approx(sb[1], rel=1e-7, abs=1e-7)
