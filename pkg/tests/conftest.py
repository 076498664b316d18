import os
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from decarb_planner.domain import (
    AltFuel, AvailabilityMatrix, CcsTech, Instance, NetTech, PeriodParams, PlanningHorizon,
    PowerPlant, RenewableTech,
)
from decarb_planner.workbook import read_workbook, to_instance

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=300,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = Path(__file__).resolve().parents[1] / "src" / "decarb_planner" / "data"
SCENARIO_1 = DATA / "scenario_1"
SCENARIO_2 = DATA / "scenario_2"


@pytest.fixture(scope="session")
def scenario1():
    return to_instance(read_workbook(SCENARIO_1))


@pytest.fixture(scope="session")
def scenario2():
    return to_instance(read_workbook(SCENARIO_2))


def series(K, value):
    return tuple(float(value) for _ in range(K))


def tiny_instance(K=2, demand=10.0, limit=20.0, budget=1e4, aff=1.0, available=True,
                  plants=None):
    """Three plants (coal, gas, solar) with one of every mitigation technology."""
    if plants is None:
        plants = (
            PowerPlant("P1", "fossil", "coal", 0.0, 8.0, 1.0, 1, K + 1,
                       series(K, 10), series(K, 5), series(K, 1)),
            PowerPlant("P2", "fossil", "natural_gas", 0.0, 6.0, 0.5, 1, K + 1,
                       series(K, 20), series(K, 5), series(K, 1)),
            PowerPlant("P3", "renewable", "solar", 0.0, 4.0, 0.1, 1, K + 1,
                       series(K, 40), series(K, 5), series(K, 1)),
        )
    ccs = (CcsTech("CCS_1", series(K, 0.85), series(K, 0.15), series(K, 30), series(K, 2)),)
    alt = (AltFuel("SOLID_1", "solid", series(K, 0.2), series(K, 25), series(K, 1)),
           AltFuel("GAS_1", "gas", series(K, 0.1), series(K, 30), series(K, 1)))
    ren = (RenewableTech("HYDRO", series(K, 0.05), series(K, 45), series(K, 5),
                         series(K, 3), series(K, 1)),)
    nets = (NetTech("EP_1", "EP", series(K, -0.5), series(K, 60), series(K, 3),
                    series(K, 3), series(K, 1)),
            NetTech("EC_1", "EC", series(K, -1.0), series(K, 50), series(K, 3),
                    series(K, 3), series(K, 1)))
    ids = [t.id for t in (*ren, *alt, *ccs, *nets)]
    avail = AvailabilityMatrix({i: tuple(available for _ in range(K)) for i in ids})
    return Instance(PlanningHorizon(K), plants, ccs, alt, ren, nets,
                    tuple(PeriodParams(demand, limit, budget) for _ in range(K)), avail, aff)


@st.composite
def small_instances(draw, max_periods=3):
    """Random valid instances small enough for exhaustive cross-checks."""
    K = draw(st.integers(1, max_periods))
    n_plants = draw(st.integers(1, 3))
    money = st.floats(0, 50, allow_nan=False).map(lambda v: round(v, 2))
    plants = []
    costs = {}
    for i in range(n_plants):
        fuel = draw(st.sampled_from(["coal", "natural_gas", "solar"]))
        if fuel not in costs:
            # one cost row per fuel, as in a workbook
            costs[fuel] = (tuple(draw(money) for _ in range(K)), series(K, draw(money)),
                           series(K, draw(st.floats(0, 3).map(lambda v: round(v, 2)))))
        cat = "renewable" if fuel == "solar" else "fossil"
        ub = draw(st.floats(1, 15).map(lambda v: round(v, 2)))
        lb = round(ub * draw(st.floats(0, 0.5)), 2)
        cm = draw(st.integers(1, K))
        dcm = draw(st.integers(cm + 1, K + 1))
        ci = {"coal": 1.0, "natural_gas": 0.5, "solar": 0.1}[fuel]
        plants.append(PowerPlant(f"P{i + 1}", cat, fuel, lb, ub, ci, cm, dcm, *costs[fuel]))
    inst = tiny_instance(K, plants=tuple(plants))
    avail = {tid: tuple(draw(st.booleans()) for _ in range(K)) for tid in inst.tech_ids()}
    demand = round(draw(st.floats(0, 20)), 2)
    params = tuple(PeriodParams(demand, round(draw(st.floats(0, 20)), 2), 1e4) for _ in range(K))
    aff = draw(st.sampled_from([0.1, 0.5, 1.0]))
    return Instance(inst.horizon, inst.plants, inst.ccs_techs, inst.alt_fuels, inst.renewables,
                    inst.nets, params, AvailabilityMatrix(avail), aff)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (not s.startswith("CRITERION"), s)):
            terminalreporter.write_line(line)
