"""Assembly of the planning MILP from an :class:`~decarb_planner.domain.Instance`.

Variable families (indices in brackets, ``k`` is the 1-based period):

=========  ===========  ===============================================
family     index        meaning
=========  ===========  ===============================================
FS         plant, k     gross generation of a plant
FNS        plant, k     generation with no mitigation applied
A          plant, k     plant operates (binary)
FR / FNR   plant, k, n  gross / net generation routed through CCS tech n
B          plant, k, n  CCS tech n retrofitted (binary)
FAS / G    plant, k, s  generation on alternative solid fuel s / binary
FAG / H    plant, k, g  generation on alternative gas fuel g / binary
FC / C     k, r         renewable deployment / binary
FEP / D    k, p         energy-producing NETs deployment / binary
FEC / E    k, q         energy-consuming NETs deployment / binary
TE         k            net CO2 load (free sign)
TC         k            total cost
CTF..CTEC  k            cost subtotals (plants, renewables, EP, EC)
=========  ===========  ===============================================

Every family is created for the full index product so the catalog has a
fixed shape; combinations that cannot be used (plant outside its
commissioning window, technology flagged unavailable, CCS on a renewable
plant, a fuel of the wrong phase) are fixed to zero through their bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .domain import Instance, ccs_intensity, validate_instance
from .milp.problem import EQ, GE, LE, MilpProblem, ProblemBuilder

MIN_BUDGET = "min_budget"
MIN_EMISSION = "min_emission"
OBJECTIVES = (MIN_BUDGET, MIN_EMISSION)

BINARY_FAMILIES = ("A", "B", "G", "H", "C", "D", "E")
FLOW_FAMILIES = ("FS", "FNS", "FR", "FNR", "FAS", "FAG", "FC", "FEP", "FEC")
PERIOD_FAMILIES = ("TE", "TC", "CTF", "CTC", "CTEP", "CTEC")

Key = tuple  # (family, *indices)


class InvalidInstance(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(str(v) for v in self.violations)
        super().__init__(f"instance has {len(self.violations)} violation(s):\n{lines}")


@dataclass
class VariableCatalog:
    """Bijection between column indices and ``(family, *indices)`` keys."""

    keys: list[Key] = field(default_factory=list)
    _index: dict[Key, int] = field(default_factory=dict)

    def add(self, key: Key) -> int:
        if key in self._index:
            raise KeyError(f"duplicate variable {key}")
        self._index[key] = len(self.keys)
        self.keys.append(key)
        return self._index[key]

    def __getitem__(self, key: Key) -> int:
        return self._index[key]

    def __contains__(self, key: Key) -> bool:
        return key in self._index

    def __len__(self) -> int:
        return len(self.keys)

    def family(self, name: str) -> list[int]:
        return [j for j, k in enumerate(self.keys) if k[0] == name]

    def count(self, name: str) -> int:
        return sum(1 for k in self.keys if k[0] == name)

    def values(self, x: np.ndarray) -> dict[Key, float]:
        return {k: float(x[j]) for j, k in enumerate(self.keys)}


def var_name(key: Key) -> str:
    return f"{key[0]}[{','.join(str(i) for i in key[1:])}]"


@dataclass(frozen=True, eq=False)
class PlanningModel:
    instance: Instance
    objective: str
    problem: MilpProblem
    catalog: VariableCatalog

    def values(self, x: np.ndarray) -> dict[Key, float]:
        return self.catalog.values(x)

    def ratchet_rows(self) -> list[str]:
        return [r for r in self.problem.row_names if r.startswith("ratchet_")]


def _plant_window(instance: Instance, plant) -> Iterator[int]:
    """Periods ``k`` for which a ratchet links ``k`` and ``k + 1``."""
    for k in range(1, instance.K):
        if plant.active(k) and plant.active(k + 1):
            yield k


def build_model(instance: Instance, objective: str, tighten: bool = True,
                check: bool = True) -> PlanningModel:
    """Translate ``instance`` into a MILP minimising total cost or total CO2 load.

    ``min_budget`` minimises the summed period costs subject to each period's
    emission limit; ``min_emission`` minimises the summed CO2 load subject to
    each period's budget.  With ``tighten`` the plant on/off binaries are also
    made non-decreasing across the commissioning window.
    """
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    for ccs in instance.ccs_techs:
        if any(x == 1.0 for x in ccs.parasitic_loss_per_period):
            raise ValueError(f"CCS technology {ccs.id} has parasitic loss 1 (no net output)")
    if check:
        violations = validate_instance(instance)
        if violations:
            raise InvalidInstance(violations)

    K = instance.K
    periods = range(1, K + 1)
    plants = instance.plants
    ccs = instance.ccs_techs
    solids = instance.solid_fuels
    gases = instance.gas_fuels
    rens = instance.renewables
    eps = instance.ep_nets
    ecs = instance.ec_nets
    avail = instance.availability
    aff = instance.aff

    b = ProblemBuilder(name="DECARB")
    cat = VariableCatalog()

    def var(key: Key, lb: float = 0.0, ub: float = np.inf, integer: bool = False) -> int:
        j = b.add_var(var_name(key), lb, ub, integer)
        assert cat.add(key) == j
        return j

    def v(*key) -> int:
        return cat[key]

    for p in plants:
        for k in periods:
            var(("FS", p.id, k))
    for p in plants:
        for k in periods:
            var(("FNS", p.id, k))
    for p in plants:
        for k in periods:
            var(("A", p.id, k), 0, 1, True)
    for fam, techs, binfam in (("FR", ccs, "B"), ("FAS", solids, "G"), ("FAG", gases, "H")):
        for p in plants:
            for k in periods:
                for t in techs:
                    var((fam, p.id, k, t.id))
        if fam == "FR":
            for p in plants:
                for k in periods:
                    for t in techs:
                        var(("FNR", p.id, k, t.id))
        for p in plants:
            for k in periods:
                for t in techs:
                    var((binfam, p.id, k, t.id), 0, 1, True)
    for fam, techs, binfam in (("FC", rens, "C"), ("FEP", eps, "D"), ("FEC", ecs, "E")):
        for k in periods:
            for t in techs:
                var((fam, k, t.id))
        for k in periods:
            for t in techs:
                var((binfam, k, t.id), 0, 1, True)
    for k in periods:
        var(("TE", k), -np.inf, np.inf)
    for fam in PERIOD_FAMILIES[1:]:
        for k in periods:
            var((fam, k))

    # ---- zero-fixing: commissioning window, availability, applicability
    def fix(*key) -> None:
        b.fix(cat[key])

    for p in plants:
        for k in periods:
            on = p.active(k)
            if not on:
                fix("FS", p.id, k)
                fix("FNS", p.id, k)
                fix("A", p.id, k)
            for t in ccs:
                if not (on and p.is_fossil and avail(t.id, k)):
                    for fam in ("FR", "FNR", "B"):
                        fix(fam, p.id, k, t.id)
            for t in solids:
                if not (on and t.applies_to(p) and avail(t.id, k)):
                    fix("FAS", p.id, k, t.id)
                    fix("G", p.id, k, t.id)
            for t in gases:
                if not (on and t.applies_to(p) and avail(t.id, k)):
                    fix("FAG", p.id, k, t.id)
                    fix("H", p.id, k, t.id)
    for fam, binfam, techs in (("FC", "C", rens), ("FEP", "D", eps), ("FEC", "E", ecs)):
        for k in periods:
            for t in techs:
                if not avail(t.id, k):
                    fix(fam, k, t.id)
                    fix(binfam, k, t.id)

    # ---- constraints
    for k in periods:
        b.add_row({v("FS", p.id, k): 1.0 for p in plants}, EQ, instance.period_params[k - 1].demand,
                  f"demand[{k}]")
    for p in plants:
        for k in periods:
            b.add_row({v("FS", p.id, k): 1.0, v("A", p.id, k): -p.lower_bound}, GE, 0.0,
                      f"plant_lb[{p.id},{k}]")
            b.add_row({v("FS", p.id, k): 1.0, v("A", p.id, k): -p.upper_bound}, LE, 0.0,
                      f"plant_ub[{p.id},{k}]")

    def ratchet(name: str, later: int, earlier: int) -> None:
        b.add_row({later: 1.0, earlier: -1.0}, GE, 0.0, name)

    for p in plants:
        for k in _plant_window(instance, p):
            ratchet(f"ratchet_FS[{p.id},{k}]", v("FS", p.id, k + 1), v("FS", p.id, k))
            if tighten:
                ratchet(f"ratchet_A[{p.id},{k}]", v("A", p.id, k + 1), v("A", p.id, k))
            for fam, techs in (("FR", ccs), ("FAS", solids), ("FAG", gases)):
                for t in techs:
                    ratchet(f"ratchet_{fam}[{p.id},{k},{t.id}]",
                            v(fam, p.id, k + 1, t.id), v(fam, p.id, k, t.id))

    for p in plants:
        for k in periods:
            for t in ccs:
                b.add_row({v("FR", p.id, k, t.id): 1.0, v("B", p.id, k, t.id): -p.upper_bound},
                          LE, 0.0, f"ccs_ub[{p.id},{k},{t.id}]")
            row = {v("FR", p.id, k, t.id): 1.0 for t in ccs}
            row[v("FS", p.id, k)] = -1.0
            b.add_row(row, LE, 0.0, f"ccs_total[{p.id},{k}]")
            for t in ccs:
                loss = t.parasitic_loss_per_period[k - 1]
                b.add_row({v("FNR", p.id, k, t.id): 1.0, v("FR", p.id, k, t.id): -(1.0 - loss)},
                          EQ, 0.0, f"ccs_net[{p.id},{k},{t.id}]")
            for fam, binfam, techs, tag in (("FAS", "G", solids, "solid_ub"), ("FAG", "H", gases, "gas_ub")):
                for t in techs:
                    b.add_row({v(fam, p.id, k, t.id): 1.0, v(binfam, p.id, k, t.id): -p.upper_bound},
                              LE, 0.0, f"{tag}[{p.id},{k},{t.id}]")
            row = {v("FNS", p.id, k): 1.0, v("FS", p.id, k): -1.0}
            for t in ccs:
                row[v("FR", p.id, k, t.id)] = 1.0
            for t in solids:
                row[v("FAS", p.id, k, t.id)] = 1.0
            for t in gases:
                row[v("FAG", p.id, k, t.id)] = 1.0
            b.add_row(row, EQ, 0.0, f"plant_split[{p.id},{k}]")

    for fam, binfam, techs, tag in (("FC", "C", rens, "ren_cap"), ("FEP", "D", eps, "ep_cap"),
                                    ("FEC", "E", ecs, "ec_cap")):
        for k in periods:
            for t in techs:
                cap = t.availability_cap_per_period[k - 1]
                b.add_row({v(fam, k, t.id): 1.0, v(binfam, k, t.id): -cap}, LE, 0.0,
                          f"{tag}[{k},{t.id}]")
        for k in range(1, K):
            for t in techs:
                ratchet(f"ratchet_{fam}[{k},{t.id}]", v(fam, k + 1, t.id), v(fam, k, t.id))

    for k in periods:
        row: dict[int, float] = {}
        for p in plants:
            row[v("FNS", p.id, k)] = 1.0
            for t in ccs:
                row[v("FNR", p.id, k, t.id)] = 1.0
            for t in solids:
                row[v("FAS", p.id, k, t.id)] = 1.0
            for t in gases:
                row[v("FAG", p.id, k, t.id)] = 1.0
        for t in rens:
            row[v("FC", k, t.id)] = 1.0
        for t in eps:
            row[v("FEP", k, t.id)] = 1.0
        for t in ecs:
            row[v("FEC", k, t.id)] = -1.0
        b.add_row(row, EQ, instance.period_params[k - 1].demand, f"energy_balance[{k}]")

    for k in periods:
        i = k - 1
        row = {v("TE", k): -1.0}
        for p in plants:
            row[v("FNS", p.id, k)] = p.co2_intensity
            for t in ccs:
                row[v("FNR", p.id, k, t.id)] = ccs_intensity(
                    p.co2_intensity, t.removal_ratio_per_period[i], t.parasitic_loss_per_period[i])
            for t in solids:
                row[v("FAS", p.id, k, t.id)] = t.ci_per_period[i]
            for t in gases:
                row[v("FAG", p.id, k, t.id)] = t.ci_per_period[i]
        for fam, techs in (("FC", rens), ("FEP", eps), ("FEC", ecs)):
            for t in techs:
                row[v(fam, k, t.id)] = t.ci_per_period[i]
        b.add_row(row, EQ, 0.0, f"co2_load[{k}]")

    for k in periods:
        i = k - 1
        row = {v("CTF", k): -1.0}
        for p in plants:
            row[v("FNS", p.id, k)] = p.op_cost_per_period[i] + aff * p.capacity_capex_per_period[i]
            row[v("A", p.id, k)] = aff * p.fixed_capex_per_period[i]
        b.add_row(row, EQ, 0.0, f"cost_plants[{k}]")
        for fam, binfam, techs, total in (("FC", "C", rens, "CTC"), ("FEP", "D", eps, "CTEP"),
                                          ("FEC", "E", ecs, "CTEC")):
            row = {v(total, k): -1.0}
            for t in techs:
                row[v(fam, k, t.id)] = t.op_cost_per_period[i] + aff * t.capacity_capex_per_period[i]
                row[v(binfam, k, t.id)] = aff * t.fixed_capex_per_period[i]
            b.add_row(row, EQ, 0.0, f"cost_{total}[{k}]")
        row = {v("TC", k): -1.0, v("CTF", k): 1.0, v("CTC", k): 1.0, v("CTEP", k): 1.0, v("CTEC", k): 1.0}
        for p in plants:
            for t in ccs:
                row[v("FNR", p.id, k, t.id)] = t.gen_cost_per_period[i]
                row[v("B", p.id, k, t.id)] = aff * t.fixed_cost_per_period[i]
            for fam, binfam, techs in (("FAS", "G", solids), ("FAG", "H", gases)):
                for t in techs:
                    row[v(fam, p.id, k, t.id)] = t.cost_per_period[i]
                    row[v(binfam, p.id, k, t.id)] = aff * t.fixed_cost_per_period[i]
        b.add_row(row, EQ, 0.0, f"cost_total[{k}]")

    for k in periods:
        pp = instance.period_params[k - 1]
        if objective == MIN_BUDGET:
            b.add_row({v("TE", k): 1.0}, LE, pp.emission_limit, f"emission_limit[{k}]")
            b.set_cost(v("TC", k), 1.0)
        else:
            b.add_row({v("TC", k): 1.0}, LE, pp.budget, f"budget[{k}]")
            b.set_cost(v("TE", k), 1.0)

    return PlanningModel(instance, objective, b.build(), cat)


def binary_count(instance: Instance) -> int:
    """Number of binaries in the catalog before any fixing."""
    I, K = len(instance.plants), instance.K
    return (I * K * (1 + len(instance.ccs_techs) + len(instance.solid_fuels) + len(instance.gas_fuels))
            + K * (len(instance.renewables) + len(instance.nets)))


def fixed_keys(model: PlanningModel) -> Iterable[Key]:
    p = model.problem
    for j, key in enumerate(model.catalog.keys):
        if p.lb[j] == p.ub[j] == 0.0:
            yield key
