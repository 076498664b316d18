"""Instance data for the multiperiod decarbonisation planning problem.

All per-period sequences are tuples indexed by ``k - 1`` for period ``k``
(periods are numbered from 1).  Objects are frozen; build a new instance
rather than mutating one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

MAX_PERIODS = 50

CATEGORIES = ("renewable", "fossil")
FUELS = ("solar", "hydro", "natural_gas", "oil", "coal", "biomass", "biogas", "msw", "other")
PHASES = ("solid", "gas")
NET_KINDS = ("EP", "EC")

# Which plant fuel each alternative-fuel phase may replace.
PHASE_FUEL = {"solid": "coal", "gas": "natural_gas"}


@dataclass(frozen=True)
class PlanningHorizon:
    num_periods: int
    period_labels: tuple[str, ...] = ()

    @property
    def periods(self) -> range:
        return range(1, self.num_periods + 1)


@dataclass(frozen=True)
class PowerPlant:
    id: str
    category: str
    fuel: str
    lower_bound: float
    upper_bound: float
    co2_intensity: float
    commission_period: int
    decommission_period: int
    op_cost_per_period: tuple[float, ...]
    fixed_capex_per_period: tuple[float, ...]
    capacity_capex_per_period: tuple[float, ...]

    def active(self, k: int) -> bool:
        """True when the plant may generate in period ``k``."""
        return self.commission_period <= k < self.decommission_period

    @property
    def is_fossil(self) -> bool:
        return self.category == "fossil"


@dataclass(frozen=True)
class CcsTech:
    id: str
    removal_ratio_per_period: tuple[float, ...]
    parasitic_loss_per_period: tuple[float, ...]
    gen_cost_per_period: tuple[float, ...]
    fixed_cost_per_period: tuple[float, ...]


@dataclass(frozen=True)
class AltFuel:
    id: str
    phase: str
    ci_per_period: tuple[float, ...]
    cost_per_period: tuple[float, ...]
    fixed_cost_per_period: tuple[float, ...]

    def applies_to(self, plant: PowerPlant) -> bool:
        return plant.fuel == PHASE_FUEL[self.phase]


@dataclass(frozen=True)
class RenewableTech:
    id: str
    ci_per_period: tuple[float, ...]
    op_cost_per_period: tuple[float, ...]
    availability_cap_per_period: tuple[float, ...]
    fixed_capex_per_period: tuple[float, ...]
    capacity_capex_per_period: tuple[float, ...]


@dataclass(frozen=True)
class NetTech:
    id: str
    kind: str
    ci_per_period: tuple[float, ...]
    op_cost_per_period: tuple[float, ...]
    availability_cap_per_period: tuple[float, ...]
    fixed_capex_per_period: tuple[float, ...]
    capacity_capex_per_period: tuple[float, ...]


@dataclass(frozen=True)
class PeriodParams:
    demand: float
    emission_limit: float
    budget: float


@dataclass(frozen=True)
class AvailabilityMatrix:
    """Per-period YES/NO deployability of every non-plant technology."""

    available: dict[str, tuple[bool, ...]] = field(default_factory=dict)

    def __call__(self, tech_id: str, k: int) -> bool:
        return self.available[tech_id][k - 1]

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.available.items())))


@dataclass(frozen=True)
class Instance:
    horizon: PlanningHorizon
    plants: tuple[PowerPlant, ...]
    ccs_techs: tuple[CcsTech, ...]
    alt_fuels: tuple[AltFuel, ...]
    renewables: tuple[RenewableTech, ...]
    nets: tuple[NetTech, ...]
    period_params: tuple[PeriodParams, ...]
    availability: AvailabilityMatrix
    aff: float = 1.0

    @property
    def K(self) -> int:
        return self.horizon.num_periods

    @property
    def solid_fuels(self) -> tuple[AltFuel, ...]:
        return tuple(f for f in self.alt_fuels if f.phase == "solid")

    @property
    def gas_fuels(self) -> tuple[AltFuel, ...]:
        return tuple(f for f in self.alt_fuels if f.phase == "gas")

    @property
    def ep_nets(self) -> tuple[NetTech, ...]:
        return tuple(t for t in self.nets if t.kind == "EP")

    @property
    def ec_nets(self) -> tuple[NetTech, ...]:
        return tuple(t for t in self.nets if t.kind == "EC")

    def tech_ids(self) -> list[str]:
        """Ids of every technology that needs an availability row."""
        return [t.id for t in (*self.renewables, *self.alt_fuels, *self.ccs_techs, *self.nets)]

    def with_aff(self, aff: float) -> Instance:
        from dataclasses import replace

        return replace(self, aff=float(aff))


def ccs_intensity(co2_intensity: float, removal_ratio: float, parasitic_loss: float) -> float:
    """CO2 intensity of retrofitted generation, per unit of *net* energy.

    Raises ``ZeroDivisionError`` when the parasitic loss is 1 (all output consumed).
    """
    if parasitic_loss == 1.0:
        raise ZeroDivisionError("parasitic loss of 1 leaves no net energy")
    return co2_intensity * (1.0 - removal_ratio) / (1.0 - parasitic_loss)


@dataclass(frozen=True)
class Violation:
    table: str
    row: str
    column: str
    rule: str

    def __str__(self) -> str:
        return f"{self.table}[{self.row}, {self.column}]: {self.rule}"


def _series_checks(
    table: str, row: str, values: Sequence[float], K: int
) -> Iterator[Violation]:
    if len(values) != K:
        yield Violation(table, row, "*", f"expected {K} period values, got {len(values)}")
    for k, v in enumerate(values, start=1):
        if v != v or v in (float("inf"), float("-inf")):
            yield Violation(table, row, str(k), "value must be finite")


def validate_instance(instance: Instance) -> list[Violation]:
    """Check every invariant of the instance data.

    Returns an empty list when the instance is usable; each entry otherwise
    names the table, row and column holding the offending value.
    """
    out: list[Violation] = []
    K = instance.horizon.num_periods
    if not 1 <= K <= MAX_PERIODS:
        out.append(Violation("RUN_CONFIG", "num_periods", "value", f"must be within 1..{MAX_PERIODS}"))
    labels = instance.horizon.period_labels
    if labels and len(labels) != K:
        out.append(Violation("RUN_CONFIG", "period_labels", "value", f"expected {K} labels"))
    if instance.aff < 0:
        out.append(Violation("RUN_CONFIG", "aff", "value", "aff must be >= 0"))

    def dupes(table: str, ids: Sequence[str]) -> None:
        seen: set[str] = set()
        for i in ids:
            if i in seen:
                out.append(Violation(table, i, "id", "duplicate id"))
            seen.add(i)

    dupes("PLANT_DATA", [p.id for p in instance.plants])
    dupes("TECH_IMPLEMENTATION_TIME", instance.tech_ids())

    for p in instance.plants:
        t = "PLANT_DATA"
        if p.category not in CATEGORIES:
            out.append(Violation(t, p.id, "Category", f"unknown category {p.category!r}"))
        if p.fuel not in FUELS:
            out.append(Violation(t, p.id, "Fuel", f"unknown fuel {p.fuel!r}"))
        if p.lower_bound < 0:
            out.append(Violation(t, p.id, "LB", "lower_bound must be >= 0"))
        if p.lower_bound > p.upper_bound:
            out.append(Violation(t, p.id, "LB", "lower_bound > upper_bound"))
        if p.co2_intensity < 0:
            out.append(Violation(t, p.id, "Intensity", "co2_intensity must be >= 0"))
        if p.commission_period < 1:
            out.append(Violation(t, p.id, "CM", "CM_i must be >= 1"))
        if p.commission_period >= p.decommission_period:
            out.append(Violation(t, p.id, "DCM", "CM_i must precede DCM_i"))
        if p.decommission_period > K + 1:
            out.append(Violation(t, p.id, "DCM", "DCM_i must be <= K+1 (K+1 = never decommissioned)"))
        out.extend(_series_checks("FUEL_COST_DATA", p.fuel, p.op_cost_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_1", p.fuel, p.fixed_capex_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_2", p.fuel, p.capacity_capex_per_period, K))

    for c in instance.ccs_techs:
        for series in (c.removal_ratio_per_period, c.parasitic_loss_per_period,
                       c.gen_cost_per_period, c.fixed_cost_per_period):
            out.extend(_series_checks("CCS_DATA", c.id, series, K))
        for k, rr in enumerate(c.removal_ratio_per_period, start=1):
            if not 0 < rr < 1:
                out.append(Violation("CCS_DATA", f"{c.id}_REMOVAL_RATIO", str(k), "removal ratio must lie in (0, 1)"))
        for k, x in enumerate(c.parasitic_loss_per_period, start=1):
            if not 0 <= x < 1:
                out.append(Violation("CCS_DATA", f"{c.id}_PARASITIC_LOSS", str(k), "parasitic loss must lie in [0, 1)"))

    for f in instance.alt_fuels:
        if f.phase not in PHASES:
            out.append(Violation("ALT_SOLID_CI", f.id, "phase", f"unknown phase {f.phase!r}"))
            continue
        ci_table = "ALT_SOLID_CI" if f.phase == "solid" else "ALT_GAS_CI"
        cost_table = "ALT_SOLID_COST" if f.phase == "solid" else "ALT_GAS_COST"
        out.extend(_series_checks(ci_table, f.id, f.ci_per_period, K))
        out.extend(_series_checks(cost_table, f.id, f.cost_per_period, K))
        out.extend(_series_checks(cost_table, f"{f.id}_FIXED", f.fixed_cost_per_period, K))
        for k, v in enumerate(f.ci_per_period, start=1):
            if v < 0:
                out.append(Violation(ci_table, f.id, str(k), "CO2 intensity must be >= 0"))

    for r in instance.renewables:
        out.extend(_series_checks("RENEWABLE_CI_DATA", r.id, r.ci_per_period, K))
        out.extend(_series_checks("RENEWABLE_COST_DATA", r.id, r.op_cost_per_period, K))
        out.extend(_series_checks("RENEWABLE_COST_DATA", f"{r.id}_CAP", r.availability_cap_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_1", r.id, r.fixed_capex_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_2", r.id, r.capacity_capex_per_period, K))
        for k, v in enumerate(r.ci_per_period, start=1):
            if v < 0:
                out.append(Violation("RENEWABLE_CI_DATA", r.id, str(k), "CO2 intensity must be >= 0"))
        for k, v in enumerate(r.availability_cap_per_period, start=1):
            if v < 0:
                out.append(Violation("RENEWABLE_COST_DATA", f"{r.id}_CAP", str(k), "availability cap must be >= 0"))

    for n in instance.nets:
        if n.kind not in NET_KINDS:
            out.append(Violation("NET_CI_DATA", n.id, "kind", f"unknown NETs kind {n.kind!r}"))
        out.extend(_series_checks("NET_CI_DATA", n.id, n.ci_per_period, K))
        out.extend(_series_checks("NET_COST_DATA", n.id, n.op_cost_per_period, K))
        out.extend(_series_checks("NET_COST_DATA", f"{n.id}_CAP", n.availability_cap_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_1", n.id, n.fixed_capex_per_period, K))
        out.extend(_series_checks("CAPEX_DATA_2", n.id, n.capacity_capex_per_period, K))
        for k, v in enumerate(n.ci_per_period, start=1):
            if not v < 0:
                out.append(Violation("NET_CI_DATA", n.id, str(k), "NETs CO2 intensity must be negative"))
        for k, v in enumerate(n.availability_cap_per_period, start=1):
            if v < 0:
                out.append(Violation("NET_COST_DATA", f"{n.id}_CAP", str(k), "availability cap must be >= 0"))

    if len(instance.period_params) != K:
        out.append(Violation("ENERGY_PLANNING_DATA", "*", "*",
                             f"expected {K} periods, got {len(instance.period_params)}"))
    for k, pp in enumerate(instance.period_params, start=1):
        if pp.demand < 0:
            out.append(Violation("ENERGY_PLANNING_DATA", "DEMAND", str(k), "demand must be >= 0"))
        if pp.budget < 0:
            out.append(Violation("ENERGY_PLANNING_DATA", "BUDGET", str(k), "budget must be >= 0"))

    avail = instance.availability.available
    for tid in instance.tech_ids():
        if tid not in avail:
            out.append(Violation("TECH_IMPLEMENTATION_TIME", tid, "*", "no availability row"))
        elif len(avail[tid]) != K:
            out.append(Violation("TECH_IMPLEMENTATION_TIME", tid, "*",
                                 f"expected {K} period flags, got {len(avail[tid])}"))
    return out
