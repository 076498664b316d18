"""Per-period result tables, an independent feasibility audit and a run summary.

Everything here is recomputed from the instance data and the primal flows of
a :class:`~decarb_planner.planning.PlanSolution`.  Net energies, CO2 loads
and costs are never read from the solver's auxiliary variables (FNR, FNS,
TE, TC and the cost subtotals), and the auditor does not reuse any of the
row assembly in :mod:`decarb_planner.model`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .domain import Instance, ccs_intensity
from .planning import PlanSolution

AUDIT_TOL = 1e-6
FLAG_TOL = 1e-6

FAMILY_NAMES = {
    "c1": "demand", "c2": "plant lower bound", "c3": "plant upper bound",
    "c4": "commissioning window", "c5": "generation ratchet", "c7": "CCS retrofit bound",
    "c8": "CCS total within generation", "c9": "CCS ratchet", "c10": "CCS net energy",
    "c11": "solid fuel ratchet", "c12": "gas fuel ratchet", "c13": "solid fuel bound",
    "c14": "gas fuel bound", "c15": "plant energy split", "c16": "renewable availability",
    "c17": "EP-NETs availability", "c18": "EC-NETs availability", "c19": "renewable ratchet",
    "c20": "EP-NETs ratchet", "c21": "EC-NETs ratchet", "c22": "energy balance",
    "c23": "CO2 load", "c24": "plant cost", "c25": "renewable cost", "c26": "EP-NETs cost",
    "c27": "EC-NETs cost", "c28": "total cost", "c29": "emission limit", "c30": "budget",
    "availability": "technology unavailable", "applicability": "technology not applicable",
    "integrality": "binary not integral", "bounds": "variable bound",
}


# ------------------------------------------------------------------ reports
@dataclass(frozen=True)
class ReportRow:
    """One line of a period table: a plant or a mitigation technology."""

    name: str
    kind: str
    fuel: str
    gross_energy: float
    ccs: tuple[float, ...]
    solid: tuple[float, ...]
    gas: tuple[float, ...]
    net_energy: float
    co2_load: float
    cost: float

    @property
    def is_zero(self) -> bool:
        return all(v == 0.0 for v in (self.gross_energy, *self.ccs, *self.solid, *self.gas,
                                      self.net_energy, self.co2_load, self.cost))


@dataclass(frozen=True)
class PeriodReport:
    period: int
    label: str
    columns: tuple[str, ...]
    rows: tuple[ReportRow, ...]
    total_emission: float
    total_cost: float
    demand: float
    emission_limit: float
    budget: float
    cost_operating: float
    cost_fixed: float
    cost_capacity: float

    @property
    def limit_met(self) -> bool:
        return self.total_emission <= self.emission_limit + FLAG_TOL

    @property
    def budget_met(self) -> bool:
        return self.total_cost <= self.budget + FLAG_TOL

    def row(self, name: str) -> ReportRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def operating_plants(self, tol: float = 1e-6) -> set[str]:
        return {r.name for r in self.rows if r.kind == "plant" and r.gross_energy > tol}


@dataclass(frozen=True)
class NoReport:
    """Returned instead of reports when the solve did not prove optimality."""

    status: str

    def __bool__(self) -> bool:
        return False


def report_columns(instance: Instance) -> tuple[str, ...]:
    return ("Fuel", "Gross Energy", *(f"{c.id} Ret" for c in instance.ccs_techs),
            *(f.id for f in instance.solid_fuels), *(f.id for f in instance.gas_fuels),
            "Net Energy", "CO₂ Load", "Cost")


def extract_reports(instance: Instance, solution: PlanSolution) -> list[PeriodReport] | NoReport:
    """Per-period tables recomputed from primal flows; :class:`NoReport` unless optimal."""
    if not solution.is_optimal:
        return NoReport(solution.status)
    v = solution.get
    aff = instance.aff
    cols = report_columns(instance)
    out = []
    for k in instance.horizon.periods:
        i = k - 1
        rows: list[ReportRow] = []
        ops = fixed = cap = 0.0
        for p in instance.plants:
            fs = v("FS", p.id, k)
            fr = [v("FR", p.id, k, c.id) for c in instance.ccs_techs]
            fas = [v("FAS", p.id, k, f.id) for f in instance.solid_fuels]
            fag = [v("FAG", p.id, k, f.id) for f in instance.gas_fuels]
            fns = fs - sum(fr) - sum(fas) - sum(fag)
            fnr = [x * (1.0 - c.parasitic_loss_per_period[i]) for x, c in zip(fr, instance.ccs_techs)]
            net = fns + sum(fnr) + sum(fas) + sum(fag)
            co2 = fns * p.co2_intensity
            co2 += sum(x * ccs_intensity(p.co2_intensity, c.removal_ratio_per_period[i],
                                         c.parasitic_loss_per_period[i])
                       for x, c in zip(fnr, instance.ccs_techs))
            co2 += sum(x * f.ci_per_period[i] for x, f in zip(fas, instance.solid_fuels))
            co2 += sum(x * f.ci_per_period[i] for x, f in zip(fag, instance.gas_fuels))
            o = fns * p.op_cost_per_period[i]
            o += sum(x * c.gen_cost_per_period[i] for x, c in zip(fnr, instance.ccs_techs))
            o += sum(x * f.cost_per_period[i] for x, f in zip(fas, instance.solid_fuels))
            o += sum(x * f.cost_per_period[i] for x, f in zip(fag, instance.gas_fuels))
            fx = aff * p.fixed_capex_per_period[i] * v("A", p.id, k)
            fx += sum(aff * c.fixed_cost_per_period[i] * v("B", p.id, k, c.id) for c in instance.ccs_techs)
            fx += sum(aff * f.fixed_cost_per_period[i] * v("G", p.id, k, f.id) for f in instance.solid_fuels)
            fx += sum(aff * f.fixed_cost_per_period[i] * v("H", p.id, k, f.id) for f in instance.gas_fuels)
            cp = aff * p.capacity_capex_per_period[i] * fns
            ops, fixed, cap = ops + o, fixed + fx, cap + cp
            rows.append(ReportRow(p.id, "plant", p.fuel, fs, tuple(fr), tuple(fas), tuple(fag),
                                  net, co2, o + fx + cp))
        zeros_c = (0.0,) * len(instance.ccs_techs)
        zeros_s = (0.0,) * len(instance.solid_fuels)
        zeros_g = (0.0,) * len(instance.gas_fuels)
        for fam, binfam, techs, kind, sign in (("FC", "C", instance.renewables, "renewable", 1.0),
                                               ("FEP", "D", instance.ep_nets, "EP", 1.0),
                                               ("FEC", "E", instance.ec_nets, "EC", -1.0)):
            for t in techs:
                f = v(fam, k, t.id)
                o = f * t.op_cost_per_period[i]
                fx = aff * t.fixed_capex_per_period[i] * v(binfam, k, t.id)
                cp = aff * t.capacity_capex_per_period[i] * f
                ops, fixed, cap = ops + o, fixed + fx, cap + cp
                rows.append(ReportRow(t.id, kind, "", f, zeros_c, zeros_s, zeros_g, sign * f,
                                      f * t.ci_per_period[i], o + fx + cp))
        pp = instance.period_params[i]
        label = instance.horizon.period_labels[i] if instance.horizon.period_labels else str(k)
        out.append(PeriodReport(
            k, label, cols, tuple(rows), sum(r.co2_load for r in rows), ops + fixed + cap,
            pp.demand, pp.emission_limit, pp.budget, ops, fixed, cap))
    return out


def period_rows(report: PeriodReport) -> list[list[str]]:
    """CSV rows for one period: the table, a blank line, then footer key/value pairs."""
    rows = [["Item", *report.columns]]
    for r in report.rows:
        rows.append([r.name, r.fuel, *(_fmt(x) for x in (r.gross_energy, *r.ccs, *r.solid, *r.gas,
                                                         r.net_energy, r.co2_load, r.cost))])
    rows.append([])
    rows += [
        ["Period", str(report.period)], ["Label", report.label],
        ["Total CO₂ Load", _fmt(report.total_emission)], ["Total Cost", _fmt(report.total_cost)],
        ["Demand", _fmt(report.demand)], ["Emission Limit", _fmt(report.emission_limit)],
        ["Budget", _fmt(report.budget)], ["Limit Met", "YES" if report.limit_met else "NO"],
        ["Budget Met", "YES" if report.budget_met else "NO"],
        ["Operating Cost", _fmt(report.cost_operating)], ["Fixed Cost", _fmt(report.cost_fixed)],
        ["Capacity Cost", _fmt(report.cost_capacity)],
    ]
    return rows


def _fmt(x: float) -> str:
    # fixed precision keeps files byte-stable; -0.0 would print as "-0.000000"
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


# -------------------------------------------------------------------- audit
@dataclass(frozen=True)
class EquationViolation:
    family: str
    indices: tuple
    residual: float

    @property
    def name(self) -> str:
        return FAMILY_NAMES.get(self.family, self.family)

    def __str__(self) -> str:
        idx = ",".join(str(i) for i in self.indices)
        return f"{self.family} ({self.name}) [{idx}]: residual {self.residual:.3g}"


def audit_feasibility(instance: Instance, solution: PlanSolution,
                      tol: float = AUDIT_TOL) -> list[EquationViolation]:
    """Re-check every constraint family against raw instance data.

    Works on any solution with values (optimal or not); an empty list means
    every residual is within ``tol``.
    """
    v = solution.get
    K = instance.K
    out: list[EquationViolation] = []

    def eq(fam: str, idx: tuple, lhs: float, rhs: float) -> None:
        if abs(lhs - rhs) > tol:
            out.append(EquationViolation(fam, idx, lhs - rhs))

    def le(fam: str, idx: tuple, lhs: float, rhs: float) -> None:
        if lhs - rhs > tol:
            out.append(EquationViolation(fam, idx, lhs - rhs))

    ccs, solids, gases = instance.ccs_techs, instance.solid_fuels, instance.gas_fuels
    avail = instance.availability

    for key, value in solution.values.items():
        fam = key[0]
        if fam in ("A", "B", "G", "H", "C", "D", "E"):
            if abs(value - round(value)) > tol:
                out.append(EquationViolation("integrality", key, value - round(value)))
            if value < -tol or value > 1 + tol:
                out.append(EquationViolation("bounds", key, value))
        elif fam != "TE" and value < -tol:
            out.append(EquationViolation("bounds", key, value))

    for k in range(1, K + 1):
        i = k - 1
        pp = instance.period_params[i]
        eq("c1", (k,), sum(v("FS", p.id, k) for p in instance.plants), pp.demand)

        for p in instance.plants:
            fs = v("FS", p.id, k)
            a = v("A", p.id, k)
            le("c2", (p.id, k), p.lower_bound * a, fs)
            le("c3", (p.id, k), fs, p.upper_bound * a)
            on = p.active(k)
            if not on:
                for name, val in (("FS", fs), ("A", a)):
                    le("c4", (name, p.id, k), abs(val), 0.0)
            for c in ccs:
                fr, b = v("FR", p.id, k, c.id), v("B", p.id, k, c.id)
                if not on:
                    le("c4", ("FR", p.id, k, c.id), abs(fr) + abs(b), 0.0)
                if not p.is_fossil:
                    le("applicability", ("FR", p.id, k, c.id), abs(fr) + abs(b), 0.0)
                if not avail(c.id, k):
                    le("availability", ("FR", p.id, k, c.id), abs(fr) + abs(b), 0.0)
                le("c7", (p.id, k, c.id), fr, p.upper_bound * b)
                eq("c10", (p.id, k, c.id), v("FNR", p.id, k, c.id),
                   fr * (1.0 - c.parasitic_loss_per_period[i]))
            le("c8", (p.id, k), sum(v("FR", p.id, k, c.id) for c in ccs), fs)
            for fam, bfam, fuels, cap_tag in (("FAS", "G", solids, "c13"), ("FAG", "H", gases, "c14")):
                for f in fuels:
                    x, y = v(fam, p.id, k, f.id), v(bfam, p.id, k, f.id)
                    if not on:
                        le("c4", (fam, p.id, k, f.id), abs(x) + abs(y), 0.0)
                    if not f.applies_to(p):
                        le("applicability", (fam, p.id, k, f.id), abs(x) + abs(y), 0.0)
                    if not avail(f.id, k):
                        le("availability", (fam, p.id, k, f.id), abs(x) + abs(y), 0.0)
                    le(cap_tag, (p.id, k, f.id), x, p.upper_bound * y)
            split = (v("FNS", p.id, k) + sum(v("FR", p.id, k, c.id) for c in ccs)
                     + sum(v("FAS", p.id, k, f.id) for f in solids)
                     + sum(v("FAG", p.id, k, f.id) for f in gases))
            eq("c15", (p.id, k), split, fs)

            if k < K and p.active(k) and p.active(k + 1):
                le("c5", (p.id, k), fs, v("FS", p.id, k + 1))
                for c in ccs:
                    le("c9", (p.id, k, c.id), v("FR", p.id, k, c.id), v("FR", p.id, k + 1, c.id))
                for f in solids:
                    le("c11", (p.id, k, f.id), v("FAS", p.id, k, f.id), v("FAS", p.id, k + 1, f.id))
                for f in gases:
                    le("c12", (p.id, k, f.id), v("FAG", p.id, k, f.id), v("FAG", p.id, k + 1, f.id))

        for fam, bfam, techs, cap_tag, ratchet_tag in (
                ("FC", "C", instance.renewables, "c16", "c19"),
                ("FEP", "D", instance.ep_nets, "c17", "c20"),
                ("FEC", "E", instance.ec_nets, "c18", "c21")):
            for t in techs:
                x, y = v(fam, k, t.id), v(bfam, k, t.id)
                if not avail(t.id, k):
                    le("availability", (fam, k, t.id), abs(x) + abs(y), 0.0)
                le(cap_tag, (k, t.id), x, t.availability_cap_per_period[i] * y)
                if k < K:
                    le(ratchet_tag, (k, t.id), x, v(fam, k + 1, t.id))

        supply = 0.0
        load = 0.0
        for p in instance.plants:
            fns = v("FNS", p.id, k)
            supply += fns
            load += fns * p.co2_intensity
            for c in ccs:
                fnr = v("FNR", p.id, k, c.id)
                supply += fnr
                load += fnr * ccs_intensity(p.co2_intensity, c.removal_ratio_per_period[i],
                                            c.parasitic_loss_per_period[i])
            for fam, fuels in (("FAS", solids), ("FAG", gases)):
                for f in fuels:
                    x = v(fam, p.id, k, f.id)
                    supply += x
                    load += x * f.ci_per_period[i]
        for fam, techs in (("FC", instance.renewables), ("FEP", instance.ep_nets)):
            for t in techs:
                supply += v(fam, k, t.id)
                load += v(fam, k, t.id) * t.ci_per_period[i]
        consumed = sum(v("FEC", k, t.id) for t in instance.ec_nets)
        load += sum(v("FEC", k, t.id) * t.ci_per_period[i] for t in instance.ec_nets)
        eq("c22", (k,), supply, consumed + pp.demand)
        eq("c23", (k,), v("TE", k), load)

        aff = instance.aff
        ctf = sum(v("FNS", p.id, k) * p.op_cost_per_period[i]
                  + aff * (p.fixed_capex_per_period[i] * v("A", p.id, k)
                           + p.capacity_capex_per_period[i] * v("FNS", p.id, k))
                  for p in instance.plants)
        eq("c24", (k,), v("CTF", k), ctf)
        for fam, bfam, techs, total, tag in (("FC", "C", instance.renewables, "CTC", "c25"),
                                             ("FEP", "D", instance.ep_nets, "CTEP", "c26"),
                                             ("FEC", "E", instance.ec_nets, "CTEC", "c27")):
            cost = sum(v(fam, k, t.id) * t.op_cost_per_period[i]
                       + aff * (t.fixed_capex_per_period[i] * v(bfam, k, t.id)
                                + t.capacity_capex_per_period[i] * v(fam, k, t.id))
                       for t in techs)
            eq(tag, (k,), v(total, k), cost)
        extra = 0.0
        for p in instance.plants:
            for c in ccs:
                extra += (v("FNR", p.id, k, c.id) * c.gen_cost_per_period[i]
                          + aff * c.fixed_cost_per_period[i] * v("B", p.id, k, c.id))
            for fam, bfam, fuels in (("FAS", "G", solids), ("FAG", "H", gases)):
                for f in fuels:
                    extra += (v(fam, p.id, k, f.id) * f.cost_per_period[i]
                              + aff * f.fixed_cost_per_period[i] * v(bfam, p.id, k, f.id))
        eq("c28", (k,), v("TC", k),
           v("CTF", k) + v("CTC", k) + v("CTEP", k) + v("CTEC", k) + extra)
        if solution.objective == "min_budget":
            le("c29", (k,), v("TE", k), pp.emission_limit)
        elif solution.objective == "min_emission":
            le("c30", (k,), v("TC", k), pp.budget)
    return out


# ------------------------------------------------------------------ summary
@dataclass(frozen=True)
class SummaryRow:
    period: int
    label: str
    total_emission: float
    emission_limit: float
    limit_met: bool
    total_cost: float
    budget: float
    budget_met: bool
    cumulative_emission: float


@dataclass(frozen=True)
class Summary:
    rows: tuple[SummaryRow, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def total_emission(self) -> float:
        return self.rows[-1].cumulative_emission if self.rows else 0.0

    @property
    def total_cost(self) -> float:
        return sum(r.total_cost for r in self.rows)

    def series(self, column: str) -> list[float]:
        return [getattr(r, column) for r in self.rows]


SUMMARY_COLUMNS = ("Period", "Label", "Total CO₂ Load", "Emission Limit", "Limit Met", "Total Cost",
                   "Budget", "Budget Met", "Cumulative CO₂ Load")


def summarize(reports: Sequence[PeriodReport]) -> Summary:
    rows = []
    cumulative = 0.0
    for r in reports:
        cumulative += r.total_emission
        rows.append(SummaryRow(r.period, r.label, r.total_emission, r.emission_limit, r.limit_met,
                               r.total_cost, r.budget, r.budget_met, cumulative))
    return Summary(tuple(rows))


def summary_rows(summary: Summary) -> list[list[str]]:
    out = [list(SUMMARY_COLUMNS)]
    for r in summary.rows:
        out.append([str(r.period), r.label, _fmt(r.total_emission), _fmt(r.emission_limit),
                    "YES" if r.limit_met else "NO", _fmt(r.total_cost), _fmt(r.budget),
                    "YES" if r.budget_met else "NO", _fmt(r.cumulative_emission)])
    return out
