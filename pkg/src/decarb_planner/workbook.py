"""Planning workbook stored as a directory of CSV tables.

Each of the fifteen input tabs is one ``<TAB>.csv`` file: first row is the
header, first column the row label.  Per-period tables use the integers
``1..K`` as headers.  An optional ``RUN_CONFIG.csv`` holds ``key,value``
pairs (``objective``, ``num_periods``, ``aff``, ``period_labels``).

Blank cells inherit, mirroring merged cells in the original spreadsheet:
a blank period cell repeats the value to its left, and an entirely blank
row repeats the row above it.

Row labels are matched case-insensitively with spaces and hyphens read as
underscores, so ``Natural Gas`` and ``NATURAL_GAS`` name the same row.

Rows beyond the published tables:

* ``RENEWABLE_COST_DATA`` / ``NET_COST_DATA``: ``<ID>_CAP`` gives the
  deployable amount (TWh/y) per period; without it the cap is the period's
  demand.
* ``ALT_SOLID_COST`` / ``ALT_GAS_COST``: ``<ID>_FIXED`` gives the fixed cost
  of equipping a plant for that fuel; without it the fixed cost is 0.
* ``CCS_DATA`` rows are ``<ID>_REMOVAL_RATIO``, ``<ID>_PARASITIC_LOSS``,
  ``<ID>_GEN_COST`` and ``<ID>_FIXED_COST``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .domain import (
    MAX_PERIODS,
    AltFuel,
    AvailabilityMatrix,
    CcsTech,
    Instance,
    NetTech,
    PeriodParams,
    PlanningHorizon,
    PowerPlant,
    RenewableTech,
)

TABLES = (
    "PLANT_DATA", "ENERGY_PLANNING_DATA", "FUEL_COST_DATA", "RENEWABLE_CI_DATA",
    "RENEWABLE_COST_DATA", "CAPEX_DATA_1", "CAPEX_DATA_2", "ALT_SOLID_CI", "ALT_SOLID_COST",
    "ALT_GAS_CI", "ALT_GAS_COST", "CCS_DATA", "NET_CI_DATA", "NET_COST_DATA",
    "TECH_IMPLEMENTATION_TIME",
)
RUN_CONFIG = "RUN_CONFIG"
ALIASES = {
    "COMPENSATORY_CI_DATA": "RENEWABLE_CI_DATA",
    "COMPENSATORY_COST_DATA": "RENEWABLE_COST_DATA",
}
PLANT_COLUMNS = ("Category", "Fuel", "LB", "UB", "Intensity", "CM", "DCM")
CCS_FIELDS = ("REMOVAL_RATIO", "PARASITIC_LOSS", "GEN_COST", "FIXED_COST")
PLANNING_ROWS = ("DEMAND", "EMISSION_LIMIT", "BUDGET")

_NAME_ALIASES = {
    "HYDROPOWER": "HYDRO",
    "MUNICIPAL_SOLID_WASTE": "MSW",
    "FOSSIL_FUEL": "FOSSIL",
    "REN": "RENEWABLE",
}


class WorkbookError(Exception):
    """Malformed workbook; the message names table, row and column."""


class MissingTableError(WorkbookError):
    def __init__(self, missing: Sequence[str]):
        self.missing = list(missing)
        super().__init__("missing table(s): " + ", ".join(self.missing))


class PeriodMismatchError(WorkbookError):
    def __init__(self, counts: dict[str, int]):
        self.counts = counts
        detail = ", ".join(f"{t}={k}" for t, k in counts.items())
        super().__init__(f"tables disagree on the number of periods: {detail}")


class AvailabilityValueError(WorkbookError):
    pass


def norm(label: str) -> str:
    key = "_".join(label.strip().upper().replace("-", " ").split())
    return _NAME_ALIASES.get(key, key)


@dataclass
class Table:
    name: str
    header: list[str]
    rows: list[list[str]] = field(default_factory=list)

    @property
    def columns(self) -> list[str]:
        return self.header[1:]

    def labels(self) -> list[str]:
        return [r[0] for r in self.rows]

    def find(self, label: str) -> list[str] | None:
        key = norm(label)
        for r in self.rows:
            if norm(r[0]) == key:
                return r
        return None

    def cell_error(self, row: str, column: str, msg: str) -> WorkbookError:
        return WorkbookError(f"{self.name}: row {row!r}, column {column!r}: {msg}")

    def require(self, label: str) -> list[str]:
        r = self.find(label)
        if r is None:
            raise WorkbookError(f"{self.name}: row {label!r} not found (column '*')")
        return r

    def numbers(self, label: str) -> tuple[float, ...]:
        r = self.require(label)
        return tuple(self._num(r[0], col, cell) for col, cell in zip(self.columns, r[1:]))

    def _num(self, row: str, col: str, cell: str) -> float:
        try:
            return float(cell)
        except ValueError:
            raise self.cell_error(row, col, f"not a number: {cell!r}") from None


@dataclass
class Workbook:
    tables: dict[str, Table]
    run_config: dict[str, str] = field(default_factory=dict)

    @property
    def num_periods(self) -> int:
        return len(self.tables["ENERGY_PLANNING_DATA"].columns)

    @property
    def objective(self) -> str:
        return self.run_config.get("objective", "min_budget")

    def __getitem__(self, name: str) -> Table:
        return self.tables[name]


# ---------------------------------------------------------------- reading
def _read_csv(path: Path) -> list[list[str]]:
    with path.open(newline="", encoding="utf-8-sig") as fh:
        return [[c.strip() for c in row] for row in csv.reader(fh) if any(c.strip() for c in row)]


def _fill_periods(table: Table) -> None:
    """Apply blank-cell inheritance in place."""
    width = len(table.header)
    prev: list[str] | None = None
    for r in table.rows:
        r.extend([""] * (width - len(r)))
        del r[width:]
        cells = r[1:]
        if all(c == "" for c in cells):
            if prev is None:
                raise table.cell_error(r[0], table.columns[0] if table.columns else "*",
                                       "blank row with no row above to inherit from")
            r[1:] = prev[1:]
        else:
            if cells[0] == "":
                raise table.cell_error(r[0], table.columns[0], "first period value is blank")
            for j in range(2, width):
                if r[j] == "":
                    r[j] = r[j - 1]
        prev = r


def _fill_plants(table: Table) -> None:
    width = len(table.header)
    prev: list[str] | None = None
    for r in table.rows:
        r.extend([""] * (width - len(r)))
        del r[width:]
        for j, col in enumerate(table.columns, start=1):
            if r[j] == "":
                if col in ("Category", "Fuel") and prev is not None:
                    r[j] = prev[j]
                else:
                    raise table.cell_error(r[0], col, "blank value")
        prev = r


def _period_count(table: Table) -> int:
    cols = table.columns
    expected = [str(k) for k in range(1, len(cols) + 1)]
    if cols != expected:
        for col, want in zip(cols, expected):
            if col != want:
                raise table.cell_error("<header>", col, f"expected period header {want!r}")
        raise table.cell_error("<header>", "*", "period headers must be 1..K")
    return len(cols)


def read_workbook(path: str | Path) -> Workbook:
    """Load every table under ``path`` and apply blank-cell inheritance."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"workbook directory not found: {root}")
    files = {p.stem.upper(): p for p in root.glob("*.csv")}
    for alias, canon in ALIASES.items():
        if canon not in files and alias in files:
            files[canon] = files[alias]
    missing = [t for t in TABLES if t not in files]
    if missing:
        raise MissingTableError(missing)

    tables: dict[str, Table] = {}
    for name in TABLES:
        rows = _read_csv(files[name])
        if not rows:
            raise WorkbookError(f"{name}: row '<header>', column '*': table is empty")
        tables[name] = Table(name, rows[0], rows[1:])

    plant = tables["PLANT_DATA"]
    want = [norm(c) for c in PLANT_COLUMNS]
    got = [norm(c) for c in plant.columns]
    if got != want:
        raise plant.cell_error("<header>", ",".join(plant.columns),
                               f"expected columns {', '.join(PLANT_COLUMNS)}")
    plant.header = [plant.header[0], *PLANT_COLUMNS]
    _fill_plants(plant)

    counts: dict[str, int] = {}
    for name in TABLES[1:]:
        counts[name] = _period_count(tables[name])
        _fill_periods(tables[name])

    config: dict[str, str] = {}
    if RUN_CONFIG in files:
        for row in _read_csv(files[RUN_CONFIG]):
            if norm(row[0]) == "KEY":
                continue
            config[row[0].strip().lower()] = row[1] if len(row) > 1 else ""
    if "num_periods" in config:
        try:
            counts[RUN_CONFIG] = int(config["num_periods"])
        except ValueError:
            raise WorkbookError(f"RUN_CONFIG: row 'num_periods', column 'value': "
                                f"not an integer: {config['num_periods']!r}") from None
    if len(set(counts.values())) > 1:
        raise PeriodMismatchError(counts)

    avail = tables["TECH_IMPLEMENTATION_TIME"]
    for r in avail.rows:
        for j, (col, cell) in enumerate(zip(avail.columns, r[1:]), start=1):
            if cell.upper() not in ("YES", "NO"):
                raise AvailabilityValueError(
                    f"TECH_IMPLEMENTATION_TIME: row {r[0]!r}, column {col!r}: "
                    f"expected YES or NO, got {cell!r}")
            r[j] = cell.upper()
    return Workbook(tables, config)


# --------------------------------------------------------------- assembly
def _category(table: Table, row: str, value: str) -> str:
    key = norm(value)
    if key == "RENEWABLE":
        return "renewable"
    if key == "FOSSIL":
        return "fossil"
    raise table.cell_error(row, "Category", f"unknown category {value!r}")


def _int_cell(table: Table, row: str, col: str, value: str) -> int:
    try:
        f = float(value)
    except ValueError:
        raise table.cell_error(row, col, f"not a number: {value!r}") from None
    if f != int(f):
        raise table.cell_error(row, col, f"not an integer: {value!r}")
    return int(f)


def _lookup(wb: Workbook, table: str, label: str, context: str) -> tuple[float, ...]:
    t = wb[table]
    if t.find(label) is None:
        raise WorkbookError(f"{table}: row {label!r} not found (column '*'); needed by {context}")
    return t.numbers(label)


def to_instance(wb: Workbook) -> Instance:
    """Assemble an :class:`Instance` from a parsed workbook."""
    K = wb.num_periods
    plan = wb["ENERGY_PLANNING_DATA"]
    demand, limit, budget = (plan.numbers(r) for r in PLANNING_ROWS)
    params = tuple(PeriodParams(d, lim, bd) for d, lim, bd in zip(demand, limit, budget))

    plants = []
    pt = wb["PLANT_DATA"]
    for r in pt.rows:
        pid = r[0]
        cat, fuel, lb, ub, ci, cm, dcm = r[1:]
        fuel_key = norm(fuel)
        ctx = f"PLANT_DATA row {pid!r}"
        plants.append(PowerPlant(
            id=pid,
            category=_category(pt, pid, cat),
            fuel=fuel_key.lower(),
            lower_bound=pt._num(pid, "LB", lb),
            upper_bound=pt._num(pid, "UB", ub),
            co2_intensity=pt._num(pid, "Intensity", ci),
            commission_period=_int_cell(pt, pid, "CM", cm),
            decommission_period=_int_cell(pt, pid, "DCM", dcm),
            op_cost_per_period=_lookup(wb, "FUEL_COST_DATA", fuel_key, ctx),
            fixed_capex_per_period=_lookup(wb, "CAPEX_DATA_1", fuel_key, ctx),
            capacity_capex_per_period=_lookup(wb, "CAPEX_DATA_2", fuel_key, ctx),
        ))

    ccs_t = wb["CCS_DATA"]
    ccs_ids: list[str] = []
    for label in ccs_t.labels():
        key = norm(label)
        for f in CCS_FIELDS:
            if key.endswith("_" + f):
                tid = key[: -len(f) - 1]
                if tid not in ccs_ids:
                    ccs_ids.append(tid)
                break
        else:
            raise ccs_t.cell_error(label, "*", f"row label must end with one of {', '.join(CCS_FIELDS)}")
    ccs = tuple(CcsTech(tid, *(ccs_t.numbers(f"{tid}_{f}") for f in CCS_FIELDS)) for tid in ccs_ids)

    def fuels(phase: str, ci_table: str, cost_table: str) -> list[AltFuel]:
        out = []
        cost = wb[cost_table]
        for label in wb[ci_table].labels():
            tid = norm(label)
            fixed = cost.numbers(f"{tid}_FIXED") if cost.find(f"{tid}_FIXED") else (0.0,) * K
            out.append(AltFuel(tid, phase, wb[ci_table].numbers(label),
                               _lookup(wb, cost_table, tid, f"{ci_table} row {label!r}"), fixed))
        return out

    alt = tuple(fuels("solid", "ALT_SOLID_CI", "ALT_SOLID_COST") + fuels("gas", "ALT_GAS_CI", "ALT_GAS_COST"))

    def cap(table: str, tid: str) -> tuple[float, ...]:
        t = wb[table]
        return t.numbers(f"{tid}_CAP") if t.find(f"{tid}_CAP") else tuple(demand)

    rens = []
    for label in wb["RENEWABLE_CI_DATA"].labels():
        tid = norm(label)
        ctx = f"RENEWABLE_CI_DATA row {label!r}"
        rens.append(RenewableTech(
            tid, wb["RENEWABLE_CI_DATA"].numbers(label), _lookup(wb, "RENEWABLE_COST_DATA", tid, ctx),
            cap("RENEWABLE_COST_DATA", tid), _lookup(wb, "CAPEX_DATA_1", tid, ctx),
            _lookup(wb, "CAPEX_DATA_2", tid, ctx)))

    nets = []
    for label in wb["NET_CI_DATA"].labels():
        tid = norm(label)
        kind = tid[:2]
        if kind not in ("EP", "EC"):
            raise wb["NET_CI_DATA"].cell_error(label, "*", "NETs id must start with EP or EC")
        ctx = f"NET_CI_DATA row {label!r}"
        nets.append(NetTech(
            tid, kind, wb["NET_CI_DATA"].numbers(label), _lookup(wb, "NET_COST_DATA", tid, ctx),
            cap("NET_COST_DATA", tid), _lookup(wb, "CAPEX_DATA_1", tid, ctx),
            _lookup(wb, "CAPEX_DATA_2", tid, ctx)))

    av = wb["TECH_IMPLEMENTATION_TIME"]
    availability = AvailabilityMatrix({norm(r[0]): tuple(c == "YES" for c in r[1:]) for r in av.rows})

    labels = wb.run_config.get("period_labels", "")
    aff_raw = wb.run_config.get("aff", "")
    try:
        aff = float(aff_raw) if aff_raw else 1.0
    except ValueError:
        raise WorkbookError(f"RUN_CONFIG: row 'aff', column 'value': not a number: {aff_raw!r}") from None
    return Instance(
        horizon=PlanningHorizon(K, tuple(s.strip() for s in labels.split(";")) if labels else ()),
        plants=tuple(plants), ccs_techs=ccs, alt_fuels=alt, renewables=tuple(rens),
        nets=tuple(nets), period_params=params, availability=availability, aff=aff,
    )


# ---------------------------------------------------------------- writing
def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def _period_table(name: str, K: int, rows: Iterable[tuple[str, Sequence]], label: str = "ID") -> Table:
    t = Table(name, [label, *(str(k) for k in range(1, K + 1))])
    for lab, vals in rows:
        t.rows.append([lab, *(v if isinstance(v, str) else _fmt(v) for v in vals)])
    return t


def _shared(rows: dict[str, tuple], key: str, values: tuple, what: str) -> None:
    if key in rows and rows[key] != values:
        raise ValueError(f"{what} rows for {key!r} disagree; the workbook stores one row per name")
    rows[key] = values


def instance_to_workbook(instance: Instance, objective: str = "min_budget") -> Workbook:
    """Serialise ``instance`` into workbook tables (values fully expanded)."""
    K = instance.K
    plant = Table("PLANT_DATA", ["Plant", *PLANT_COLUMNS])
    fuel_cost: dict[str, tuple] = {}
    capex1: dict[str, tuple] = {}
    capex2: dict[str, tuple] = {}
    for p in instance.plants:
        plant.rows.append([p.id, p.category, p.fuel, _fmt(p.lower_bound), _fmt(p.upper_bound),
                           _fmt(p.co2_intensity), str(p.commission_period), str(p.decommission_period)])
        key = p.fuel.upper()
        _shared(fuel_cost, key, p.op_cost_per_period, "FUEL_COST_DATA")
        _shared(capex1, key, p.fixed_capex_per_period, "CAPEX_DATA_1")
        _shared(capex2, key, p.capacity_capex_per_period, "CAPEX_DATA_2")
    for t in (*instance.renewables, *instance.nets):
        _shared(capex1, t.id, t.fixed_capex_per_period, "CAPEX_DATA_1")
        _shared(capex2, t.id, t.capacity_capex_per_period, "CAPEX_DATA_2")

    pp = instance.period_params
    tables = [
        plant,
        _period_table("ENERGY_PLANNING_DATA", K, [
            ("DEMAND", [x.demand for x in pp]), ("EMISSION_LIMIT", [x.emission_limit for x in pp]),
            ("BUDGET", [x.budget for x in pp])], "Parameter"),
        _period_table("FUEL_COST_DATA", K, fuel_cost.items(), "Fuel"),
        _period_table("RENEWABLE_CI_DATA", K, [(r.id, r.ci_per_period) for r in instance.renewables]),
        _period_table("RENEWABLE_COST_DATA", K,
                      [(r.id, r.op_cost_per_period) for r in instance.renewables]
                      + [(f"{r.id}_CAP", r.availability_cap_per_period) for r in instance.renewables]),
        _period_table("CAPEX_DATA_1", K, capex1.items()),
        _period_table("CAPEX_DATA_2", K, capex2.items()),
    ]
    for phase, ci_name, cost_name in (("solid", "ALT_SOLID_CI", "ALT_SOLID_COST"),
                                      ("gas", "ALT_GAS_CI", "ALT_GAS_COST")):
        fs = [f for f in instance.alt_fuels if f.phase == phase]
        tables.append(_period_table(ci_name, K, [(f.id, f.ci_per_period) for f in fs]))
        tables.append(_period_table(cost_name, K, [(f.id, f.cost_per_period) for f in fs]
                                    + [(f"{f.id}_FIXED", f.fixed_cost_per_period) for f in fs]))
    ccs_rows = []
    for c in instance.ccs_techs:
        ccs_rows += [(f"{c.id}_REMOVAL_RATIO", c.removal_ratio_per_period),
                     (f"{c.id}_PARASITIC_LOSS", c.parasitic_loss_per_period),
                     (f"{c.id}_GEN_COST", c.gen_cost_per_period),
                     (f"{c.id}_FIXED_COST", c.fixed_cost_per_period)]
    tables.append(_period_table("CCS_DATA", K, ccs_rows))
    tables.append(_period_table("NET_CI_DATA", K, [(n.id, n.ci_per_period) for n in instance.nets]))
    tables.append(_period_table("NET_COST_DATA", K,
                                [(n.id, n.op_cost_per_period) for n in instance.nets]
                                + [(f"{n.id}_CAP", n.availability_cap_per_period) for n in instance.nets]))
    avail = instance.availability.available
    tables.append(_period_table("TECH_IMPLEMENTATION_TIME", K,
                                [(tid, ["YES" if a else "NO" for a in avail[tid]])
                                 for tid in instance.tech_ids()]))
    config = {"objective": objective, "num_periods": str(K), "aff": _fmt(instance.aff)}
    if instance.horizon.period_labels:
        config["period_labels"] = ";".join(instance.horizon.period_labels)
    return Workbook({t.name: t for t in tables}, config)


def _write_csv(path: Path, rows: Iterable[Sequence]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def write_workbook(workbook: Workbook, path: str | Path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for name in TABLES:
        t = workbook.tables[name]
        _write_csv(root / f"{name}.csv", [t.header, *t.rows])
    if workbook.run_config:
        _write_csv(root / f"{RUN_CONFIG}.csv",
                   [("key", "value"), *workbook.run_config.items()])


def template_workbook(K: int, objective: str = "min_budget") -> Workbook:
    """Header-only workbook for ``K`` periods."""
    if not 1 <= K <= MAX_PERIODS:
        raise ValueError(f"number of periods must be within 1..{MAX_PERIODS}, got {K}")
    tables = {"PLANT_DATA": Table("PLANT_DATA", ["Plant", *PLANT_COLUMNS])}
    for name in TABLES[1:]:
        tables[name] = _period_table(name, K, [])
    return Workbook(tables, {"objective": objective, "num_periods": str(K), "aff": "1"})


# ---------------------------------------------------------------- results
def write_results(path: str | Path, reports, summary, manifest: dict | None = None) -> list[Path]:
    """Write one ``RESULTS_PERIOD_<k>.csv`` per period, ``SUMMARY.csv`` and the run manifest."""
    from .report import period_rows, summary_rows

    if not reports:
        raise ValueError("no period reports to write")
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for rep in reports:
        p = root / f"RESULTS_PERIOD_{rep.period}.csv"
        _write_csv(p, period_rows(rep))
        written.append(p)
    p = root / "SUMMARY.csv"
    _write_csv(p, summary_rows(summary))
    written.append(p)
    if manifest is not None:
        written.append(write_manifest(root, manifest))
    return written


def write_manifest(path: str | Path, manifest: dict) -> Path:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    p = root / "run_manifest.json"
    p.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return p
