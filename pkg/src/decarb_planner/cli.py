"""``decarb-plan``: validate, solve and inspect planning workbooks.

Exit codes: 0 ok, 1 validation failure, 2 usage or I/O error, 3 solver limit
reached without proof, 4 infeasible (or unbounded).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import shutil
import sys
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import __version__
from .domain import MAX_PERIODS, validate_instance
from .milp import export_mps
from .model import OBJECTIVES, InvalidInstance
from .planning import solve_plan
from .report import audit_feasibility, extract_reports, summarize
from .workbook import (
    RUN_CONFIG, TABLES, WorkbookError, read_workbook, template_workbook, to_instance,
    write_manifest, write_results, write_workbook,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_LIMIT, EXIT_INFEASIBLE = 0, 1, 2, 3, 4
EXAMPLES = ("scenario_1", "scenario_2")
RESULT_GLOBS = ("RESULTS_PERIOD_*.csv", "SUMMARY.csv", "run_manifest.json")


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(value) or value <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive finite number: {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="decarb-plan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load a workbook and check every data rule")
    p.add_argument("path", type=Path)

    p = sub.add_parser("solve", help="optimise a workbook and write result tables next to it")
    p.add_argument("path", type=Path)
    p.add_argument("--objective", choices=OBJECTIVES, help="overrides RUN_CONFIG objective")
    p.add_argument("--aff", type=_positive_float, help="annualised cost factor; overrides RUN_CONFIG aff")
    p.add_argument("--node-cap", type=_positive_int, help="stop after this many branch-and-bound nodes")
    p.add_argument("--time-cap", type=_positive_float, help="stop after this many seconds")
    p.add_argument("--mps-export", type=Path, metavar="FILE", help="also write the model as fixed MPS")

    p = sub.add_parser("report", help="print the summary written by a previous solve")
    p.add_argument("path", type=Path)

    p = sub.add_parser("template", help="write an empty workbook for K periods")
    p.add_argument("path", type=Path)
    p.add_argument("periods", metavar="K")

    p = sub.add_parser("example", help="copy a bundled example workbook")
    p.add_argument("name", choices=EXAMPLES)
    p.add_argument("path", type=Path)
    return parser


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _load(path: Path):
    """Workbook and instance, or an exit code."""
    try:
        wb = read_workbook(path)
        instance = to_instance(wb)
    except WorkbookError as exc:
        _err(str(exc))
        return None, None, EXIT_INVALID
    except OSError as exc:
        _err(str(exc))
        return None, None, EXIT_USAGE
    return wb, instance, EXIT_OK


def cmd_validate(path: Path) -> int:
    _, instance, code = _load(path)
    if code:
        return code
    violations = validate_instance(instance)
    for v in violations:
        print(v)
    if violations:
        print(f"{len(violations)} violation(s)")
        return EXIT_INVALID
    print(f"ok: {len(instance.plants)} plants, {instance.K} periods")
    return EXIT_OK


def _clear_results(path: Path) -> None:
    for pattern in RESULT_GLOBS:
        for f in path.glob(pattern):
            f.unlink()


def cmd_solve(path: Path, objective: str | None = None, aff: float | None = None,
              node_cap: int | None = None, time_cap: float | None = None,
              mps_export: Path | None = None) -> int:
    wb, instance, code = _load(path)
    if code:
        return code
    objective = objective or wb.objective
    if objective not in OBJECTIVES:
        _err(f"RUN_CONFIG: row 'objective', column 'value': unknown objective {objective!r}")
        return EXIT_INVALID
    if aff is not None:
        instance = instance.with_aff(aff)
    try:
        model, plan = solve_plan(instance, objective, node_cap=node_cap, time_cap=time_cap)
    except InvalidInstance as exc:
        for v in exc.violations:
            print(v)
        return EXIT_INVALID
    except ValueError as exc:
        _err(str(exc))
        return EXIT_INVALID

    if mps_export is not None:
        try:
            mps_export.parent.mkdir(parents=True, exist_ok=True)
            mps_export.write_text(export_mps(model.problem), encoding="utf-8")
        except OSError as exc:
            _err(f"cannot write MPS file: {exc}")
            return EXIT_USAGE

    manifest = {
        "input_path": str(path.resolve()),
        "objective": objective,
        "aff": instance.aff,
        "node_cap": node_cap,
        "time_cap": time_cap,
        "status": plan.status,
        "objective_value": plan.objective_value if math.isfinite(plan.objective_value) else None,
        "bound": plan.bound if math.isfinite(plan.bound) else None,
        "gap": plan.gap if math.isfinite(plan.gap) else None,
        "nodes": plan.nodes,
        "wall_time": round(plan.wall_time, 3),
        "mps_export": str(mps_export) if mps_export else None,
        "version": __version__,
    }
    gap = f"{plan.gap:.3g}" if math.isfinite(plan.gap) else "n/a"
    value = f"{plan.objective_value:.6f}" if math.isfinite(plan.objective_value) else "n/a"
    print(f"status: {plan.status}  objective: {value}  gap: {gap}  nodes: {plan.nodes}  "
          f"time: {plan.wall_time:.1f}s")

    try:
        _clear_results(path)
        if not plan.is_optimal:
            write_manifest(path, manifest)
            if plan.status in ("infeasible", "unbounded"):
                return EXIT_INFEASIBLE
            return EXIT_LIMIT
        violations = audit_feasibility(instance, plan)
        manifest["audit_violations"] = len(violations)
        for v in violations:
            print(f"audit: {v}")
        reports = extract_reports(instance, plan)
        summary = summarize(reports)
        write_results(path, reports, summary, manifest)
    except OSError as exc:
        _err(f"cannot write results: {exc}")
        return EXIT_USAGE
    _print_summary(path / "SUMMARY.csv")
    return EXIT_OK


def _print_summary(summary_csv: Path) -> None:
    with summary_csv.open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))


def cmd_report(path: Path) -> int:
    manifest = path / "run_manifest.json"
    summary = path / "SUMMARY.csv"
    if not manifest.is_file():
        _err(f"no run manifest in {path}; run 'decarb-plan solve' first")
        return EXIT_USAGE
    data = json.loads(manifest.read_text(encoding="utf-8"))
    for key in ("objective", "aff", "status", "objective_value", "gap", "nodes", "wall_time"):
        print(f"{key}: {data.get(key)}")
    if summary.is_file():
        _print_summary(summary)
    return EXIT_OK


def cmd_template(path: Path, periods: str) -> int:
    try:
        K = int(periods)
    except ValueError:
        _err(f"number of periods must be an integer, got {periods!r}")
        return EXIT_USAGE
    if not 1 <= K <= MAX_PERIODS:
        _err(f"number of periods must be within 1..{MAX_PERIODS}, got {K}")
        return EXIT_USAGE
    existing = [n for n in (*TABLES, RUN_CONFIG) if (path / f"{n}.csv").exists()]
    if existing:
        _err(f"{path} already holds workbook tables ({', '.join(existing)}); choose an empty directory")
        return EXIT_USAGE
    try:
        write_workbook(template_workbook(K), path)
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(f"wrote {len(TABLES)} tables for {K} periods to {path}")
    return EXIT_OK


def example_path(name: str) -> Path:
    return Path(str(resources.files("decarb_planner") / "data" / name))


def cmd_example(name: str, path: Path) -> int:
    if path.exists() and any(path.iterdir()):
        _err(f"{path} is not empty")
        return EXIT_USAGE
    try:
        shutil.copytree(example_path(name), path, dirs_exist_ok=True)
    except OSError as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(f"copied {name} to {path}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "validate":
        return cmd_validate(args.path)
    if args.command == "solve":
        return cmd_solve(args.path, args.objective, args.aff, args.node_cap, args.time_cap,
                         args.mps_export)
    if args.command == "report":
        return cmd_report(args.path)
    if args.command == "template":
        return cmd_template(args.path, args.periods)
    return cmd_example(args.name, args.path)


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
