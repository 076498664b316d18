"""Fixed-format MPS export.

Fixed MPS limits names to 8 characters, so columns and rows are renamed
``C0000001``/``R0000001`` in problem order.  The mapping back to the
original names is written as ``*`` comment lines at the top of the file and
is also available from :func:`mps_name_map`.
"""

from __future__ import annotations

import numpy as np

from .problem import EQ, GE, LE, MilpProblem

OBJ_ROW = "COST"
_ROW_TYPE = {LE: "L", EQ: "E", GE: "G"}


def mps_name_map(problem: MilpProblem) -> tuple[dict[str, str], dict[str, str]]:
    """``(columns, rows)`` dictionaries from short MPS names to original names."""
    cols = {f"C{j + 1:07d}": (problem.var_names[j] if problem.var_names else f"x{j}")
            for j in range(problem.num_vars)}
    rows = {f"R{i + 1:07d}": (problem.row_names[i] if problem.row_names else f"r{i}")
            for i in range(problem.num_rows)}
    return cols, rows


def _num(v: float) -> str:
    """Shortest representation fitting the 12-character numeric field."""
    if v == int(v) and abs(v) < 1e11:
        return str(int(v))
    for digits in range(12, 4, -1):
        s = f"{v:.{digits}g}"
        if len(s) <= 12:
            return s
    raise ValueError(f"cannot fit {v!r} in an MPS field")


def export_mps(problem: MilpProblem) -> str:
    """Render ``problem`` as fixed-format MPS text (minimisation)."""
    n, m = problem.num_vars, problem.num_rows
    col_names = [f"C{j + 1:07d}" for j in range(n)]
    row_names = [f"R{i + 1:07d}" for i in range(m)]
    cmap, rmap = mps_name_map(problem)

    out = ["* decarb_planner fixed-format MPS export"]
    out += [f"* column {k} {v}" for k, v in cmap.items()]
    out += [f"* row {k} {v}" for k, v in rmap.items()]
    out.append(f"NAME          {problem.name[:8]}")
    out.append("ROWS")
    out.append(f" N  {OBJ_ROW}")
    for i in range(m):
        out.append(f" {_ROW_TYPE[problem.senses[i]]}  {row_names[i]}")

    out.append("COLUMNS")
    A = problem.A
    for j in range(n):
        entries: list[tuple[str, float]] = []
        if problem.c[j] != 0.0:
            entries.append((OBJ_ROW, float(problem.c[j])))
        for i in np.flatnonzero(A[:, j]):
            entries.append((row_names[i], float(A[i, j])))
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        for row, value in entries:
            out.append(f"    {col_names[j]:<8}  {row:<8}  {_num(value):>12}")

    out.append("RHS")
    for i in range(m):
        if problem.rhs[i] != 0.0:
            out.append(f"    {'RHS':<8}  {row_names[i]:<8}  {_num(float(problem.rhs[i])):>12}")

    out.append("RANGES")

    out.append("BOUNDS")
    for j in range(n):
        lo, hi = float(problem.lb[j]), float(problem.ub[j])
        name = col_names[j]
        if lo == hi:
            out.append(f" FX {'BND':<8}  {name:<8}  {_num(lo):>12}")
        elif problem.integer[j] and lo == 0.0 and hi == 1.0:
            out.append(f" BV {'BND':<8}  {name:<8}")
        elif np.isneginf(lo) and np.isposinf(hi):
            out.append(f" FR {'BND':<8}  {name:<8}")
        else:
            if np.isneginf(lo):
                out.append(f" MI {'BND':<8}  {name:<8}")
            elif lo != 0.0:
                out.append(f" LO {'BND':<8}  {name:<8}  {_num(lo):>12}")
            if np.isfinite(hi):
                out.append(f" UP {'BND':<8}  {name:<8}  {_num(hi):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"
