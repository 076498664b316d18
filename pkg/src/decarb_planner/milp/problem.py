"""Standard-form MILP container shared by the model builder and the solvers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

LE, EQ, GE = "<=", "=", ">="
SENSES = (LE, EQ, GE)


@dataclass(frozen=True, eq=False)
class MilpProblem:
    """``min c @ x`` subject to ``A x (<=|=|>=) rhs`` and ``lb <= x <= ub``.

    ``integer`` flags the integer variables; in this package every integer
    variable is binary.  ``lb`` may hold ``-inf`` and ``ub`` may hold ``inf``.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    var_names: tuple[str, ...] = ()
    row_names: tuple[str, ...] = ()
    name: str = "PROBLEM"

    def __post_init__(self) -> None:
        n = self.c.shape[0]
        m = len(self.senses)
        if self.A.shape != (m, n):
            raise ValueError(f"A has shape {self.A.shape}, expected {(m, n)}")
        for label, arr, size in (("rhs", self.rhs, m), ("lb", self.lb, n),
                                 ("ub", self.ub, n), ("integer", self.integer, n)):
            if arr.shape != (size,):
                raise ValueError(f"{label} has shape {arr.shape}, expected {(size,)}")
        if self.var_names and len(self.var_names) != n:
            raise ValueError("var_names length does not match number of variables")
        if self.row_names and len(self.row_names) != m:
            raise ValueError("row_names length does not match number of rows")
        bad = [s for s in self.senses if s not in SENSES]
        if bad:
            raise ValueError(f"unknown constraint sense {bad[0]!r}")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.rhs))):
            raise ValueError("objective, matrix and rhs must be finite")
        if np.any(np.isnan(self.lb)) or np.any(np.isnan(self.ub)) or np.any(self.lb > self.ub):
            raise ValueError("variable bounds must satisfy lb <= ub")

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]

    @property
    def num_rows(self) -> int:
        return len(self.senses)

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper bounds on each row activity ``A[i] @ x``."""
        lo = np.full(self.num_rows, -np.inf)
        hi = np.full(self.num_rows, np.inf)
        for i, s in enumerate(self.senses):
            if s in (GE, EQ):
                lo[i] = self.rhs[i]
            if s in (LE, EQ):
                hi[i] = self.rhs[i]
        return lo, hi

    def relaxed(self) -> MilpProblem:
        """Copy with integrality dropped."""
        return MilpProblem(self.c, self.A, self.senses, self.rhs, self.lb, self.ub,
                           np.zeros_like(self.integer), self.var_names, self.row_names, self.name)

    def with_bounds(self, lb: np.ndarray, ub: np.ndarray) -> MilpProblem:
        return MilpProblem(self.c, self.A, self.senses, self.rhs, lb, ub,
                           self.integer, self.var_names, self.row_names, self.name)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of ``x`` (0 when feasible)."""
        lo, hi = self.row_bounds()
        act = self.A @ x
        worst = 0.0
        if self.num_rows:
            worst = max(worst, float(np.max(np.maximum(lo - act, 0.0))),
                        float(np.max(np.maximum(act - hi, 0.0))))
        if self.num_vars:
            worst = max(worst, float(np.max(np.maximum(self.lb - x, 0.0))),
                        float(np.max(np.maximum(x - self.ub, 0.0))))
        return worst


@dataclass
class ProblemBuilder:
    """Incremental assembly of a :class:`MilpProblem` from named rows."""

    name: str = "PROBLEM"
    _names: list[str] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict)
    _lb: list[float] = field(default_factory=list)
    _ub: list[float] = field(default_factory=list)
    _int: list[bool] = field(default_factory=list)
    _cost: dict[int, float] = field(default_factory=dict)
    _rows: list[dict[int, float]] = field(default_factory=list)
    _senses: list[str] = field(default_factory=list)
    _rhs: list[float] = field(default_factory=list)
    _row_names: list[str] = field(default_factory=list)

    def add_var(self, name: str, lb: float = 0.0, ub: float = np.inf, integer: bool = False) -> int:
        if name in self._index:
            raise KeyError(f"duplicate variable {name}")
        j = len(self._names)
        self._names.append(name)
        self._index[name] = j
        self._lb.append(lb)
        self._ub.append(ub)
        self._int.append(integer)
        return j

    def index(self, name: str) -> int:
        return self._index[name]

    def fix(self, j: int, value: float = 0.0) -> None:
        self._lb[j] = value
        self._ub[j] = value

    def set_cost(self, j: int, value: float) -> None:
        self._cost[j] = self._cost.get(j, 0.0) + value

    def add_row(self, coefs: Mapping[int, float], sense: str, rhs: float, name: str = "") -> int:
        row: dict[int, float] = {}
        for j, v in coefs.items():
            row[j] = row.get(j, 0.0) + v
        self._rows.append(row)
        self._senses.append(sense)
        self._rhs.append(float(rhs))
        self._row_names.append(name or f"R{len(self._rows)}")
        return len(self._rows) - 1

    @property
    def num_vars(self) -> int:
        return len(self._names)

    @property
    def row_names(self) -> list[str]:
        return self._row_names

    def build(self) -> MilpProblem:
        n = len(self._names)
        A = np.zeros((len(self._rows), n))
        for i, row in enumerate(self._rows):
            for j, v in row.items():
                A[i, j] += v
        c = np.zeros(n)
        for j, v in self._cost.items():
            c[j] = v
        return MilpProblem(
            c=c, A=A, senses=tuple(self._senses), rhs=np.array(self._rhs, dtype=float),
            lb=np.array(self._lb, dtype=float), ub=np.array(self._ub, dtype=float),
            integer=np.array(self._int, dtype=bool), var_names=tuple(self._names),
            row_names=tuple(self._row_names), name=self.name,
        )
