"""Bounded-variable revised simplex.

Rows are turned into logical variables: for row ``i`` the logical ``s_i``
equals ``A[i] @ x`` and carries the row's bounds, so the working system is
``[A, -I] @ [x; s] = 0`` with every restriction expressed as a column bound.
The all-logical basis is always a valid starting point.

The basis is held as a sparse LU factorisation followed by a product-form
file of eta columns, refactorised every ``REFACTOR_EVERY`` pivots.  The
primal routine runs a composite phase 1 (minimise the sum of bound
violations of the basic variables) followed by phase 2.  A dual routine
re-optimises from a dual-feasible basis after bounds change, which is how
branch-and-bound nodes are warm-started.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .problem import MilpProblem

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
HARRIS_TOL = 1e-9
REFACTOR_EVERY = 50

BASIC, AT_LOWER, AT_UPPER, FREE = -1, 0, 1, 2

OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT = "optimal", "infeasible", "unbounded", "iteration_limit"


class SingularBasis(ArithmeticError):
    pass


class Factor:
    """``B^-1`` as an LU factorisation of the last refactorised basis plus etas.

    Each eta ``(r, alpha)`` records that column ``r`` of the basis was
    replaced by a column whose representation in the previous basis is
    ``alpha``.  Instances are immutable; :meth:`update` returns a new one
    sharing the LU and the earlier etas.
    """

    __slots__ = ("lu", "m", "etas")

    def __init__(self, lu, m: int, etas: tuple = ()):
        self.lu = lu
        self.m = m
        self.etas = etas

    @classmethod
    def build(cls, B: sp.csc_matrix) -> Factor:
        m = B.shape[0]
        if m == 0:
            return cls(None, 0)
        try:
            lu = splu(B, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SingularBasis(str(exc)) from None
        return cls(lu, m)

    def update(self, r: int, alpha: np.ndarray) -> Factor:
        return Factor(self.lu, self.m, self.etas + ((r, alpha.copy()),))

    def ftran(self, v: np.ndarray) -> np.ndarray:
        """Solve ``B w = v``."""
        if self.m == 0:
            return np.zeros(0)
        w = self.lu.solve(np.asarray(v, dtype=float))
        for r, alpha in self.etas:
            wr = w[r] / alpha[r]
            if wr != 0.0:
                w -= wr * alpha
            w[r] = wr
        return w

    def btran(self, u: np.ndarray) -> np.ndarray:
        """Solve ``y B = u`` for the row vector ``y``."""
        if self.m == 0:
            return np.zeros(0)
        y = np.array(u, dtype=float)
        for r, alpha in reversed(self.etas):
            y[r] = (y[r] - (y @ alpha - y[r] * alpha[r])) / alpha[r]
        return self.lu.solve(y, trans="T")


@dataclass
class Basis:
    """Basic column indices, the status of every column and (optionally) a factor."""

    head: np.ndarray
    status: np.ndarray
    factor: Factor | None = field(default=None, repr=False, compare=False)

    def copy(self) -> Basis:
        return Basis(self.head.copy(), self.status.copy(), self.factor)


@dataclass
class LpSolution:
    status: str
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    basis: tuple[str, ...] = ()
    iterations: int = 0


class LpEngine:
    """Simplex workspace for a fixed constraint matrix and varying column bounds.

    ``A`` is the structural matrix, ``row_lo``/``row_hi`` the row-activity
    bounds.  :meth:`solve` takes structural bounds, optionally a starting
    :class:`Basis`, and returns ``(status, x, objective, basis)`` where ``x``
    covers the structural columns only.
    """

    def __init__(self, c: np.ndarray, A: np.ndarray, row_lo: np.ndarray, row_hi: np.ndarray,
                 max_iter: int | None = None):
        self.m, self.n = A.shape
        self.N = self.n + self.m
        self.Aw = np.hstack([A, -np.eye(self.m)]) if self.m else np.zeros((0, self.n))
        self.Aw_csc = sp.csc_matrix(self.Aw)
        self.AwT = sp.csr_matrix(self.Aw.T)
        self.cost = np.concatenate([c, np.zeros(self.m)])
        self.row_lo = np.asarray(row_lo, dtype=float)
        self.row_hi = np.asarray(row_hi, dtype=float)
        self.max_iter = max_iter or 50 * (self.N + 10)
        self.bland_after = 3 * (self.m + self.n)
        self.iterations = 0

    # ------------------------------------------------------------------ setup
    def _load(self, lb: np.ndarray, ub: np.ndarray, basis: Basis | None) -> None:
        self.lo = np.concatenate([lb, self.row_lo])
        self.hi = np.concatenate([ub, self.row_hi])
        if basis is None:
            head = np.arange(self.n, self.N)
            status = np.full(self.N, AT_LOWER, dtype=np.int8)
            status[head] = BASIC
        else:
            head = basis.head.copy()
            status = basis.status.copy()
        self.head = head
        self.status = status
        self.x = np.zeros(self.N)
        nb = status != BASIC
        # Nonbasic columns sit on a finite bound; re-derive the side after bound edits.
        lo_f = np.isfinite(self.lo)
        hi_f = np.isfinite(self.hi)
        side = np.where((status == AT_UPPER) & hi_f, AT_UPPER,
                        np.where(lo_f, AT_LOWER, np.where(hi_f, AT_UPPER, FREE)))
        status[nb] = side[nb]
        at_lo = status == AT_LOWER
        at_hi = status == AT_UPPER
        self.x[at_lo] = self.lo[at_lo]
        self.x[at_hi] = self.hi[at_hi]
        factor = basis.factor if basis is not None else None
        if factor is None or len(factor.etas) >= REFACTOR_EVERY:
            self._refactor()
        else:
            self.factor = factor
            self._recompute_basics()

    def _refactor(self) -> None:
        self.factor = Factor.build(self.Aw_csc[:, self.head].tocsc())
        self._recompute_basics()

    def _recompute_basics(self) -> None:
        if not self.m:
            return
        xn = self.x.copy()
        xn[self.head] = 0.0
        self.x[self.head] = -self.factor.ftran(self.Aw_csc @ xn)

    def _column(self, q: int) -> np.ndarray:
        return self.factor.ftran(self.Aw[:, q])

    def _pivot(self, r: int, q: int, alpha_q: np.ndarray) -> None:
        """Replace the basic column at position ``r`` by column ``q``."""
        self.head[r] = q
        self.status[q] = BASIC
        self.iterations += 1
        if len(self.factor.etas) + 1 >= REFACTOR_EVERY:
            self._refactor()
        else:
            self.factor = self.factor.update(r, alpha_q)

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        if not self.m:
            return cost.copy()
        y = self.factor.btran(cost[self.head])
        d = cost - self.AwT @ y
        d[self.head] = 0.0
        return d

    def _movable(self) -> np.ndarray:
        return (self.status != BASIC) & (self.hi > self.lo)

    # ----------------------------------------------------------------- primal
    def _phase1_cost(self) -> np.ndarray | None:
        xb = self.x[self.head]
        below = xb < self.lo[self.head] - FEAS_TOL
        above = xb > self.hi[self.head] + FEAS_TOL
        if not (below.any() or above.any()):
            return None
        cost = np.zeros(self.N)
        cost[self.head[below]] = -1.0
        cost[self.head[above]] = 1.0
        return cost

    def _primal(self, phase1: bool) -> str:
        stall = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            if phase1:
                cost = self._phase1_cost()
                if cost is None:
                    return OPTIMAL
            else:
                cost = self.cost
            d = self._reduced_costs(cost)
            mov = self._movable()
            st = self.status
            elig = mov & (((st == AT_LOWER) & (d < -OPT_TOL)) | ((st == AT_UPPER) & (d > OPT_TOL))
                          | ((st == FREE) & (np.abs(d) > OPT_TOL)))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                return INFEASIBLE if phase1 else OPTIMAL
            q = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self._column(q) if self.m else np.zeros(0)
            rate = -direction * alpha
            r, theta, to_upper = self._primal_ratio(rate, phase1, bland)
            flip = self.hi[q] - self.lo[q]
            if r < 0 and not np.isfinite(flip):
                if phase1:
                    # cannot happen in exact arithmetic; rebuild and retry
                    self._refactor()
                    stall += 1
                    if stall > 5:
                        return INFEASIBLE
                    continue
                return UNBOUNDED
            if r < 0 or flip <= theta:
                # bound flip of the entering column
                self.x[q] += direction * flip
                if self.m:
                    self.x[self.head] += flip * rate
                st[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.iterations += 1
                theta = flip
            else:
                leaving = self.head[r]
                self.x[q] += direction * theta
                self.x[self.head] += theta * rate
                self.x[leaving] = self.hi[leaving] if to_upper else self.lo[leaving]
                st[leaving] = AT_UPPER if to_upper else AT_LOWER
                self._pivot(r, q, alpha)
            if theta <= 1e-12:
                stall += 1
                if stall >= self.bland_after:
                    bland = True
            else:
                stall = 0

    def _primal_ratio(self, rate: np.ndarray, phase1: bool, bland: bool) -> tuple[int, float, bool]:
        """Harris two-pass ratio test; returns (row, step, leaves_at_upper)."""
        if not self.m:
            return -1, np.inf, False
        hb = self.head
        xb = self.x[hb]
        lo = self.lo[hb]
        hi = self.hi[hb]
        dec = rate < -PIVOT_TOL
        inc = rate > PIVOT_TOL
        below = xb < lo - FEAS_TOL
        above = xb > hi + FEAS_TOL
        feas = ~(below | above)

        # bound each basic variable would stop at, and whether that is the upper bound
        target = np.full(self.m, np.nan)
        upper = np.zeros(self.m, dtype=bool)
        sel = feas & dec & np.isfinite(lo)
        target[sel] = lo[sel]
        sel2 = feas & inc & np.isfinite(hi)
        target[sel2] = hi[sel2]
        upper[sel2] = True
        if phase1:
            s3 = below & inc
            target[s3] = lo[s3]
            s4 = above & dec
            target[s4] = hi[s4]
            upper[s4] = True
        active = ~np.isnan(target)
        if not active.any():
            return -1, np.inf, False
        idx = np.flatnonzero(active)
        rt = rate[idx]
        gap = target[idx] - xb[idx]
        exact = np.maximum(gap / rt, 0.0)
        if bland:
            tmin = exact.min()
            ties = idx[exact <= tmin + 1e-12]
            r = int(ties[np.argmin(hb[ties])])
            return r, float(max(exact[np.flatnonzero(idx == r)[0]], 0.0)), bool(upper[r])
        relaxed = (gap + np.sign(rt) * HARRIS_TOL) / rt
        tmax = max(relaxed.min(), 0.0)
        ok = exact <= tmax
        pick = np.flatnonzero(ok)
        best = pick[np.argmax(np.abs(rt[pick]))]
        r = int(idx[best])
        return r, float(exact[best]), bool(upper[r])

    # ------------------------------------------------------------------- dual
    def _dual(self) -> str:
        stall = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return ITERATION_LIMIT
            hb = self.head
            xb = self.x[hb]
            lo = self.lo[hb]
            hi = self.hi[hb]
            viol = np.maximum(lo - xb, xb - hi)
            bad = np.flatnonzero(viol > FEAS_TOL)
            if bad.size == 0:
                return OPTIMAL
            if bland:
                r = int(bad[np.argmin(hb[bad])])
            else:
                r = int(bad[np.argmax(viol[bad])])
            below = xb[r] < lo[r]
            bound = lo[r] if below else hi[r]
            sgn = 1.0 if below else -1.0
            e_r = np.zeros(self.m)
            e_r[r] = 1.0
            alpha_r = self.AwT @ self.factor.btran(e_r)
            a = -sgn * alpha_r
            d = self._reduced_costs(self.cost)
            mov = self._movable()
            st = self.status
            elig = mov & (((st == AT_LOWER) & (a > PIVOT_TOL)) | ((st == AT_UPPER) & (a < -PIVOT_TOL))
                          | ((st == FREE) & (np.abs(a) > PIVOT_TOL)))
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                if self._row_unreachable(r, alpha_r, bound, below):
                    return INFEASIBLE
                return ITERATION_LIMIT
            ac = a[cand]
            dc = d[cand]
            free = st[cand] == FREE
            exact = np.where(free, np.abs(dc) / np.abs(ac), dc / ac)
            exact = np.maximum(exact, 0.0)
            if bland:
                tmin = exact.min()
                ties = cand[exact <= tmin + 1e-12]
                q = int(ties.min())
                step = tmin
            else:
                relaxed = np.where(free, (np.abs(dc) + OPT_TOL) / np.abs(ac),
                                   (dc + np.sign(ac) * OPT_TOL) / ac)
                tmax = max(relaxed.min(), 0.0)
                pick = np.flatnonzero(exact <= tmax)
                best = pick[np.argmax(np.abs(ac[pick]))]
                q = int(cand[best])
                step = exact[best]
            alpha_q = self._column(q)
            if abs(alpha_q[r]) < PIVOT_TOL:
                self._refactor()
                stall += 1
                if stall > 2 * self.bland_after:
                    return ITERATION_LIMIT
                continue
            delta = (self.x[hb[r]] - bound) / alpha_q[r]
            leaving = hb[r]
            self.x[self.head] -= delta * alpha_q
            self.x[q] += delta
            self.x[leaving] = bound
            st[leaving] = AT_LOWER if below else AT_UPPER
            self._pivot(r, q, alpha_q)
            if step <= 1e-12:
                stall += 1
                if stall >= self.bland_after:
                    bland = True
            else:
                stall = 0

    def _row_unreachable(self, r: int, alpha_r: np.ndarray, bound: float, below: bool) -> bool:
        """Confirm that basic row ``r`` cannot reach ``bound`` over the nonbasic box."""
        nb = self.status != BASIC
        coef = -alpha_r[nb]
        lo = self.lo[nb]
        hi = self.hi[nb]
        with np.errstate(invalid="ignore"):
            if below:
                best = np.where(coef > 0, coef * hi, coef * lo)
            else:
                best = np.where(coef > 0, coef * lo, coef * hi)
        # round-off entries against an infinite bound would swamp the sum
        noise = (np.abs(coef) <= PIVOT_TOL) & ~np.isfinite(best)
        best = np.where((coef == 0) | noise, 0.0, best)
        reach = float(np.sum(best))
        if below:
            return reach < bound - FEAS_TOL
        return reach > bound + FEAS_TOL

    def _dual_feasible(self) -> bool:
        d = self._reduced_costs(self.cost)
        st = self.status
        mov = self._movable()
        bad = mov & (((st == AT_LOWER) & (d < -1e-7)) | ((st == AT_UPPER) & (d > 1e-7))
                     | ((st == FREE) & (np.abs(d) > 1e-7)))
        return not bad.any()

    # ------------------------------------------------------------------ entry
    def solve(self, lb: np.ndarray, ub: np.ndarray, basis: Basis | None = None
              ) -> tuple[str, np.ndarray, float, Basis]:
        self.iterations = 0
        try:
            return self._solve(lb, ub, basis)
        except SingularBasis:
            if basis is None:
                raise
            # warm basis went singular: start over from the logical basis
            self.iterations = 0
            return self._solve(lb, ub, None)

    def _solve(self, lb: np.ndarray, ub: np.ndarray, basis: Basis | None
               ) -> tuple[str, np.ndarray, float, Basis]:
        self._load(lb, ub, basis)
        if basis is not None and self._dual_feasible():
            if self._dual() == INFEASIBLE:
                return INFEASIBLE, self.x[: self.n].copy(), np.nan, self._basis()
            # on dual trouble the primal carries on from the current basis
        for _ in range(3):
            status = self._primal(phase1=True)
            if status == OPTIMAL:
                status = self._primal(phase1=False)
            if status != OPTIMAL:
                break
            self._recompute_basics()
            if self._phase1_cost() is None:
                break
            self._refactor()
        x = self.x[: self.n].copy()
        if status == OPTIMAL:
            x = np.clip(x, lb, ub)
            return OPTIMAL, x, float(self.cost[: self.n] @ x), self._basis()
        return status, x, np.nan, self._basis()

    def _basis(self) -> Basis:
        return Basis(self.head.copy(), self.status.copy(), self.factor)


@dataclass
class Reduced:
    """Problem with fixed columns substituted out and empty rows dropped."""

    keep_cols: np.ndarray
    keep_rows: np.ndarray
    fixed_values: np.ndarray
    c: np.ndarray
    A: np.ndarray
    row_lo: np.ndarray
    row_hi: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    offset: float
    infeasible: bool = False

    def expand(self, x_reduced: np.ndarray) -> np.ndarray:
        x = self.fixed_values.copy()
        x[self.keep_cols] = x_reduced
        return x


def reduce_fixed(problem: MilpProblem, lb: np.ndarray | None = None, ub: np.ndarray | None = None) -> Reduced:
    """Eliminate fixed columns; rows left without columns are checked and dropped."""
    lb = problem.lb if lb is None else lb
    ub = problem.ub if ub is None else ub
    fixed = lb == ub
    keep = np.flatnonzero(~fixed)
    values = np.where(fixed, lb, 0.0)
    lo, hi = problem.row_bounds()
    shift = problem.A[:, fixed] @ values[fixed] if fixed.any() else np.zeros(problem.num_rows)
    lo = lo - shift
    hi = hi - shift
    A = problem.A[:, keep]
    nonempty = np.any(A != 0.0, axis=1) if A.size else np.zeros(problem.num_rows, dtype=bool)
    empty = ~nonempty
    infeasible = bool(np.any(lo[empty] > FEAS_TOL) or np.any(hi[empty] < -FEAS_TOL))
    rows = np.flatnonzero(nonempty)
    return Reduced(
        keep_cols=keep, keep_rows=rows, fixed_values=values, c=problem.c[keep], A=A[rows],
        row_lo=lo[rows], row_hi=hi[rows], lb=lb[keep], ub=ub[keep],
        offset=float(problem.c[fixed] @ values[fixed]), infeasible=infeasible,
    )


def _describe_basis(problem: MilpProblem, red: Reduced, basis: Basis) -> tuple[str, ...]:
    names = []
    n = red.keep_cols.size
    for j in basis.head:
        if j < n:
            col = int(red.keep_cols[j])
            names.append(problem.var_names[col] if problem.var_names else f"x{col}")
        else:
            row = int(red.keep_rows[j - n])
            names.append("slack:" + (problem.row_names[row] if problem.row_names else f"r{row}"))
    return tuple(names)


def solve_lp(problem: MilpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve the LP relaxation of ``problem`` (integrality flags are ignored)."""
    red = reduce_fixed(problem)
    if red.infeasible:
        return LpSolution(INFEASIBLE)
    engine = LpEngine(red.c, red.A, red.row_lo, red.row_hi, max_iter=max_iter)
    status, xr, obj, basis = engine.solve(red.lb, red.ub)
    if status != OPTIMAL:
        return LpSolution(status, iterations=engine.iterations)
    x = red.expand(xr)
    return LpSolution(OPTIMAL, float(problem.c @ x), x, _describe_basis(problem, red, basis),
                      engine.iterations)
