"""LP-based branch-and-bound for problems whose integer variables are binary.

The open node with the lowest LP bound is expanded next (lowest node id on
ties).  Children are solved as soon as they are created, warm-started from
the parent's optimal basis with the dual simplex.

Two variable rules are available:

``reliability`` (default)
    Pseudocost branching whose estimates are seeded by strong branching
    until each binary has ``RELIABLE`` observations per direction; product
    score, lowest index on ties.
``most_fractional``
    The binary closest to 0.5, lowest index on ties.  Simple and
    reproducible but needs far larger trees on the bundled instances.
"""

from __future__ import annotations

import heapq
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .problem import MilpProblem
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, Basis, LpEngine, reduce_fixed

log = logging.getLogger(__name__)

INT_TOL = 1e-6
GAP_ABS = 1e-6
GAP_REL = 1e-6
PROGRESS_EVERY = 5000

MOST_FRACTIONAL = "most_fractional"
RELIABILITY = "reliability"
BRANCHING_RULES = (MOST_FRACTIONAL, RELIABILITY)
RELIABLE = 4
STRONG_MAX = 8
STRONG_LOOKAHEAD = 4
SCORE_EPS = 1e-6

NO_INCUMBENT = "no_incumbent"
LIMIT_EXCEEDED = "limit_exceeded"


@dataclass
class MilpSolution:
    status: str
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    objective: float = float("nan")
    bound: float = float("nan")
    nodes: int = 0
    gap: float = float("nan")
    lp_iterations: int = 0
    wall_time: float = 0.0

    @property
    def has_incumbent(self) -> bool:
        return self.x.size > 0 and np.isfinite(self.objective)


def _gap_tol(value: float) -> float:
    return max(GAP_ABS, GAP_REL * abs(value))


@dataclass(order=True)
class _Node:
    bound: float
    id: int
    lb: np.ndarray = field(compare=False)
    ub: np.ndarray = field(compare=False)
    x: np.ndarray = field(compare=False)
    basis: Basis = field(compare=False)


def solve_milp(problem: MilpProblem, node_cap: int | None = None,
               time_cap: float | None = None, branching: str = RELIABILITY) -> MilpSolution:
    """Solve ``problem`` to proven optimality, or stop at the node/time cap.

    On a cap the returned status is ``limit_exceeded`` (an incumbent exists)
    or ``no_incumbent``; both carry the best bound found so far.  ``branching``
    selects the variable rule; nodes are always expanded best bound first.
    """
    if branching not in BRANCHING_RULES:
        raise ValueError(f"unknown branching rule {branching!r}; expected one of {BRANCHING_RULES}")
    start = time.perf_counter()
    integer = problem.integer
    if np.any(integer & ((problem.lb < -INT_TOL) | (problem.ub > 1 + INT_TOL))):
        raise ValueError("integer variables must be binary (bounds within [0, 1])")
    lb0 = problem.lb.copy()
    ub0 = problem.ub.copy()
    lb0[integer] = np.ceil(lb0[integer] - INT_TOL)
    ub0[integer] = np.floor(ub0[integer] + INT_TOL)
    if np.any(lb0 > ub0):
        return MilpSolution("infeasible", nodes=0, wall_time=time.perf_counter() - start)

    red = reduce_fixed(problem, lb0, ub0)
    if red.infeasible:
        return MilpSolution("infeasible", nodes=0, wall_time=time.perf_counter() - start)
    engine = LpEngine(red.c, red.A, red.row_lo, red.row_hi)
    ints = np.flatnonzero(integer[red.keep_cols])

    nodes = 0
    iterations = 0
    next_id = 0
    incumbent: np.ndarray | None = None
    inc_obj = np.inf
    heap: list[_Node] = []

    def lp(lb: np.ndarray, ub: np.ndarray, basis: Basis | None) -> tuple:
        nonlocal iterations
        status, x, obj, new_basis = engine.solve(lb, ub, basis)
        iterations += engine.iterations
        if status not in (OPTIMAL, INFEASIBLE, UNBOUNDED):
            raise RuntimeError(f"node LP failed: {status}")
        return status, x, obj + red.offset if status == OPTIMAL else np.inf, new_basis

    def accept(lb: np.ndarray, ub: np.ndarray, result: tuple) -> _Node | None:
        nonlocal nodes, next_id, incumbent, inc_obj
        status, x, obj, basis = result
        nodes += 1
        node_id = next_id
        next_id += 1
        if status != OPTIMAL or obj >= inc_obj - _gap_tol(inc_obj):
            return None
        frac = np.abs(x[ints] - np.round(x[ints]))
        if ints.size == 0 or frac.max() <= INT_TOL:
            incumbent = x
            inc_obj = obj
            log.debug("node %d: incumbent %.6f", node_id, obj)
            return None
        return _Node(obj, node_id, lb, ub, x, basis)

    root_result = lp(red.lb.copy(), red.ub.copy(), None)
    if root_result[0] == UNBOUNDED:
        return MilpSolution("unbounded", nodes=1, lp_iterations=iterations,
                            wall_time=time.perf_counter() - start)
    root = accept(red.lb.copy(), red.ub.copy(), root_result)
    if root is not None:
        heapq.heappush(heap, root)

    chooser = _Reliability(ints, lp) if branching == RELIABILITY else None
    limited = False
    while heap:
        if heap[0].bound >= inc_obj - _gap_tol(inc_obj):
            heap.clear()
            break
        if (node_cap is not None and nodes >= node_cap) or (
                time_cap is not None and time.perf_counter() - start >= time_cap):
            limited = True
            break
        node = heapq.heappop(heap)
        if nodes % PROGRESS_EVERY < 2:
            log.info("nodes %d open %d bound %.8g incumbent %.8g", nodes, len(heap), node.bound, inc_obj)
        if chooser is None:
            j, cached = _most_fractional(node.x, ints), {}
        else:
            j, cached = chooser.select(node)
        for value in (0.0, 1.0):
            lb = node.lb.copy()
            ub = node.ub.copy()
            lb[j] = ub[j] = value
            result = cached.get(value) or lp(lb, ub, node.basis)
            if chooser is not None and value not in cached:
                chooser.observe(j, node, value, result[2])
            child = accept(lb, ub, result)
            if child is not None:
                heapq.heappush(heap, child)

    wall = time.perf_counter() - start
    open_bound = min((n.bound for n in heap), default=np.inf)
    bound = min(open_bound, inc_obj)
    if incumbent is None:
        status = NO_INCUMBENT if limited else "infeasible"
        return MilpSolution(status, bound=bound if limited else np.nan, nodes=nodes,
                            lp_iterations=iterations, wall_time=wall)

    x = _polish(engine, red, incumbent, ints)
    obj = float(problem.c @ x)
    if not limited:
        bound = min(bound, obj)
    gap = abs(obj - bound) / max(abs(obj), 1e-10)
    return MilpSolution(LIMIT_EXCEEDED if limited else "optimal", x, obj, bound, nodes, gap,
                        iterations, time.perf_counter() - start)


def _most_fractional(x: np.ndarray, ints: np.ndarray) -> int:
    xi = x[ints]
    frac = np.abs(xi - np.round(xi))
    # distance from 0.5 smallest; argmin keeps the lowest index on ties
    score = np.where(frac > INT_TOL, np.abs(xi - np.floor(xi) - 0.5), np.inf)
    return int(ints[np.argmin(score)])


class _Reliability:
    """Pseudocost branching initialised by strong branching.

    A binary's pseudocosts count as reliable after ``RELIABLE`` observations
    in each direction; until then candidates are strong-branched (both
    children solved from the node basis).  Scores use the product rule.
    """

    def __init__(self, ints: np.ndarray, lp):
        n = int(ints.max()) + 1 if ints.size else 0
        self.ints = ints
        self.lp = lp
        self.sums = np.zeros((2, n))
        self.counts = np.zeros((2, n), dtype=int)

    def observe(self, j: int, node: _Node, value: float, obj: float) -> None:
        if not np.isfinite(obj):
            return
        f = node.x[j] - np.floor(node.x[j])
        side = int(value)
        dist = f if side == 0 else 1.0 - f
        if dist <= INT_TOL:
            return
        self.sums[side, j] += max(obj - node.bound, 0.0) / dist
        self.counts[side, j] += 1

    def _estimates(self, cand: np.ndarray) -> np.ndarray:
        known = self.counts > 0
        avg = np.array([self.sums[s][known[s]].mean() if known[s].any() else 1.0 for s in (0, 1)])
        with np.errstate(invalid="ignore", divide="ignore"):
            pc = np.where(known[:, cand], self.sums[:, cand] / np.maximum(self.counts[:, cand], 1),
                          avg[:, None])
        return pc

    def select(self, node: _Node) -> tuple[int, dict]:
        x = node.x
        xi = x[self.ints]
        fracs = xi - np.floor(xi)
        mask = np.minimum(fracs, 1.0 - fracs) > INT_TOL
        cand = self.ints[mask]
        f = fracs[mask]
        pc = self._estimates(cand)
        scores = _product(pc[0] * f, pc[1] * (1.0 - f))
        order = np.argsort(-scores, kind="stable")
        best_j, best_score, best_cache = int(cand[order[0]]), scores[order[0]], {}
        unreliable = np.minimum(self.counts[0, cand], self.counts[1, cand]) < RELIABLE
        tried = since_best = 0
        for idx in order:
            if not unreliable[idx]:
                continue
            if tried >= STRONG_MAX or since_best >= STRONG_LOOKAHEAD:
                break
            j = int(cand[idx])
            results = {}
            gains = []
            for value in (0.0, 1.0):
                lb = node.lb.copy()
                ub = node.ub.copy()
                lb[j] = ub[j] = value
                res = self.lp(lb, ub, node.basis)
                results[value] = res
                self.observe(j, node, value, res[2])
                gains.append(res[2] - node.bound)
            tried += 1
            score = _product(np.array([gains[0]]), np.array([gains[1]]))[0]
            if not (np.isfinite(gains[0]) and np.isfinite(gains[1])):
                # an infeasible child settles the choice
                return j, results
            if score > best_score or best_cache == {} and j == best_j:
                best_j, best_score, best_cache = j, score, results
                since_best = 0
            else:
                since_best += 1
        return best_j, best_cache


def _product(down: np.ndarray, up: np.ndarray) -> np.ndarray:
    return np.maximum(down, SCORE_EPS) * np.maximum(up, SCORE_EPS)


def _polish(engine: LpEngine, red, x_red: np.ndarray, ints: np.ndarray) -> np.ndarray:
    """Round binaries exactly and re-solve the continuous part for clean values."""
    lb = red.lb.copy()
    ub = red.ub.copy()
    vals = np.round(x_red[ints])
    lb[ints] = vals
    ub[ints] = vals
    status, x, _, _ = engine.solve(lb, ub, None)
    if status != OPTIMAL:
        x = x_red.copy()
        x[ints] = vals
    return red.expand(x)
