"""One-call planning: build the model, solve it, map values back to catalog keys."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .domain import Instance
from .milp import RELIABILITY, MilpSolution, solve_milp
from .model import BINARY_FAMILIES, Key, PlanningModel, build_model

OPTIMAL = "optimal"


@dataclass(frozen=True)
class PlanSolution:
    """Solver outcome expressed in model terms.

    ``values`` maps catalog keys such as ``("FS", "P1", 1)`` to primal values;
    it is empty when no incumbent exists.
    """

    status: str
    objective: str
    values: Mapping[Key, float] = field(default_factory=dict)
    objective_value: float = float("nan")
    bound: float = float("nan")
    gap: float = float("nan")
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def get(self, *key) -> float:
        return self.values.get(tuple(key), 0.0)

    def with_values(self, values: Mapping[Key, float]) -> PlanSolution:
        return PlanSolution(self.status, self.objective, dict(values), self.objective_value,
                            self.bound, self.gap, self.nodes, self.wall_time)

    @classmethod
    def from_milp(cls, model: PlanningModel, sol: MilpSolution) -> PlanSolution:
        values = model.values(sol.x) if sol.has_incumbent else {}
        return cls(sol.status, model.objective, values, sol.objective, sol.bound, sol.gap,
                   sol.nodes, sol.wall_time)


def solve_plan(instance: Instance, objective: str, node_cap: int | None = None,
               time_cap: float | None = None, branching: str = RELIABILITY
               ) -> tuple[PlanningModel, PlanSolution]:
    """Build and solve; the model is returned too so callers can export it."""
    start = time.perf_counter()
    model = build_model(instance, objective)
    sol = solve_milp(model.problem, node_cap=node_cap, time_cap=time_cap, branching=branching)
    plan = PlanSolution.from_milp(model, sol)
    wall = time.perf_counter() - start
    return model, PlanSolution(plan.status, plan.objective, plan.values, plan.objective_value,
                               plan.bound, plan.gap, plan.nodes, wall)


def binary_values(solution: PlanSolution) -> dict[Key, int]:
    return {k: int(np.round(v)) for k, v in solution.values.items() if k[0] in BINARY_FAMILIES}
