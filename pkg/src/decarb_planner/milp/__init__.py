"""Embedded MILP machinery: problem container, simplex, branch-and-bound, MPS export."""

from .bnb import BRANCHING_RULES, MOST_FRACTIONAL, RELIABILITY, MilpSolution, solve_milp
from .mps import export_mps, mps_name_map
from .problem import EQ, GE, LE, MilpProblem, ProblemBuilder
from .simplex import LpSolution, solve_lp

__all__ = [
    "BRANCHING_RULES", "EQ", "GE", "LE", "MOST_FRACTIONAL", "RELIABILITY", "LpSolution", "MilpProblem", "MilpSolution", "ProblemBuilder",
    "export_mps", "mps_name_map", "solve_lp", "solve_milp",
]
