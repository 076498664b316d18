"""Multi-period power-sector decarbonisation planning as a mixed-integer linear program."""

__version__ = "0.1.0"

from .domain import Instance, validate_instance
from .model import MIN_BUDGET, MIN_EMISSION, OBJECTIVES, InvalidInstance, build_model
from .planning import PlanSolution, solve_plan
from .report import audit_feasibility, extract_reports, summarize
from .workbook import instance_to_workbook, read_workbook, to_instance, write_workbook

__all__ = [
    "MIN_BUDGET", "MIN_EMISSION", "OBJECTIVES", "Instance", "InvalidInstance", "PlanSolution",
    "audit_feasibility", "build_model", "extract_reports", "instance_to_workbook",
    "read_workbook", "solve_plan", "summarize", "to_instance", "validate_instance",
    "write_workbook",
]
