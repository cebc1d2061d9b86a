"""Makespan minimisation on identical parallel machines with a shared setup
server (Pm|S1|Cmax): exact flow-based and time-indexed MILP models, bounds
and greedy heuristics, a brute-force oracle, and a benchmark harness.
"""

__version__ = "0.1.0"

from .bounds import BoundReport, PriorityRule, horizon_ub, lb_better, lb_trivial
from .instance import (
    GenParams,
    Instance,
    Job,
    JobClass,
    generate,
    group_identical,
    make_instance,
    parse_instance,
    render_instance,
    table3_grid,
)
from .oracle import OracleResult, brute_force
from .schedule import Assignment, Schedule, Violation, decode_flow, gantt_svg, validate

__all__ = [
    "__version__",
    "Assignment",
    "BoundReport",
    "GenParams",
    "Instance",
    "Job",
    "JobClass",
    "OracleResult",
    "PriorityRule",
    "Schedule",
    "Violation",
    "brute_force",
    "decode_flow",
    "gantt_svg",
    "generate",
    "group_identical",
    "horizon_ub",
    "lb_better",
    "lb_trivial",
    "make_instance",
    "parse_instance",
    "render_instance",
    "table3_grid",
    "validate",
]
