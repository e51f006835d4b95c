"""Natural-language instructions to STRIPS plans.

The pipeline translates an instruction into a compact problem abstraction,
embeds it into a PDDL problem, grounds it, and plans with a population of
small action subspaces searched by bounded A*.
"""

from .grounding import (
    GoalUnsatisfied,
    GroundedAction,
    GroundedTask,
    PreconditionConflict,
    PreconditionUnsupported,
    Success,
    apply,
    applicable,
    critical_actions,
    format_plan,
    ground,
    parse_plan,
    validate_plan,
)
from .meta import ConflictRecorder, PlanResult, SearchConfig, run
from .pddl import Atom, Domain, Problem, parse_domain, parse_problem, serialize
from .search import INFINITY, astar_subspace, ff_heuristic

__all__ = [
    "Atom",
    "ConflictRecorder",
    "Domain",
    "GoalUnsatisfied",
    "GroundedAction",
    "GroundedTask",
    "INFINITY",
    "PlanResult",
    "PreconditionConflict",
    "PreconditionUnsupported",
    "Problem",
    "SearchConfig",
    "Success",
    "applicable",
    "apply",
    "astar_subspace",
    "critical_actions",
    "ff_heuristic",
    "format_plan",
    "ground",
    "parse_domain",
    "parse_plan",
    "parse_problem",
    "run",
    "serialize",
    "validate_plan",
]
