"""Decision problem: day-ahead dispatch plus scenario-stacked siting/sizing."""

from .conic import ConicProblem, LinExpr, ProblemBuilder
from .dayahead import DayAheadSchedule, day_ahead_schedule
from .plan import (
    CostBreakdown,
    EssInstallation,
    NoEssComparison,
    SitingPlan,
    compare_no_ess,
    cost_report,
    extract_plan,
)
from .problem import build_problem
from .solvers import SolveResult, SolverOptions, solve
from ..specs import CouplingSpec, EssCostModel, GeneratorSpec, OperatingLimits

__all__ = [
    "ConicProblem",
    "CostBreakdown",
    "CouplingSpec",
    "DayAheadSchedule",
    "EssCostModel",
    "EssInstallation",
    "GeneratorSpec",
    "LinExpr",
    "NoEssComparison",
    "OperatingLimits",
    "ProblemBuilder",
    "SitingPlan",
    "SolveResult",
    "SolverOptions",
    "build_problem",
    "compare_no_ess",
    "cost_report",
    "day_ahead_schedule",
    "extract_plan",
    "solve",
]
