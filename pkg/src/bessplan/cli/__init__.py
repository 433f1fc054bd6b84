"""Run orchestration: declarative config, CLI verbs, artifacts, plots."""

from .config import RunConfig, load_config
from .runner import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_OK, EXIT_SOLVER, run

__all__ = ["EXIT_INFEASIBLE", "EXIT_INPUT", "EXIT_OK", "EXIT_SOLVER", "RunConfig",
           "load_config", "run"]
