"""Nonlinear AC validation of siting plans."""

from .replay import (
    ReplayReport,
    Violation,
    load_report,
    replay,
    save_report,
    violation_summary,
)

__all__ = ["ReplayReport", "Violation", "load_report", "replay", "save_report",
           "violation_summary"]
