"""Benchmark suites, oracle-certified instance generation and reporting."""

from .generate import KINDS, TaskInstance, generate_instances, write_instances
from .pipeline import run_instance, run_suite
from .report import Report, RunRecord, aggregate, baseline_plan, classify_result, compute_pscr

__all__ = [
    "KINDS",
    "Report",
    "RunRecord",
    "TaskInstance",
    "aggregate",
    "baseline_plan",
    "classify_result",
    "compute_pscr",
    "generate_instances",
    "run_instance",
    "run_suite",
    "write_instances",
]
