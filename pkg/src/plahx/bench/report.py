"""Result classes, per-run records and aggregated reports."""

from __future__ import annotations

import json
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Sequence

from ..grounding import GroundedTask
from ..search import INFINITY, astar_subspace

RESULT_CLASSES = (
    "syntax_error",
    "semantic_error",
    "plan_invalidity",
    "plan_success",
    "context_overflow",
    "domain_drift",
)


class EmptyInput(ValueError):
    pass


@dataclass
class PipelineTrace:
    """What happened to one instance, stage by stage."""

    translation_class: str  # a translator ``result_class``
    drift: bool = False
    plan_found: bool = False
    plan_valid: bool = False


def classify_result(trace: PipelineTrace) -> str:
    t = trace.translation_class
    if t == "context_overflow":
        return "context_overflow"
    if t == "syntax_error":
        return "syntax_error"
    if t == "semantic_error":
        return "semantic_error"
    if t != "success":
        raise ValueError(f"unknown translation class '{t}'")
    if trace.drift:
        return "domain_drift"
    if trace.plan_found and trace.plan_valid:
        return "plan_success"
    return "plan_invalidity"


def compute_pscr(n_actions: float, pop_size: float, max_subspace: float) -> float:
    """Parallel subspace compression ratio ``|A| / (N_pop * max |A_j|)``."""
    if n_actions <= 0 or pop_size <= 0 or max_subspace <= 0:
        raise ValueError("all inputs must be positive")
    return n_actions / (pop_size * max_subspace)


@dataclass(frozen=True)
class BaselineResult:
    plan: tuple[int, ...] | None
    h_init: float
    nodes_expanded: int

    @property
    def found(self) -> bool:
        return self.plan is not None


def baseline_plan(task: GroundedTask, budget: int = 1_000_000) -> BaselineResult:
    """Full-action-space A* with FF and no incumbent bound."""
    res = astar_subspace(task, range(len(task.actions)), INFINITY, budget)
    plan = tuple(res.plans[-1]) if res.plans else None
    return BaselineResult(plan, res.h_init, res.nodes_expanded)


@dataclass
class RunRecord:
    instance_id: str
    kind: str
    result_class: str
    prompt_tokens: int
    full_prompt_tokens: int = 0  # same template with whole problem files as targets
    cpu_seconds: float = 0.0
    plan_length: int | None = None
    plan: list[str] | None = None  # action names of the returned plan
    optimal_length: int | None = None
    n_actions: int = 0
    mean_subspace: float = 0.0
    pscr: float | None = None
    violations: list[str] = field(default_factory=list)


def _mean(xs: Sequence[float]) -> float:
    return float(statistics.fmean(xs)) if xs else 0.0


@dataclass
class Summary:
    instances: int
    success_rate: float
    avg_tokens: float
    mean_actions: float
    mean_subspace: float
    mean_cpu_seconds: float
    histogram: dict[str, int]


def _summarize(records: Sequence[RunRecord]) -> Summary:
    hist = Counter(r.result_class for r in records)
    m = len(records)
    return Summary(
        instances=m,
        success_rate=100.0 * hist["plan_success"] / m,
        avg_tokens=_mean([r.prompt_tokens for r in records]),
        mean_actions=_mean([r.n_actions for r in records]),
        mean_subspace=_mean([r.mean_subspace for r in records]),
        mean_cpu_seconds=_mean([r.cpu_seconds for r in records]),
        histogram={c: hist.get(c, 0) for c in RESULT_CLASSES},
    )


@dataclass
class Report:
    planner: str
    per_domain: dict[str, Summary]
    total: Summary  # weighted by instance count
    records: list[RunRecord]

    def to_dict(self, timing: bool = True) -> dict:
        def clean(d: dict) -> dict:
            if not timing:
                d = {k: v for k, v in d.items() if k not in ("mean_cpu_seconds", "cpu_seconds")}
            return d

        return {
            "planner": self.planner,
            "per_domain": {k: clean(asdict(v)) for k, v in self.per_domain.items()},
            "total": clean(asdict(self.total)),
            "records": [clean(asdict(r)) for r in self.records],
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def to_text(self, timing: bool = True) -> str:
        cols = ["domain", "n", "success%", "avg tokens", "|A|", "|A_i|"]
        if timing:
            cols.append("cpu s")
        rows = []
        for name, s in [*self.per_domain.items(), ("total (by count)", self.total)]:
            row = [name, str(s.instances), f"{s.success_rate:.2f}", f"{s.avg_tokens:.1f}",
                   f"{s.mean_actions:.2f}", f"{s.mean_subspace:.2f}"]
            if timing:
                row.append(f"{s.mean_cpu_seconds:.3f}")
            rows.append(row)
        widths = [max(len(c), *(len(r[i]) for r in rows)) for i, c in enumerate(cols)]
        fmt = "  ".join(f"{{:<{w}}}" if i == 0 else f"{{:>{w}}}" for i, w in enumerate(widths))
        lines = [f"planner: {self.planner}", fmt.format(*cols), fmt.format(*("-" * w for w in widths))]
        lines += [fmt.format(*r) for r in rows]
        lines.append("")
        lines.append("result classes: " + ", ".join(f"{k}={v}" for k, v in self.total.histogram.items()))
        return "\n".join(lines) + "\n"


def aggregate(records: Sequence[RunRecord], planner: str = "plahx") -> Report:
    if not records:
        raise EmptyInput("no run records to aggregate")
    by_kind: dict[str, list[RunRecord]] = {}
    for r in records:
        by_kind.setdefault(r.kind, []).append(r)
    return Report(
        planner=planner,
        per_domain={k: _summarize(v) for k, v in by_kind.items()},
        total=_summarize(records),
        records=list(records),
    )
