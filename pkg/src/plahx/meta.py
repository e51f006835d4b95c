"""Population search over grounded action subspaces.

Each individual is a variable-length sequence of distinct action ids; the
set of its genes is the subspace its local A* search may use. Generations
alternate a local phase (bounded A* per individual, validation, archiving,
conflict recording) with a global phase (compatibility-weighted union
crossover and mutation). Critical actions are kept in every individual.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

from .grounding import (
    GroundedTask,
    PreconditionConflict,
    Success,
    ValidationOutcome,
    critical_actions,
    validate_plan,
)
from .search import INFINITY, GlobalBound, LocalResult, astar_subspace

Individual = tuple  # tuple[int, ...] of distinct action ids


@dataclass
class SearchConfig:
    pop_size: int = 20
    l_max: int | None = None  # None: floor(|A| / 2)
    max_iters: int = 100
    archive_threshold: int = 2
    tau: float = 200.0
    lower_bound: float = 0.1
    w_init: float = 1.0
    budget: int = 10_000  # A* expansions per individual per generation
    seed: int = 0
    workers: int = 1  # 1: strictly single-threaded

    def __post_init__(self) -> None:
        if self.pop_size < 1 or self.max_iters < 1 or self.archive_threshold < 1:
            raise ValueError("pop_size, max_iters and archive_threshold must be >= 1")
        if not 0 < self.lower_bound <= self.w_init:
            raise ValueError("need 0 < lower_bound <= w_init")
        if self.tau <= 1:
            raise ValueError("tau must exceed 1")


def rho_schedule(m: int) -> float:
    """Penalty magnitude at iteration ``m``."""
    return 0.1 * math.exp(-0.025 * m)


def mutation_rate(m: int, max_iters: int) -> float:
    return 0.05 + (max_iters - m) / (10 * max_iters)


def length_bounds(n_actions: int, l_max: int | None = None) -> tuple[int, int]:
    """Clamped individual length range ``[lo, hi]`` for a task with ``n_actions``."""
    lo = min(3, n_actions)
    cap = n_actions // 2 if l_max is None else l_max
    hi = min(n_actions, max(lo, cap))
    return lo, hi


class ConflictRecorder:
    """Symmetric pairwise compatibility weights and conflict counts."""

    def __init__(self, n_actions: int, w_init: float = 1.0, tau: float = 200.0, lower_bound: float = 0.1):
        self.n = n_actions
        self.w_init = w_init
        self.tau = tau
        self.lower_bound = lower_bound
        self.weights = np.full((n_actions, n_actions), w_init, dtype=float)
        self.counts = np.zeros((n_actions, n_actions), dtype=np.int64)

    def w(self, a: int, b: int) -> float:
        return float(self.weights[a, b])

    def eps(self, a: int, b: int) -> int:
        return int(self.counts[a, b])

    def penalize(self, i: int, k: int, m: int) -> "ConflictRecorder":
        if i == k:
            raise ValueError("cannot penalize an action against itself")
        eps = self.counts[i, k] + 1
        self.counts[i, k] = self.counts[k, i] = eps
        # the update is singular at eps == tau
        denom = self.tau - min(eps, self.tau - 1)
        new = max(self.weights[i, k] - rho_schedule(m) * self.tau / denom, self.lower_bound)
        self.weights[i, k] = self.weights[k, i] = new
        return self

    def off_diagonal(self) -> np.ndarray:
        return self.weights[~np.eye(self.n, dtype=bool)]


def compatibility_weight(a: int, C: Iterable[int], recorder: ConflictRecorder) -> float:
    others = [c for c in C if c != a]
    if not others:
        return 0.0
    return float(recorder.weights[a, others].sum())


def _omegas(C: Sequence[int], recorder: ConflictRecorder) -> np.ndarray:
    idx = np.asarray(C, dtype=np.intp)
    sub = recorder.weights[np.ix_(idx, idx)]
    return sub.sum(axis=1) - np.diag(sub)


def sampling_distribution(C: Iterable[int], recorder: ConflictRecorder) -> dict[int, float]:
    C = sorted(set(C))
    if not C:
        raise ValueError("empty candidate set")
    omega = _omegas(C, recorder)
    total = omega.sum()
    if total <= 0:
        return {a: 1.0 / len(C) for a in C}
    return {a: float(o / total) for a, o in zip(C, omega)}


def _weighted_index(weights: np.ndarray, rng: np.random.Generator) -> int:
    total = weights.sum()
    u = rng.random()
    if total <= 0:
        return min(int(u * len(weights)), len(weights) - 1)
    cum = np.cumsum(weights)
    return min(int(np.searchsorted(cum, u * total, side="right")), len(weights) - 1)


def sample_without_replacement(
    C: Iterable[int], recorder: ConflictRecorder, k: int, rng: np.random.Generator
) -> list[int]:
    """Draw ``k`` actions one at a time, renormalizing over the rest after each draw."""
    pool = sorted(set(C))
    weights = _omegas(pool, recorder) if pool else np.zeros(0)
    out = []
    for _ in range(min(k, len(pool))):
        j = _weighted_index(weights, rng)
        out.append(pool.pop(j))
        weights = np.delete(weights, j)
    return out


def init_population(task: GroundedTask, config: SearchConfig, rng: np.random.Generator) -> list[Individual]:
    n = len(task.actions)
    if n < 1:
        raise ValueError("task has no grounded actions")
    crit = critical_actions(task)
    lo, hi = length_bounds(n, config.l_max)
    lo_eff, cap = max(lo, len(crit)), max(hi, len(crit))
    crit_set = set(crit)
    fillers = np.array([a for a in range(n) if a not in crit_set], dtype=np.int64)
    pop = []
    for _ in range(config.pop_size):
        length = int(rng.integers(lo_eff, cap + 1))
        extra = min(length - len(crit), len(fillers))
        picked = rng.choice(fillers, size=extra, replace=False) if extra > 0 else []
        pop.append(tuple(crit) + tuple(int(a) for a in picked))
    return pop


def crossover(
    xi: Individual,
    xj: Individual,
    recorder: ConflictRecorder,
    rng: np.random.Generator,
    critical: Sequence[int] = (),
    cap: int | None = None,
) -> Individual:
    """Union the parents' subspaces and resample ``k`` actions from it.

    ``k`` is uniform between the parents' lengths. Critical actions dropped by
    the draw are re-inserted; if that overflows ``cap`` the most recently drawn
    non-critical genes are trimmed.
    """
    union = sorted(set(xi) | set(xj))
    lo, hi = sorted((len(xi), len(xj)))
    k = min(int(rng.integers(lo, hi + 1)), len(union))
    genes = sample_without_replacement(union, recorder, k, rng)
    have = set(genes)
    genes += [c for c in critical if c not in have]
    if cap is not None and len(genes) > cap:
        crit = set(critical)
        for pos in range(len(genes) - 1, -1, -1):
            if len(genes) <= cap:
                break
            if genes[pos] not in crit:
                del genes[pos]
    return tuple(genes)


def mutate(
    x: Individual,
    n_actions: int,
    C: Iterable[int],
    recorder: ConflictRecorder,
    p_mut: float,
    rng: np.random.Generator,
    cap: int | None = None,
) -> Individual:
    """With probability ``p_mut`` append one action from outside ``C``.

    Candidates are weighted by their compatibility with the genes of ``x``.
    """
    fire = rng.random() < p_mut
    if not fire or (cap is not None and len(x) >= cap):
        return x
    excluded = set(C)
    cands = np.array([a for a in range(n_actions) if a not in excluded], dtype=np.intp)
    if cands.size == 0:
        return x
    if x:
        weights = recorder.weights[np.ix_(cands, np.asarray(x, dtype=np.intp))].sum(axis=1)
    else:
        weights = np.zeros(cands.size)
    return tuple(x) + (int(cands[_weighted_index(weights, rng)]),)


# ---------------------------------------------------------------------------
# archive and run


@dataclass(frozen=True)
class ArchivedPlan:
    plan: tuple[int, ...]
    f: float
    generation: int


class PlanArchive:
    """Validated plans, deduplicated by exact action sequence."""

    def __init__(self, task: GroundedTask):
        self.task = task
        self.entries: list[ArchivedPlan] = []
        self._seen: set[tuple[int, ...]] = set()

    def __len__(self) -> int:
        return len(self.entries)

    def offer(self, plan: Sequence[int], generation: int) -> ValidationOutcome:
        """Validate ``plan`` and archive it on success."""
        outcome = validate_plan(self.task, plan)
        key = tuple(plan)
        if isinstance(outcome, Success) and key not in self._seen:
            self._seen.add(key)
            self.entries.append(ArchivedPlan(key, float(len(key)), generation))
        return outcome

    def best(self) -> ArchivedPlan | None:
        if not self.entries:
            return None
        # min() keeps the earliest entry among equal f
        return min(self.entries, key=lambda e: e.f)


@dataclass
class RunMetrics:
    generations: int = 0
    n_actions: int = 0
    n_critical: int = 0
    nodes_expanded: int = 0
    conflicts: int = 0
    mean_subspace: float = 0.0
    max_subspace: int = 0
    f_global_history: list[float] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)
    wall_seconds: float = 0.0


@dataclass
class PlanResult:
    plan: tuple[int, ...] | None
    archive: list[ArchivedPlan]
    metrics: RunMetrics

    @property
    def found(self) -> bool:
        return self.plan is not None


def _json_num(x: float) -> float | None:
    return None if x == INFINITY else x


class _Invariants:
    """Records (rather than raises) violations of the search invariants."""

    def __init__(self, task: GroundedTask, crit: Sequence[int], lo: int, cap: int, recorder: ConflictRecorder):
        self.task = task
        self.crit = set(crit)
        self.lo, self.cap = lo, cap
        self.recorder = recorder
        self.violations: list[str] = []
        self.last_bound = INFINITY

    def population(self, m: int, pop: Sequence[Individual]) -> None:
        for i, x in enumerate(pop):
            if len(set(x)) != len(x):
                self.violations.append(f"gen {m}: individual {i} has repeated genes")
            if not self.crit <= set(x):
                self.violations.append(f"gen {m}: individual {i} lost critical actions")
            if not self.lo <= len(x) <= self.cap:
                self.violations.append(f"gen {m}: individual {i} length {len(x)} outside [{self.lo}, {self.cap}]")

    def weights(self, m: int) -> None:
        r = self.recorder
        if r.n < 2:
            return
        w = r.off_diagonal()
        if w.min() < r.lower_bound - 1e-12 or w.max() > r.w_init + 1e-12:
            self.violations.append(f"gen {m}: weight outside [{r.lower_bound}, {r.w_init}]")
        if not np.array_equal(r.weights, r.weights.T):
            self.violations.append(f"gen {m}: weights not symmetric")

    def bound(self, m: int, value: float) -> None:
        if value > self.last_bound:
            self.violations.append(f"gen {m}: f_global increased {self.last_bound} -> {value}")
        self.last_bound = value

    def archive(self, archive: PlanArchive) -> None:
        for e in archive.entries:
            if not isinstance(validate_plan(self.task, e.plan), Success):
                self.violations.append(f"archived plan {e.plan} does not validate")


def run(task: GroundedTask, config: SearchConfig | None = None, log: IO[str] | None = None) -> PlanResult:
    """Run the population search; ``log`` receives one JSON line per generation."""
    config = config or SearchConfig()
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    n = len(task.actions)
    metrics = RunMetrics(n_actions=n)
    archive = PlanArchive(task)

    if n == 0:
        # only the empty plan is possible
        archive.offer((), 0)
        best = archive.best()
        metrics.wall_seconds = time.perf_counter() - start
        return PlanResult(best.plan if best else None, list(archive.entries), metrics)

    recorder = ConflictRecorder(n, config.w_init, config.tau, config.lower_bound)
    crit = critical_actions(task)
    metrics.n_critical = len(crit)
    lo, hi = length_bounds(n, config.l_max)
    cap = max(hi, len(crit))
    checks = _Invariants(task, crit, lo, cap, recorder)
    bound = GlobalBound()
    pop = init_population(task, config, rng)
    checks.population(0, pop)
    subspace_sizes: list[int] = []
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None

    try:
        for m in range(config.max_iters):
            snapshot = bound.value

            def local(genes: Individual) -> LocalResult:
                return astar_subspace(task, genes, snapshot, config.budget)

            results = list(pool.map(local, pop)) if pool else [local(x) for x in pop]

            # barrier: archive, bound and recorder updates in individual order
            conflicts: list[tuple[int, int]] = []
            for res in results:
                metrics.nodes_expanded += res.nodes_expanded
                candidates = list(res.plans)
                if res.frontier is not None and len(res.frontier) < snapshot:
                    candidates.append(res.frontier)
                for plan in candidates:
                    outcome = archive.offer(plan, m)
                    if isinstance(outcome, Success):
                        bound.offer(len(plan))
                    elif isinstance(outcome, PreconditionConflict):
                        a_i, a_k = plan[outcome.i], plan[outcome.k]
                        if a_i != a_k:
                            conflicts.append((a_i, a_k))
            for a_i, a_k in conflicts:
                recorder.penalize(a_i, a_k, m)
            metrics.conflicts += len(conflicts)
            subspace_sizes.extend(len(x) for x in pop)
            metrics.generations = m + 1
            metrics.f_global_history.append(bound.value)
            checks.bound(m, bound.value)
            checks.weights(m)

            if log is not None:
                log.write(
                    json.dumps(
                        {
                            "m": m,
                            "f_global": _json_num(bound.value),
                            "archive": len(archive),
                            "lengths": [len(x) for x in pop],
                            "nodes_expanded": [r.nodes_expanded for r in results],
                        }
                    )
                    + "\n"
                )

            if len(archive) >= config.archive_threshold:
                break

            p_mut = mutation_rate(m, config.max_iters)
            offspring = []
            for i, x in enumerate(pop):
                if len(pop) > 1:
                    j = int(rng.integers(len(pop) - 1))
                    j += j >= i
                else:
                    j = i
                union = set(x) | set(pop[j])
                child = crossover(x, pop[j], recorder, rng, crit, cap)
                child = mutate(child, n, union, recorder, p_mut, rng, cap)
                offspring.append(child)
            pop = offspring
            checks.population(m + 1, pop)
    finally:
        if pool:
            pool.shutdown()

    checks.archive(archive)
    metrics.violations = checks.violations
    metrics.mean_subspace = float(np.mean(subspace_sizes)) if subspace_sizes else 0.0
    metrics.max_subspace = max(subspace_sizes, default=0)
    metrics.wall_seconds = time.perf_counter() - start
    best = archive.best()
    return PlanResult(best.plan if best else None, list(archive.entries), metrics)


def result_to_dict(result: PlanResult) -> dict:
    d = asdict(result.metrics)
    d["f_global_history"] = [_json_num(x) for x in d["f_global_history"]]
    return {
        "plan": list(result.plan) if result.plan is not None else None,
        "archive": [{"plan": list(e.plan), "f": e.f, "generation": e.generation} for e in result.archive],
        "metrics": d,
    }
