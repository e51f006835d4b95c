"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Expected numeric values in criterion 4 were computed once by hand from the
closed-form definitions and are frozen here as literals.
"""

import math
import random
import statistics
import time

import pytest

from plahx.bench.generate import KINDS, generate_instances
from plahx.bench.pipeline import run_instance, run_suite
from plahx.bench.report import baseline_plan, compute_pscr
from plahx.grounding import ground, validate_plan
from plahx.meta import (
    ConflictRecorder,
    SearchConfig,
    compatibility_weight,
    mutation_rate,
    rho_schedule,
    sampling_distribution,
)
from plahx.oracle import OracleBudgetExceeded, bfs_optimal, count_reachable, relaxed_solvable
from plahx.pddl import parse_domain, parse_problem
from plahx.search import INFINITY, ff_heuristic

from oracles import agrees, random_plan

SEEDS = range(5)
PER_DOMAIN = 25  # Blocks + Rearrangement = 50 instances per seed

_violations: list[str] = []


def verdict(n: int, ok: bool, detail: str) -> None:
    print(f"\nAC{n:<2} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _task(inst):
    d = parse_domain(inst.domain_pddl)
    return ground(d, parse_problem(inst.problem_pddl, d))


@pytest.fixture(scope="module")
def e2e():
    """Full search on Blocks and Rearrangement, 5 seeds, oracle length <= 8."""
    out = {}
    for seed in SEEDS:
        start = time.perf_counter()
        records = []
        for kind in ("blocks", "rearrangement"):
            for inst in generate_instances(kind, PER_DOMAIN, seed=seed, max_length=8):
                records.append((inst, run_instance(inst, search_config=SearchConfig(seed=seed))))
        out[seed] = (records, time.perf_counter() - start)
        _violations.extend(v for _, r in records for v in r.violations)
    return out


def test_ac1_validator_matches_simulation():
    start = time.perf_counter()
    rng = random.Random(2024)
    checked = agreed = 0
    for kind in KINDS:
        for inst in generate_instances(kind, 25, seed=101):
            task = _task(inst)
            for _ in range(12):
                plan = random_plan(task, rng, max_len=12)
                checked += 1
                agreed += agrees(task, plan, validate_plan(task, plan))
    elapsed = time.perf_counter() - start
    verdict(1, checked >= 1000 and agreed == checked and elapsed < 60,
            f"{agreed}/{checked} plans agree with simulation in {elapsed:.1f}s")


def test_ac2_astar_is_optimal():
    start = time.perf_counter()
    total = matched = 0
    for kind in KINDS:
        for inst in generate_instances(kind, 60, seed=202, max_length=8):
            task = _task(inst)
            try:
                if count_reachable(task, max_states=10**4) > 10**4:
                    continue
            except OracleBudgetExceeded:
                continue
            total += 1
            plan = baseline_plan(task).plan
            matched += plan is not None and len(plan) == bfs_optimal(task).length
    elapsed = time.perf_counter() - start
    verdict(2, total >= 200 and matched == total and elapsed < 300,
            f"{matched}/{total} optimal lengths match BFS in {elapsed:.1f}s")


def test_ac3_ff_soundness():
    rng = random.Random(303)
    total = ok = 0
    for kind in KINDS:
        for inst in generate_instances(kind, 25, seed=303):
            task = _task(inst)
            atoms = sorted(task.atoms)
            for _ in range(6):
                state = frozenset(task.init)
                for _ in range(rng.randint(0, 5)):
                    moves = [a for a in task.actions if a.pre <= state]
                    a = rng.choice(moves)
                    state = (state - a.delete) | a.add
                goal = frozenset(rng.sample(atoms, rng.randint(1, 3)))
                keep = rng.choice((0.25, 0.5, 1.0))
                sub = [a for a in task.actions if rng.random() < keep]
                h = ff_heuristic(state, goal, sub)
                total += 1
                ok += ((h == 0) == (goal <= state)) and ((h == INFINITY) == (not relaxed_solvable(state, goal, sub)))
    verdict(3, total >= 500 and ok == total, f"{ok}/{total} (state, goal, subspace) triples sound")


def test_ac4_formula_fidelity():
    rel = 1e-9
    checks = []

    def close(got, want):
        checks.append(math.isclose(got, want, rel_tol=rel))

    r = ConflictRecorder(3).penalize(0, 1, 0)
    close(r.w(0, 1), 179 / 199)  # 1 - 0.1 * 200 / 199
    low = ConflictRecorder(2)
    low.weights[:] = 0.15
    close(low.penalize(0, 1, 0).w(0, 1), 0.1)
    edge = ConflictRecorder(2)
    edge.counts[:] = 198
    close(edge.penalize(0, 1, 0).w(0, 1), 0.1)
    close(rho_schedule(0), 0.1)
    close(rho_schedule(40), 0.036787944117144235)  # 0.1 / e
    close(mutation_rate(0, 100), 0.15)
    close(mutation_rate(100, 100), 0.05)
    fresh = ConflictRecorder(3)
    close(compatibility_weight(0, [0, 1, 2], fresh), 2.0)
    w = ConflictRecorder(3)
    w.weights[0, 1] = w.weights[1, 0] = 0.1
    for a, want in zip(range(3), (1.1, 1.1, 2.0)):
        close(compatibility_weight(a, [0, 1, 2], w), want)
    checks.append(compatibility_weight(0, [0], w) == 0.0)
    for a, want in zip(range(3), (11 / 42, 11 / 42, 20 / 42)):
        close(sampling_distribution([0, 1, 2], w)[a], want)
    close(sampling_distribution([0, 1, 2], fresh)[1], 1 / 3)
    close(sampling_distribution([2], w)[2], 1.0)
    close(compute_pscr(20, 4, 4), 1.25)
    close(compute_pscr(22.6, 20, 8.27), 0.13663845223700125)
    close(compute_pscr(9, 1, 9), 1.0)
    verdict(4, all(checks), f"{sum(checks)}/{len(checks)} worked values within 1e-9 relative")


def test_ac5_end_to_end_success(e2e):
    rates, slowest, revalid = [], 0.0, True
    for seed, (records, elapsed) in e2e.items():
        wins = [(inst, r) for inst, r in records if r.result_class == "plan_success"]
        rates.append(len(wins) / len(records))
        slowest = max(slowest, elapsed)
        for inst, r in wins:
            task = _task(inst)
            ids = [task.action_by_name(n).id for n in r.plan]
            revalid &= validate_plan(task, ids).ok and len(ids) >= inst.optimal_length
    mean = statistics.fmean(rates)
    verdict(5, mean >= 0.95 and revalid and slowest < 600,
            f"success {100 * mean:.1f}% over {len(rates)} seeds (per seed: "
            + ", ".join(f"{100 * x:.0f}%" for x in rates)
            + f"); plans revalidate: {revalid}; slowest 50-instance batch {slowest:.1f}s")


def test_ac6_subspace_compression(e2e):
    blocks = [r for records, _ in e2e.values() for inst, r in records if r.kind == "blocks"]
    mean_sub = statistics.fmean(r.mean_subspace for r in blocks)
    mean_all = statistics.fmean(r.n_actions for r in blocks)
    ratio = mean_sub / mean_all
    verdict(6, ratio <= 0.5, f"Blocks mean |A_i| {mean_sub:.2f} / mean |A| {mean_all:.2f} = {ratio:.3f}")


def test_ac7_token_economy():
    pairs = []
    for kind in KINDS:
        for seed in (0, 1):
            for inst in generate_instances(kind, 25, seed=seed):
                r = run_instance(inst, search_config=SearchConfig(max_iters=1))
                pairs.append((r.prompt_tokens, r.full_prompt_tokens))
    strict = all(a < f for a, f in pairs)
    median = statistics.median(1 - a / f for a, f in pairs)
    verdict(7, strict and median >= 0.05,
            f"{sum(a < f for a, f in pairs)}/{len(pairs)} prompts shorter; median reduction {100 * median:.1f}%")


def test_ac8_determinism():
    cfg = SearchConfig(seed=7, workers=1)
    a = run_suite(KINDS, 3, seed=7, search_config=cfg)
    b = run_suite(KINDS, 3, seed=7, search_config=cfg)
    _violations.extend(v for rep in (a, b) for r in rep.records for v in r.violations)
    same_bytes = a.to_json(timing=False) == b.to_json(timing=False)
    same_plans = [r.plan for r in a.records] == [r.plan for r in b.records]
    verdict(8, same_bytes and same_plans, f"reports byte-identical: {same_bytes}; plans identical: {same_plans}")


def test_ac9_blocks_runtime(e2e):
    times = [r.cpu_seconds for records, _ in e2e.values() for _, r in records if r.kind == "blocks"]
    med = statistics.median(times)
    verdict(9, med <= 5.0, f"median Blocks solve {med:.3f}s over {len(times)} runs (max {max(times):.2f}s)")


def test_ac10_invariants(e2e):
    # runs after the other bench criteria in file order and covers their runs too
    runs = sum(len(records) for records, _ in e2e.values())
    verdict(10, not _violations, f"{len(_violations)} invariant violations across {runs}+ bench runs"
            + (f"; first: {_violations[0]}" if _violations else ""))
