import random
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plahx.bench.generate import KINDS, generate_instances
from plahx.grounding import Success, applicable, apply, ground, validate_plan
from plahx.oracle import bfs_optimal, relaxed_solvable
from plahx.pddl import Atom, parse_domain, parse_problem
from plahx.search import (
    INFINITY,
    GlobalBound,
    astar_subspace,
    ff_heuristic,
    relaxed_plan,
    update_global_bound,
)


def full(task):
    return range(len(task.actions))


def test_ff_examples(two_task):
    init = two_task.init
    assert ff_heuristic(init, {Atom("handempty", ())}, two_task.actions) == 0
    assert ff_heuristic(init, {Atom("holding", ("b1",))}, two_task.actions) == 1
    no_stack = [a for a in two_task.actions if a.schema != "stack"]
    assert ff_heuristic(init, {Atom("on", ("b1", "b2"))}, no_stack) == INFINITY


def test_ff_on_two_block_goal(two_task):
    # pick-up(b1) then stack(b1, b2)
    assert ff_heuristic(two_task.init, two_task.goal, two_task.actions) == 2


@pytest.mark.parametrize("current, candidate, expected", [(INFINITY, 7, 7), (5, 7, 5), (5, 3, 3)])
def test_update_global_bound(current, candidate, expected):
    assert update_global_bound(current, candidate) == expected


def test_global_bound_is_monotone_under_threads():
    bound = GlobalBound()
    values = list(range(200, 0, -1))
    random.Random(3).shuffle(values)

    def worker(chunk):
        for v in chunk:
            bound.offer(v)

    threads = [threading.Thread(target=worker, args=(values[i::4],)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert bound.value == 1
    assert all(a > b for a, b in zip(bound.history, bound.history[1:]))


def test_astar_full_space_matches_oracle(two_task):
    res = astar_subspace(two_task, full(two_task))
    assert len(res.plans[-1]) == bfs_optimal(two_task).length == 2
    assert isinstance(validate_plan(two_task, res.plans[-1]), Success)


def test_zero_bound_prunes_root(two_task):
    res = astar_subspace(two_task, full(two_task), bound=0)
    assert res.nodes_expanded == 0 and res.plans == []


def test_subspace_without_achiever(two_task):
    sub = [a.id for a in two_task.actions if a.schema != "stack"]
    res = astar_subspace(two_task, sub)
    assert res.plans == [] and res.h_init == INFINITY and res.nodes_expanded == 0


def test_budget_caps_expansions(two_task):
    res = astar_subspace(two_task, full(two_task), budget=1)
    assert res.nodes_expanded <= 1


def test_plans_found_get_strictly_shorter():
    inst = generate_instances("blocks", 1, seed=4)[0]
    d = parse_domain(inst.domain_pddl)
    task = ground(d, parse_problem(inst.problem_pddl, d))
    res = astar_subspace(task, full(task), bound=INFINITY)
    lengths = [len(p) for p in res.plans]
    assert lengths == sorted(set(lengths), reverse=True)
    assert lengths[-1] == inst.optimal_length


def test_frontier_candidate_when_budget_runs_out(two_task):
    res = astar_subspace(two_task, full(two_task), budget=1)
    assert res.plans == [] and res.nodes_expanded == 1
    # root's partial plan (empty) followed by its relaxed plan
    assert [two_task.actions[i].name for i in res.frontier] == ["(pick-up b1)", "(stack b1 b2)"]


def test_no_frontier_without_expansion(two_task):
    assert astar_subspace(two_task, full(two_task), bound=2).frontier is None


@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(KINDS), seed=st.integers(0, 300))
def test_no_state_expanded_twice_without_improvement(kind, seed):
    inst = generate_instances(kind, 1, seed=seed)[0]
    d = parse_domain(inst.domain_pddl)
    task = ground(d, parse_problem(inst.problem_pddl, d))
    res = astar_subspace(task, full(task), trace=True)
    best = {}
    for s, g in res.expansions:
        assert g < best.get(s, g + 1)
        best[s] = g
    assert len(res.plans[-1]) == inst.optimal_length


def _sample_triple(task, rng):
    state = frozenset(task.init)
    for _ in range(rng.randint(0, 6)):
        moves = [a for a in task.actions if applicable(state, a)]
        if not moves:
            break
        state = apply(state, rng.choice(moves))
    atoms = sorted(task.atoms)
    goal = frozenset(rng.sample(atoms, rng.randint(1, min(3, len(atoms)))))
    sub = [a for a in task.actions if rng.random() < rng.choice((0.3, 0.6, 1.0))]
    return state, goal, sub


@settings(max_examples=80, deadline=None)
@given(kind=st.sampled_from(KINDS), seed=st.integers(0, 300), r=st.integers(0, 2**32))
def test_ff_agrees_with_relaxed_oracle(kind, seed, r):
    inst = generate_instances(kind, 1, seed=seed)[0]
    d = parse_domain(inst.domain_pddl)
    task = ground(d, parse_problem(inst.problem_pddl, d))
    state, goal, sub = _sample_triple(task, random.Random(r))
    h = ff_heuristic(state, goal, sub)
    assert (h == 0) == (goal <= state)
    assert (h == INFINITY) == (not relaxed_solvable(state, goal, sub))
    if h not in (0, INFINITY):
        # the relaxed plan itself reaches the goal when deletes are ignored
        facts = set(state)
        m = task.mask
        plan = relaxed_plan(m(state), m(goal), sub)
        for a in plan:
            assert a.pre <= facts
            facts |= a.add
        assert goal <= facts and len(plan) == h
