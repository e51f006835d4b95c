import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plahx.bench.generate import KINDS, generate_instances
from plahx.grounding import (
    GoalUnsatisfied,
    PreconditionConflict,
    PreconditionUnsupported,
    PreconditionViolated,
    Success,
    UnknownActionId,
    applicable,
    apply,
    format_plan,
    ground,
    is_critical,
    parse_plan,
    validate_plan,
)
from plahx.pddl import Atom, parse_domain, parse_problem

from oracles import agrees, random_plan


def act(task, name):
    return task.action_by_name(name)


def test_two_block_grounding_count(two_task):
    by_schema = {}
    for a in two_task.actions:
        by_schema[a.schema] = by_schema.get(a.schema, 0) + 1
    assert by_schema == {"pick-up": 2, "put-down": 2, "stack": 4, "unstack": 4}
    assert [a.id for a in two_task.actions] == list(range(12))


def test_grounding_is_deterministic(blocks, two_blocks, two_task):
    again = ground(blocks, two_blocks)
    assert [a.name for a in again.actions] == [a.name for a in two_task.actions]
    assert again.atoms == two_task.atoms


def test_no_objects_means_no_bindings(blocks):
    p = parse_problem("(define (problem e) (:domain blocks) (:objects) (:init (handempty)) (:goal (handempty)))", blocks)
    assert ground(blocks, p).actions == ()


def test_parameterless_schema_grounds_once():
    d = parse_domain("(define (domain tiny) (:predicates (lit)) (:action flip :parameters () :effect (lit)))")
    p = parse_problem("(define (problem z) (:domain tiny) (:init) (:goal (lit)))", d)
    t = ground(d, p)
    assert len(t.actions) == 1 and t.actions[0].name == "(flip)"


def test_applicable_and_apply(two_task):
    init = frozenset(two_task.init)
    pick = act(two_task, "(pick-up b1)")
    assert applicable(init, pick)
    after = apply(init, pick)
    assert Atom("holding", ("b1",)) in after and Atom("handempty", ()) not in after
    assert not applicable(after, pick)
    assert init == frozenset(two_task.init)  # input untouched
    assert apply(after, act(two_task, "(put-down b1)")) == init
    with pytest.raises(PreconditionViolated):
        apply(after, pick)


def test_identity_effect_and_empty_preconditions():
    d = parse_domain("(define (domain tiny) (:predicates (lit)) (:action noop :parameters () :effect (and)))")
    t = ground(d, parse_problem("(define (problem z) (:domain tiny) (:init (lit)) (:goal (lit)))", d))
    s = frozenset({Atom("lit", ())})
    assert applicable(frozenset(), t.actions[0])
    assert apply(s, t.actions[0]) == s


def test_add_wins_over_delete_on_collision(two_task):
    # stack(b1, b1) adds and deletes clear(b1); add must win
    a = act(two_task, "(stack b1 b1)")
    assert Atom("clear", ("b1",)) in a.add and Atom("clear", ("b1",)) not in a.delete


def test_validate_examples(blocks, two_task):
    p = two_task
    ids = lambda *names: [act(p, n).id for n in names]
    assert isinstance(validate_plan(p, ids("(pick-up b1)", "(stack b1 b2)")), Success)
    assert validate_plan(p, ids("(pick-up b1)", "(pick-up b2)")) == PreconditionConflict(1, 0, Atom("handempty", ()))
    assert isinstance(validate_plan(p, ids("(pick-up b1)")), GoalUnsatisfied)
    assert validate_plan(p, ids("(put-down b1)")) == PreconditionUnsupported(0, Atom("holding", ("b1",)))
    with pytest.raises(UnknownActionId):
        validate_plan(p, [12])
    trivial = parse_problem(
        "(define (problem t) (:domain blocks) (:objects b1 - block) (:init (handempty) (ontable b1) (clear b1)) (:goal (handempty)))",
        blocks,
    )
    assert isinstance(validate_plan(ground(blocks, trivial), []), Success)


def test_conflict_blames_most_recent_deleter(two_task):
    ids = lambda *names: [act(two_task, n).id for n in names]
    # ontable(b1) was last deleted at step 0; clear(b2) at step 1
    assert validate_plan(two_task, ids("(pick-up b1)", "(stack b1 b2)", "(pick-up b1)")) == PreconditionConflict(
        2, 0, Atom("ontable", ("b1",))
    )
    assert validate_plan(two_task, ids("(pick-up b1)", "(stack b1 b2)", "(pick-up b2)")) == PreconditionConflict(
        2, 1, Atom("clear", ("b2",))
    )
    # three atoms missing, one deleter: the smallest atom is reported
    assert validate_plan(two_task, ids("(pick-up b1)", "(pick-up b1)")) == PreconditionConflict(
        1, 0, Atom("clear", ("b1",))
    )


def test_is_critical(two_task):
    assert is_critical(act(two_task, "(stack b1 b2)"), two_task)
    assert is_critical(act(two_task, "(pick-up b1)"), two_task)
    assert not is_critical(act(two_task, "(put-down b1)"), two_task)


def test_plan_text_round_trip(two_task):
    plan = [act(two_task, "(pick-up b1)").id, act(two_task, "(stack b1 b2)").id]
    text = format_plan(two_task, plan)
    assert text == "(pick-up b1)\n(stack b1 b2)\n"
    assert parse_plan(two_task, "; comment\n" + text.upper()) == plan


@settings(max_examples=60, deadline=None)
@given(kind=st.sampled_from(KINDS), seed=st.integers(0, 500), walk=st.integers(0, 2**32))
def test_validator_matches_simulation(kind, seed, walk):
    inst = generate_instances(kind, 1, seed=seed)[0]
    d = parse_domain(inst.domain_pddl)
    task = ground(d, parse_problem(inst.problem_pddl, d))
    plan = random_plan(task, random.Random(walk))
    assert agrees(task, plan, validate_plan(task, plan))
