"""Independent reference implementations the library is checked against."""

import random

from plahx.grounding import (
    GoalUnsatisfied,
    PreconditionConflict,
    PreconditionUnsupported,
    Success,
    applicable,
    apply,
)


def simulate(task, plan):
    """Naive step-by-step execution; returns ('ok'|'goal'|'pre', failing step or None, state)."""
    state = frozenset(task.init)
    for i, a_id in enumerate(plan):
        a = task.actions[a_id]
        if not applicable(state, a):
            return "pre", i, state
        state = apply(state, a)
    return ("ok" if task.goal <= state else "goal"), None, state


def agrees(task, plan, outcome):
    """Whether ``outcome`` matches simulation, including the deleter property for conflicts."""
    verdict, step, state = simulate(task, plan)
    if verdict == "ok":
        return isinstance(outcome, Success) and outcome.final_state == state
    if verdict == "goal":
        return isinstance(outcome, GoalUnsatisfied) and outcome.missing == task.goal - state
    if isinstance(outcome, PreconditionConflict):
        a_i, a_k = task.actions[plan[outcome.i]], task.actions[plan[outcome.k]]
        later = plan[outcome.k + 1 : outcome.i]
        return (
            outcome.i == step
            and outcome.k < outcome.i
            and outcome.atom in a_k.delete
            and outcome.atom in a_i.pre
            and outcome.atom not in state
            and all(outcome.atom not in task.actions[b].add for b in later)
        )
    if isinstance(outcome, PreconditionUnsupported):
        missing = task.actions[plan[step]].pre - state
        deleted = {x for b in plan[:step] for x in task.actions[b].delete}
        return outcome.i == step and outcome.atom in missing and not (missing & deleted)
    return False


def random_plan(task, rng: random.Random, max_len: int = 10):
    """Mostly-executable random walk, sometimes corrupted by a random action."""
    state = frozenset(task.init)
    plan = []
    for _ in range(rng.randint(0, max_len)):
        moves = [a.id for a in task.actions if applicable(state, a)]
        if not moves or rng.random() < 0.2:
            plan.append(rng.randrange(len(task.actions)))
            continue
        a_id = rng.choice(moves)
        plan.append(a_id)
        state = apply(state, task.actions[a_id])
    return plan
