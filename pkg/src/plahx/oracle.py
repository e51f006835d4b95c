"""Brute-force reference procedures, independent of the search code.

These work on ``frozenset`` states through :func:`applicable`/:func:`apply`
only, so they can be used to certify instances and to cross-check the
planner and heuristic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .grounding import GroundedAction, GroundedTask, applicable, apply
from .pddl import Atom


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class BFSResult:
    length: int | None  # None: goal unreachable
    plan: tuple[int, ...] | None
    reachable: int  # states visited before stopping


def bfs_optimal(task: GroundedTask, max_states: int = 10**6) -> BFSResult:
    """Shortest plan by breadth-first search over the full grounded graph."""
    start = frozenset(task.init)
    parent: dict[frozenset, tuple[frozenset | None, int]] = {start: (None, -1)}
    frontier = deque([start])
    while frontier:
        s = frontier.popleft()
        if task.goal <= s:
            plan = []
            while parent[s][0] is not None:
                prev, a = parent[s]
                plan.append(a)
                s = prev
            return BFSResult(len(plan), tuple(reversed(plan)), len(parent))
        for a in task.actions:
            if applicable(s, a):
                t = apply(s, a)
                if t not in parent:
                    if len(parent) >= max_states:
                        raise OracleBudgetExceeded(f"more than {max_states} states")
                    parent[t] = (s, a.id)
                    frontier.append(t)
    return BFSResult(None, None, len(parent))


def count_reachable(task: GroundedTask, max_states: int = 10**6) -> int:
    start = frozenset(task.init)
    seen = {start}
    frontier = deque([start])
    while frontier:
        s = frontier.popleft()
        for a in task.actions:
            if applicable(s, a):
                t = apply(s, a)
                if t not in seen:
                    if len(seen) >= max_states:
                        raise OracleBudgetExceeded(f"more than {max_states} states")
                    seen.add(t)
                    frontier.append(t)
    return len(seen)


def relaxed_reachable(state: Iterable[Atom], actions: Iterable[GroundedAction]) -> frozenset[Atom]:
    """Fixpoint of facts reachable when delete effects are ignored."""
    facts = set(state)
    acts = list(actions)
    changed = True
    while changed:
        changed = False
        for a in acts:
            if a.pre <= facts and not a.add <= facts:
                facts |= a.add
                changed = True
    return frozenset(facts)


def relaxed_solvable(state: Iterable[Atom], goal: Iterable[Atom], actions: Iterable[GroundedAction]) -> bool:
    return frozenset(goal) <= relaxed_reachable(state, actions)
