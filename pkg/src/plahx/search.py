"""FF heuristic and bound-pruned A* over an action subspace.

States are integer bitmasks over ``task.atoms``. Costs are unit, so ``g`` is
the plan length, and a goal node's ``f`` equals its length.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .grounding import GroundedAction, GroundedTask
from .pddl import Atom

INFINITY = math.inf


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low
        mask ^= low


def relaxed_plan(state: int, goal: int, actions: Sequence[GroundedAction]) -> list[GroundedAction] | None:
    """Relaxed plan under delete relaxation, or ``None`` if the goal is unreachable.

    Builds the relaxed planning graph to a fixpoint, then extracts backwards,
    picking for each subgoal the lowest-id achiever from the layer just below
    the subgoal's first layer. The result is ordered by layer, then id.
    """
    if not goal & ~state:
        return []
    layers = [state]  # layers[t]: facts reachable within t steps
    by_layer: list[list[GroundedAction]] = []
    reached = state
    pending = sorted(actions, key=lambda a: a.id)
    while goal & ~reached:
        fired, rest = [], []
        new = reached
        for a in pending:
            if a.pre_mask & ~reached:
                rest.append(a)
            else:
                fired.append(a)
                new |= a.add_mask
        if new == reached:
            return None
        by_layer.append(fired)
        layers.append(new)
        reached = new
        pending = rest

    def layer_of(bit: int) -> int:
        for t, m in enumerate(layers):
            if m & bit:
                return t
        raise AssertionError("fact outside the fixpoint")

    top = len(layers) - 1
    goals_at = [0] * (top + 1)
    for bit in _bits(goal):
        goals_at[layer_of(bit)] |= bit
    true_at = [0] * (top + 1)
    chosen: list[tuple[int, GroundedAction]] = []
    for t in range(top, 0, -1):
        for bit in _bits(goals_at[t]):
            if true_at[t] & bit:
                continue
            a = next(x for x in by_layer[t - 1] if x.add_mask & bit)
            chosen.append((t - 1, a))
            for p in _bits(a.pre_mask):
                lp = layer_of(p)
                if lp > 0 and not true_at[t - 1] & p:
                    goals_at[lp] |= p
            true_at[t] |= a.add_mask
            true_at[t - 1] |= a.add_mask
    chosen.sort(key=lambda la: (la[0], la[1].id))
    return [a for _, a in chosen]


def ff_value(state: int, goal: int, actions: Sequence[GroundedAction]) -> float:
    plan = relaxed_plan(state, goal, actions)
    return INFINITY if plan is None else len(plan)


def ff_heuristic(state: Iterable[Atom], goal: Iterable[Atom], actions: Sequence[GroundedAction]) -> float:
    """FF estimate for atom-set ``state``: relaxed plan length, or ``INFINITY``."""
    state, goal = frozenset(state), frozenset(goal)
    universe = sorted(state | goal | {x for a in actions for x in a.pre | a.add | a.delete})
    index = {x: i for i, x in enumerate(universe)}

    def m(xs) -> int:
        return sum(1 << index[x] for x in xs)

    local = [
        GroundedAction(a.id, a.schema, a.binding, a.pre, a.add, a.delete, m(a.pre), m(a.add), m(a.delete))
        for a in actions
    ]
    return ff_value(m(state), m(goal), local)


def update_global_bound(current: float, candidate: float) -> float:
    return min(current, candidate)


class GlobalBound:
    """Shared incumbent cost with atomic-min updates."""

    def __init__(self, value: float = INFINITY):
        self._lock = threading.Lock()
        self._value = value
        self.history = [value]

    @property
    def value(self) -> float:
        return self._value

    def offer(self, candidate: float) -> float:
        with self._lock:
            new = update_global_bound(self._value, candidate)
            if new != self._value:
                self._value = new
                self.history.append(new)
            return new


@dataclass
class LocalResult:
    plans: list[list[int]] = field(default_factory=list)
    nodes_expanded: int = 0
    best_f: float = INFINITY
    h_init: float = INFINITY
    # partial plan of the most promising node followed by its relaxed plan;
    # only filled when no goal was reached
    frontier: list[int] | None = None
    expansions: list[tuple[int, int]] | None = None  # (state, g), when traced


def astar_subspace(
    task: GroundedTask,
    subspace: Iterable[int],
    bound: float = INFINITY,
    budget: int = 10_000,
    *,
    trace: bool = False,
) -> LocalResult:
    """A* restricted to the actions in ``subspace``.

    A node is expanded only if ``f < bound``; each plan found tightens the
    local bound to its length, so later plans are strictly shorter. The search
    runs until the open list is empty or ``budget`` expansions were made.
    """
    acts = [task.actions[i] for i in sorted(set(subspace))]
    goal = task.goal_mask
    init = task.init_mask
    h_cache: dict[int, float] = {}

    def h(s: int) -> float:
        v = h_cache.get(s)
        if v is None:
            v = h_cache[s] = ff_value(s, goal, acts)
        return v

    result = LocalResult(expansions=[] if trace else None)
    h0 = h(init)
    result.h_init = h0
    local_bound = bound
    if h0 == INFINITY:
        return result

    # nodes[i] = (parent index, action id)
    nodes: list[tuple[int, int]] = [(-1, -1)]
    best_g: dict[int, int] = {init: 0}
    counter = 0
    open_list = [(h0, h0, counter, init, 0, 0)]
    frontier_key = None
    frontier_node = None

    def path(idx: int) -> list[int]:
        out = []
        while idx > 0:
            parent, a_id = nodes[idx]
            out.append(a_id)
            idx = parent
        out.reverse()
        return out

    while open_list:
        f, hv, _, s, g, idx = heapq.heappop(open_list)
        if g > best_g[s] or not f < local_bound:
            continue
        if hv == 0:
            plan = path(idx)
            result.plans.append(plan)
            local_bound = f
            result.best_f = f
            continue
        if result.nodes_expanded >= budget:
            break
        result.nodes_expanded += 1
        if trace:
            result.expansions.append((s, g))
        key = (hv, g)
        if frontier_key is None or key < frontier_key:
            frontier_key, frontier_node = key, (idx, s)
        g2 = g + 1
        for a in acts:
            if a.pre_mask & ~s:
                continue
            s2 = (s & ~a.del_mask) | a.add_mask
            if g2 >= best_g.get(s2, g2 + 1):
                continue
            h2 = h(s2)
            f2 = g2 + h2
            if not f2 < local_bound:
                continue
            best_g[s2] = g2
            nodes.append((idx, a.id))
            counter += 1
            heapq.heappush(open_list, (f2, h2, counter, s2, g2, len(nodes) - 1))

    if not result.plans and frontier_node is not None:
        idx, s = frontier_node
        rp = relaxed_plan(s, goal, acts) or []
        result.frontier = path(idx) + [a.id for a in rp]
    return result
