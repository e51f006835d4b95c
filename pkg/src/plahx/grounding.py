"""Grounding, the STRIPS transition function, and plan validation.

Ground atoms are indexed per task so that states can be handled as integer
bitmasks inside the search code; the public functions here take and return
``frozenset`` states of :class:`~plahx.pddl.Atom`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .pddl import Atom, Domain, PDDLSyntaxError, Problem, parse_sexprs

State = frozenset  # frozenset[Atom]


class PreconditionViolated(ValueError):
    pass


class UnknownActionId(IndexError):
    pass


@dataclass(frozen=True, eq=False)
class GroundedAction:
    id: int
    schema: str
    binding: tuple[str, ...]
    pre: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]
    pre_mask: int = 0
    add_mask: int = 0
    del_mask: int = 0

    @property
    def name(self) -> str:
        return "(" + " ".join((self.schema, *self.binding)) + ")"

    def __repr__(self) -> str:
        return f"<{self.id}:{self.name}>"


@dataclass(frozen=True, eq=False)
class GroundedTask:
    domain_name: str
    problem_name: str
    objects: tuple[tuple[str, str], ...]
    actions: tuple[GroundedAction, ...]
    init: frozenset[Atom]
    goal: frozenset[Atom]
    atoms: tuple[Atom, ...]  # bit i of a mask <-> atoms[i]

    def __post_init__(self) -> None:
        object.__setattr__(self, "_atom_index", {a: i for i, a in enumerate(self.atoms)})
        object.__setattr__(self, "_by_name", {a.name: a for a in self.actions})

    def __len__(self) -> int:
        return len(self.actions)

    def mask(self, atoms: Iterable[Atom]) -> int:
        """Bitmask of ``atoms``; atoms unknown to the task are ignored."""
        idx = self._atom_index
        m = 0
        for a in atoms:
            i = idx.get(a)
            if i is not None:
                m |= 1 << i
        return m

    def unmask(self, mask: int) -> frozenset[Atom]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.atoms[i])
            mask >>= 1
            i += 1
        return frozenset(out)

    @property
    def init_mask(self) -> int:
        return self.mask(self.init)

    @property
    def goal_mask(self) -> int:
        return self.mask(self.goal)

    def action_by_name(self, name: str) -> GroundedAction:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownActionId(f"no grounded action {name}") from None


def _substitute(atoms: Sequence[Atom], sub: dict[str, str]) -> frozenset[Atom]:
    return frozenset(Atom(a.predicate, tuple(sub.get(x, x) for x in a.args)) for a in atoms)


def ground(domain: Domain, problem: Problem) -> GroundedTask:
    """Instantiate every schema with every type-consistent object binding.

    Index order is schema declaration order, then lexicographic binding.
    Repeated objects in a binding are kept (e.g. ``stack(b1, b1)``).
    """
    objects = sorted(problem.objects)
    raw: list[tuple[str, tuple[str, ...], frozenset, frozenset, frozenset]] = []
    for schema in domain.schemas:
        pools = [
            sorted(o for o, t in objects if domain.is_subtype(t, ptype)) for _, ptype in schema.params
        ]
        for binding in itertools.product(*pools):
            sub = {v: o for (v, _), o in zip(schema.params, binding)}
            pre = _substitute(schema.preconditions, sub)
            add = _substitute(schema.add_effects, sub)
            # Add wins on collision (delete-then-add semantics); keeps add and del disjoint.
            dele = _substitute(schema.del_effects, sub) - add
            raw.append((schema.name, tuple(binding), pre, add, dele))

    universe = set(problem.init) | set(problem.goal)
    for _, _, pre, add, dele in raw:
        universe |= pre | add | dele
    atoms = tuple(sorted(universe))
    index = {a: i for i, a in enumerate(atoms)}

    def m(xs: Iterable[Atom]) -> int:
        return sum(1 << index[x] for x in xs)

    actions = tuple(
        GroundedAction(i, name, binding, pre, add, dele, m(pre), m(add), m(dele))
        for i, (name, binding, pre, add, dele) in enumerate(raw)
    )
    return GroundedTask(
        domain_name=domain.name,
        problem_name=problem.name,
        objects=tuple(objects),
        actions=actions,
        init=frozenset(problem.init),
        goal=frozenset(problem.goal),
        atoms=atoms,
    )


def applicable(state: frozenset[Atom], a: GroundedAction) -> bool:
    return a.pre <= state


def apply(state: frozenset[Atom], a: GroundedAction) -> frozenset[Atom]:
    if not a.pre <= state:
        missing = sorted(map(str, a.pre - state))
        raise PreconditionViolated(f"{a.name} is not applicable: missing {', '.join(missing)}")
    return (state - a.delete) | a.add


def is_critical(a: GroundedAction, task: GroundedTask) -> bool:
    """Goal-contributing or executable in the initial state."""
    return bool(a.add & task.goal) or applicable(task.init, a)


def critical_actions(task: GroundedTask) -> list[int]:
    return [a.id for a in task.actions if is_critical(a, task)]


# ---------------------------------------------------------------------------
# validation outcomes


@dataclass(frozen=True)
class Success:
    final_state: frozenset[Atom]

    ok = True


@dataclass(frozen=True)
class GoalUnsatisfied:
    final_state: frozenset[Atom]
    missing: frozenset[Atom]

    ok = False


@dataclass(frozen=True)
class PreconditionConflict:
    """Step ``i`` cannot fire because step ``k`` (k < i) deleted ``atom``."""

    i: int
    k: int
    atom: Atom

    ok = False


@dataclass(frozen=True)
class PreconditionUnsupported:
    """Step ``i`` needs ``atom``, which no earlier step deleted (never held)."""

    i: int
    atom: Atom

    ok = False


ValidationOutcome = Union[Success, GoalUnsatisfied, PreconditionConflict, PreconditionUnsupported]


def validate_plan(task: GroundedTask, plan: Sequence[int]) -> ValidationOutcome:
    """Simulate ``plan`` (0-based action ids) from the initial state.

    On the first inapplicable step ``i`` the failure is blamed on the most
    recent earlier step that deleted one of its missing preconditions.
    """
    n = len(task.actions)
    for a_id in plan:
        if not 0 <= a_id < n:
            raise UnknownActionId(f"action id {a_id} out of range [0, {n})")
    state = frozenset(task.init)
    last_deleter: dict[Atom, int] = {}
    for i, a_id in enumerate(plan):
        a = task.actions[a_id]
        missing = a.pre - state
        if missing:
            blamed = [(last_deleter[x], x) for x in missing if x in last_deleter]
            if blamed:
                # largest k wins; ties broken by the smallest atom
                k, atom = min(blamed, key=lambda kx: (-kx[0], kx[1]))
                return PreconditionConflict(i, k, atom)
            return PreconditionUnsupported(i, min(missing))
        for x in a.delete:
            last_deleter[x] = i
        for x in a.add:
            last_deleter.pop(x, None)
        state = (state - a.delete) | a.add
    if task.goal <= state:
        return Success(state)
    return GoalUnsatisfied(state, task.goal - state)


# ---------------------------------------------------------------------------
# plan text: one "(schema obj ...)" per line


def format_plan(task: GroundedTask, plan: Sequence[int]) -> str:
    return "".join(task.actions[i].name + "\n" for i in plan)


def parse_plan(task: GroundedTask, text: str) -> list[int]:
    """Read a plan in the one-action-per-line format back into action ids."""
    out = []
    for expr in parse_sexprs(text):
        if isinstance(expr, str) or not expr or any(not isinstance(t, str) for t in expr):
            raise PDDLSyntaxError("plan steps must be flat '(action arg ...)' lists", getattr(expr, "line", None))
        out.append(task.action_by_name("(" + " ".join(expr) + ")").id)
    return out
