"""Random benchmark instances, each certified solvable by breadth-first search.

Every instance carries its natural-language instruction, the gold problem
file, and the gold abstraction (objects, init and goal blocks) that a perfect
translator would return for that instruction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from ..grounding import ground
from ..oracle import OracleBudgetExceeded, bfs_optimal
from ..pddl import Atom, build_problem, parse_domain, serialize_problem
from ..translator import abstraction_text
from .domains import DOMAINS

KINDS = tuple(DOMAINS)

# inclusive plan-length ranges per suite
PLAN_LENGTHS = {
    "blocks": (2, 12),
    "hanoi": (1, 3),
    "grippers": (4, 8),
    "rearrangement": (2, 4),
}

DEFAULT_SIZES = {
    "blocks": (2, 4),  # blocks
    "hanoi": (1, 3),  # disks (always 3 rods)
    "grippers": (1, 2),  # boxes (2-3 rooms)
    "rearrangement": (2, 4),  # blocks (2-3 bowls)
}

COLORS = ["rose", "blue", "gray", "green", "orange", "yellow", "purple", "red", "brown", "white"]


class GenerationFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class TaskInstance:
    id: str
    kind: str
    instruction: str
    domain_pddl: str
    problem_pddl: str
    abstraction: str
    optimal_length: int
    reachable_states: int | None = None
    domain_path: str | None = None
    problem_path: str | None = None


@dataclass
class _Draft:
    objects: list[tuple[str, str]]
    init: set[Atom]
    goal: set[Atom]
    instruction: str


def A(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(args))


def _towers(blocks: Sequence[str], rng: random.Random) -> list[list[str]]:
    order = list(blocks)
    rng.shuffle(order)
    towers: list[list[str]] = []
    for b in order:
        if towers and rng.random() < 0.5:
            rng.choice(towers).append(b)
        else:
            towers.append([b])
    return towers


def _describe_towers(towers: list[list[str]], color: dict[str, str]) -> list[str]:
    out = []
    for tower in towers:
        out.append(f"Block {tower[0]} ({color[tower[0]]}) is on the table.")
        for below, above in zip(tower, tower[1:]):
            out.append(f"Block {above} ({color[above]}) is on block {below}.")
    return out


def _blocks(n: int, rng: random.Random) -> _Draft:
    blocks = [f"b{i}" for i in range(1, n + 1)]
    color = {b: rng.choice(COLORS) for b in blocks}
    init_towers = _towers(blocks, rng)
    init = {A("handempty")}
    for tower in init_towers:
        init.add(A("ontable", tower[0]))
        init.add(A("clear", tower[-1]))
        init |= {A("on", a, b) for b, a in zip(tower, tower[1:])}
    while True:
        target = _towers(blocks, rng)
        goal = {A("on", a, b) for tower in target for b, a in zip(tower, tower[1:])}
        if goal and not goal <= init:
            break
    goal_towers = [t for t in target if len(t) > 1]
    phrases = []
    for tower in goal_towers:
        chain = ", then ".join(f"{a} on {b}" for b, a in zip(tower, tower[1:]))
        phrases.append(chain)
    shades = sorted({color[b] for t in goal_towers for b in t})
    text = " ".join(
        [
            f"Stack {sum(len(t) for t in goal_towers)} {' and '.join(shades)} blocks.",
            f"I have {n} blocks ({', '.join(blocks)}).",
            *_describe_towers(init_towers, color),
            "The hand is empty.",
            f"Goal: put {'; '.join(phrases)}.",
        ]
    )
    return _Draft([(b, "block") for b in blocks], init, goal, text)


def _hanoi(n: int, rng: random.Random, walk: Callable) -> _Draft:
    # d1 is the smallest disk
    disks = [f"d{i}" for i in range(1, n + 1)]
    rods = ["rod1", "rod2", "rod3"]
    color = dict(zip(disks, rng.sample(COLORS, n)))
    stacks: dict[str, list[str]] = {r: [] for r in rods}
    for d in reversed(disks):
        stacks[rng.choice(rods)].append(d)
    init = set()
    for r, stack in stacks.items():
        below = r
        for d in stack:
            init.add(A("on", d, below))
            below = d
        init.add(A("clear", below))
    for i, d in enumerate(disks):
        init |= {A("smaller", d, r) for r in rods}
        init |= {A("smaller", d, e) for e in disks[i + 1 :]}
    objects = [(d, "disk") for d in disks] + [(r, "rod") for r in rods]
    final = walk(objects, init, rng.randint(1, 3))
    moved = sorted(a for a in final - init if a.predicate == "on")
    if not moved:
        raise GenerationFailure("walk moved nothing")
    goal_atom = rng.choice(moved)
    disk, dest = goal_atom.args
    where = f"rod {dest[-1]}" if dest.startswith("rod") else f"the {color[dest]} disk"
    obs = []
    for r, stack in stacks.items():
        if stack:
            obs.append(f"{color[stack[0]].capitalize()} disk {stack[0]} is in rod {r[-1]}.")
            for below, above in zip(stack, stack[1:]):
                obs.append(f"{color[above].capitalize()} disk {above} is on top of {color[below]} disk {below}.")
    text = " ".join(
        [
            f"Move the {color[disk]} disk ({disk}) onto {where}.",
            *obs,
            "Smaller disks are numbered lower. The disks can be moved in rod 1, rod 2, rod 3.",
        ]
    )
    return _Draft(objects, init, {goal_atom}, text)


def _grippers(n: int, rng: random.Random) -> _Draft:
    rooms = [f"room{i}" for i in range(1, rng.randint(2, 3) + 1)]
    boxes = [f"box{i}" for i in range(1, n + 1)]
    color = dict(zip(boxes, rng.sample(COLORS, n)))
    grippers = ["left", "right"]
    robby = rng.choice(rooms)
    at = {b: rng.choice(rooms) for b in boxes}
    init = {A("at-robby", robby)} | {A("at", b, r) for b, r in at.items()} | {A("free", g) for g in grippers}
    movers = rng.sample(boxes, rng.randint(1, n))
    goal = {A("at", b, rng.choice([r for r in rooms if r != at[b]])) for b in movers}
    obs = [f"The agent is in {robby}."] + [f"The {color[b]} box ({b}) is in {r}." for b, r in at.items()]
    wants = [f"the {color[g.args[0]]} box ({g.args[0]}) to {g.args[1]}" for g in sorted(goal)]
    text = " ".join(
        [
            f"Carry {' and '.join(wants)}.",
            f"There are rooms {', '.join(rooms)}.",
            *obs,
            "The robot has a left and a right gripper, both free.",
        ]
    )
    objects = [(r, "room") for r in rooms] + [(b, "box") for b in boxes] + [(g, "gripper") for g in grippers]
    return _Draft(objects, init, goal, text)


def _rearrangement(n: int, rng: random.Random) -> _Draft:
    blocks = [f"blk{i}" for i in range(1, n + 1)]
    bowls = [f"bowl{i}" for i in range(1, rng.randint(2, 3) + 1)]
    bcolor = {b: rng.choice(COLORS) for b in blocks}
    wcolor = {w: rng.choice(COLORS) for w in bowls}
    place = {b: rng.choice([None, *bowls]) for b in blocks}
    init = {A("hand-empty")}
    for b, w in place.items():
        init.add(A("on-table", b) if w is None else A("in", b, w))
    movers = rng.sample(blocks, rng.randint(1, min(2, n)))
    goal = {A("in", b, rng.choice([w for w in bowls if w != place[b]])) for b in movers}
    listing = [f"{bcolor[b]} block {b}" for b in blocks] + [f"{wcolor[w]} bowl {w}" for w in bowls]
    where = [
        f"Block {b} is {'on the table' if w is None else 'in ' + w}." for b, w in place.items()
    ]
    wants = [f"the {bcolor[g.args[0]]} block {g.args[0]} in the {wcolor[g.args[1]]} bowl {g.args[1]}" for g in sorted(goal)]
    text = " ".join([f"Put {' and '.join(wants)}.", f"There is a {', '.join(listing)}.", *where])
    return _Draft([(b, "block") for b in blocks] + [(w, "bowl") for w in bowls], init, goal, text)


def generate_instances(
    kind: str,
    count: int,
    size_range: tuple[int, int] | None = None,
    seed: int = 0,
    max_length: int | None = None,
    attempts_per_instance: int = 200,
    oracle_states: int = 10**6,
) -> list[TaskInstance]:
    """Generate ``count`` oracle-certified instances of suite ``kind``.

    ``max_length`` optionally tightens the suite's plan-length upper bound.
    """
    if kind not in DOMAINS:
        raise ValueError(f"unknown suite '{kind}'; choose from {', '.join(KINDS)}")
    domain_text = DOMAINS[kind]
    domain = parse_domain(domain_text)
    lo_len, hi_len = PLAN_LENGTHS[kind]
    if max_length is not None:
        hi_len = min(hi_len, max_length)
    lo_size, hi_size = size_range or DEFAULT_SIZES[kind]
    rng = random.Random(f"{kind}:{seed}")

    def walk(objects, init, steps):
        prob = build_problem("walk", domain, objects, init, [min(init)])
        task = ground(domain, prob)
        state = frozenset(init)
        for _ in range(steps):
            moves = [a for a in task.actions if a.pre <= state and (state - a.delete) | a.add != state]
            if not moves:
                break
            a = rng.choice(moves)
            state = (state - a.delete) | a.add
        return state

    out: list[TaskInstance] = []
    for idx in range(count):
        for _ in range(attempts_per_instance):
            n = rng.randint(lo_size, hi_size)
            try:
                if kind == "blocks":
                    draft = _blocks(n, rng)
                elif kind == "hanoi":
                    draft = _hanoi(n, rng, walk)
                elif kind == "grippers":
                    draft = _grippers(n, rng)
                else:
                    draft = _rearrangement(n, rng)
            except GenerationFailure:
                continue
            iid = f"{kind}-s{seed}-{idx:03d}"
            problem = build_problem(iid, domain, draft.objects, draft.init, draft.goal)
            try:
                res = bfs_optimal(ground(domain, problem), max_states=oracle_states)
            except OracleBudgetExceeded:
                continue
            if res.length is None or not lo_len <= res.length <= hi_len:
                continue
            out.append(
                TaskInstance(
                    id=iid,
                    kind=kind,
                    instruction=draft.instruction,
                    domain_pddl=domain_text,
                    problem_pddl=serialize_problem(problem),
                    abstraction=abstraction_text(draft.objects, sorted(draft.init), sorted(draft.goal)),
                    optimal_length=res.length,
                )
            )
            break
        else:
            raise GenerationFailure(
                f"could not certify a {kind} instance with plan length in [{lo_len}, {hi_len}]"
            )
    return out


def write_instances(instances: Sequence[TaskInstance], directory: str | Path) -> list[TaskInstance]:
    """Write domain, gold problem and mock-translator fixture files."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for inst in instances:
        dom = root / f"{inst.kind}-domain.pddl"
        if not dom.exists():
            dom.write_text(inst.domain_pddl)
        prob = root / f"{inst.id}.pddl"
        prob.write_text(inst.problem_pddl)
        (root / f"{inst.id}.completion.txt").write_text(inst.abstraction)
        (root / f"{inst.id}.instruction.txt").write_text(inst.instruction + "\n")
        written.append(
            TaskInstance(**{**inst.__dict__, "domain_path": str(dom), "problem_path": str(prob)})
        )
    return written
