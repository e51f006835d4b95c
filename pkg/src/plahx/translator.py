"""Few-shot translation of instructions into a minimal problem abstraction.

The model is asked only for the objects, initial atoms and goal atoms of a
task; the domain model is fixed and never generated. The completion is
parsed with a strict grammar, checked against the domain, and embedded into
a regular PDDL problem.
"""

from __future__ import annotations

import json
import logging
import math
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol, Sequence, Union

from .grounding import Success, ground, validate_plan
from .pddl import (
    Atom,
    Domain,
    ParseError,
    PDDLSyntaxError,
    Problem,
    SemanticError,
    SList,
    UnsupportedFeature,
    build_problem,
    parse_domain,
    parse_problem,
    parse_sexprs,
    parse_typed_list,
)
from .search import INFINITY, astar_subspace

log = logging.getLogger(__name__)

DELIMITER = "###"
INSTRUCTION_TAG = f"{DELIMITER} Instruction:"
ABSTRACTION_TAG = f"{DELIMITER} Abstraction:"


class ClientError(RuntimeError):
    """Transport failure talking to the completion endpoint."""


# ---------------------------------------------------------------------------
# tokens


def count_tokens(text: str, tokenizer: Callable[[str], int] | None = None) -> int:
    """Token count; defaults to ``ceil(utf-8 bytes / 4)``."""
    if tokenizer is not None:
        return int(tokenizer(text))
    return math.ceil(len(text.encode("utf-8")) / 4)


def check_overflow(prompt_tokens: int, completion_tokens: int, limit: int) -> bool:
    return prompt_tokens + completion_tokens > limit


# ---------------------------------------------------------------------------
# abstraction


@dataclass(frozen=True)
class Abstraction:
    objects: tuple[tuple[str, str], ...]
    init: tuple[Atom, ...]
    goal: tuple[Atom, ...]

    def render(self) -> str:
        return abstraction_text(self.objects, self.init, self.goal)


def _typed_objects(objects: Sequence[tuple[str, str]]) -> str:
    groups: dict[str, list[str]] = {}
    for name, t in objects:
        groups.setdefault(t, []).append(name)
    return " ".join(f"{' '.join(ns)} - {t}" for t, ns in groups.items())


def abstraction_text(objects: Sequence[tuple[str, str]], init: Iterable[Atom], goal: Iterable[Atom]) -> str:
    """Canonical three-block rendering used for few-shot targets."""
    return (
        f"(:objects {_typed_objects(objects)})\n"
        "(:init " + " ".join(map(str, sorted(init))) + ")\n"
        "(:goal (and " + " ".join(map(str, sorted(goal))) + "))\n"
    )


def _atom(x, where: str) -> Atom:
    if not isinstance(x, SList) or not x or any(isinstance(t, SList) for t in x):
        raise PDDLSyntaxError(f"expected a flat atom in {where}", getattr(x, "line", None))
    head = x[0]
    if head in ("not", "and", "or", "forall", "exists", "when") or head.startswith((":", "?")):
        raise PDDLSyntaxError(f"'{head}' is not allowed in {where}", head.line)
    return Atom(str(head), tuple(str(t) for t in x[1:]))


def parse_abstraction(text: str) -> Abstraction:
    """Parse ``(:objects ...) (:init ...) (:goal ...)``, in that order.

    Anything from the first line starting with ``###`` on is ignored (the
    model running on into the next prompt section). Any other deviation is a
    :class:`PDDLSyntaxError`.
    """
    lines = []
    for line in text.splitlines():
        if line.lstrip().startswith(DELIMITER):
            break
        lines.append(line)
    exprs = parse_sexprs("\n".join(lines))
    keys = [":objects", ":init", ":goal"]
    if len(exprs) != 3:
        raise PDDLSyntaxError(f"expected 3 blocks (:objects, :init, :goal), found {len(exprs)}")
    for expr, key in zip(exprs, keys):
        if not isinstance(expr, SList) or not expr or expr[0] != key:
            head = expr[0] if isinstance(expr, SList) and expr else expr
            raise PDDLSyntaxError(f"expected ({key} ...), found '{head}'", getattr(expr, "line", None))
    objs, init_x, goal_x = exprs
    try:
        objects = tuple((str(n), t) for n, t in parse_typed_list(objs[1:], ":objects"))
    except UnsupportedFeature as e:
        raise PDDLSyntaxError(str(e)) from e
    init = tuple(_atom(x, ":init") for x in init_x[1:])
    goal_items = list(goal_x[1:])
    if len(goal_items) == 1 and isinstance(goal_items[0], SList) and goal_items[0] and goal_items[0][0] == "and":
        goal_items = list(goal_items[0][1:])
    goal = tuple(_atom(x, ":goal") for x in goal_items)
    return Abstraction(objects, init, goal)


def embed_into_problem(z: Abstraction, domain: Domain, problem_name: str) -> Problem:
    """Type-check ``z`` against ``domain`` and wrap it as a problem."""
    return build_problem(problem_name, domain, z.objects, z.init, z.goal)


def extract_abstraction(problem: Problem) -> Abstraction:
    return Abstraction(tuple(problem.objects), tuple(sorted(problem.init)), tuple(sorted(problem.goal)))


# ---------------------------------------------------------------------------
# prompts


@dataclass(frozen=True)
class Shot:
    instruction: str
    abstraction: str


@dataclass(frozen=True)
class PromptBundle:
    shots: tuple[Shot, ...]
    query: str
    header: str = ""

    def render(self) -> str:
        parts = [self.header.rstrip() + "\n"] if self.header else []
        for s in self.shots:
            parts.append(f"{INSTRUCTION_TAG}\n{s.instruction.strip()}\n{ABSTRACTION_TAG}\n{s.abstraction.strip()}\n")
        parts.append(f"{INSTRUCTION_TAG}\n{self.query.strip()}\n{ABSTRACTION_TAG}\n")
        return "\n".join(parts)


def build_prompt(shots: Iterable[Shot | tuple[str, str]], query: str, header: str = "") -> PromptBundle:
    norm = []
    for s in shots:
        s = s if isinstance(s, Shot) else Shot(*s)
        if not s.instruction.strip() or not s.abstraction.strip():
            raise ValueError("every shot needs a non-empty instruction and abstraction")
        norm.append(s)
    if not query.strip():
        raise ValueError("query instruction is empty")
    return PromptBundle(tuple(norm), query, header)


def domain_header(domain: Domain) -> str:
    """Task statement plus the domain's types and predicate signatures."""
    preds = " ".join(
        "(" + " ".join([p.name, *(f"{v} - {t}" for v, t in p.params)]) + ")" for p in domain.predicates
    )
    types = " ".join(c for c, _ in domain.types) or "object"
    return (
        f"Translate the instruction into the objects, initial state and goal of a '{domain.name}' task.\n"
        f"Types: {types}\nPredicates: {preds}"
    )


# ---------------------------------------------------------------------------
# clients


class CompletionClient(Protocol):
    def complete(self, prompt: str, *, temperature: float, max_tokens: int, key: str | None = None) -> str: ...


class MockClient:
    """Serves canned completions keyed by instance id.

    Completions come from ``fixtures`` when given, otherwise from
    ``<fixture_dir>/<key>.completion.txt``.
    """

    def __init__(self, fixture_dir: str | Path | None = None, fixtures: Mapping[str, str] | None = None):
        self.root = Path(fixture_dir) if fixture_dir is not None else None
        self.fixtures = dict(fixtures or {})
        self.calls: list[dict] = []

    def complete(self, prompt: str, *, temperature: float, max_tokens: int, key: str | None = None) -> str:
        self.calls.append({"key": key, "temperature": temperature, "max_tokens": max_tokens})
        if key is None:
            raise ClientError("mock client needs an instance id")
        if key in self.fixtures:
            return self.fixtures[key]
        if self.root is None:
            raise ClientError(f"no fixture for '{key}'")
        path = self.root / f"{key}.completion.txt"
        try:
            return path.read_text()
        except OSError as e:
            raise ClientError(f"no fixture for '{key}': {e}") from e


def _first_text(body) -> str:
    """First text segment of a chat/completions style response."""
    if isinstance(body, str):
        return body
    if isinstance(body, dict):
        for k in ("choices", "content", "output"):
            if k in body and body[k]:
                return _first_text(body[k][0] if isinstance(body[k], list) else body[k])
        if "message" in body:
            return _first_text(body["message"])
        if "text" in body and isinstance(body["text"], str):
            return body["text"]
    raise ClientError("response carries no text segment")


class HTTPChatClient:
    """Minimal chat-completions client; bearer token read from ``api_key_env``."""

    def __init__(self, url: str, model: str = "local-model", api_key_env: str = "PLAHX_API_KEY", timeout: float = 60.0):
        self.url = url
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def complete(self, prompt: str, *, temperature: float, max_tokens: int, key: str | None = None) -> str:
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "max_tokens": max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.api_key_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        req = urllib.request.Request(self.url, data=json.dumps(payload).encode(), headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as e:
            raise ClientError(f"request to {self.url} failed: {e}") from e
        return _first_text(body)


# ---------------------------------------------------------------------------
# translation


@dataclass
class TranslatorConfig:
    context_limit: int = 5000
    temperature: float = 0.0
    shot_count: int = 6
    tokenizer: Callable[[str], int] | None = None
    retries: int = 2
    backoff: float = 1.0  # seconds between retries

    def __post_init__(self) -> None:
        if self.context_limit <= 0:
            raise ValueError("context_limit must be positive")


@dataclass(frozen=True)
class TokenStats:
    prompt: int
    completion: int = 0

    @property
    def total(self) -> int:
        return self.prompt + self.completion


@dataclass(frozen=True)
class TranslationSuccess:
    abstraction: Abstraction
    tokens: TokenStats
    completion: str = ""
    result_class = "success"


@dataclass(frozen=True)
class TranslationSyntaxError:
    message: str
    tokens: TokenStats
    completion: str = ""
    result_class = "syntax_error"


@dataclass(frozen=True)
class TranslationSemanticError:
    message: str
    tokens: TokenStats
    completion: str = ""
    result_class = "semantic_error"


@dataclass(frozen=True)
class ContextOverflow:
    tokens: TokenStats
    result_class = "context_overflow"


TranslationOutcome = Union[TranslationSuccess, TranslationSyntaxError, TranslationSemanticError, ContextOverflow]


def _complete_with_retry(client: CompletionClient, prompt: str, config: TranslatorConfig, max_tokens: int, key: str | None) -> str:
    for attempt in range(config.retries + 1):
        try:
            return client.complete(prompt, temperature=config.temperature, max_tokens=max_tokens, key=key)
        except ClientError as e:
            if attempt == config.retries:
                raise
            log.warning("completion failed (%s); retry %d/%d", e, attempt + 1, config.retries)
            time.sleep(config.backoff)
    raise AssertionError("unreachable")


def translate(
    instruction: str,
    domain: Domain,
    config: TranslatorConfig,
    client: CompletionClient,
    shots: Sequence[Shot] = (),
    key: str | None = None,
) -> TranslationOutcome:
    """Translate one instruction; returns exactly one outcome class.

    Raises :class:`ClientError` only when the endpoint stays unreachable after
    the configured retries.
    """
    bundle = build_prompt(list(shots)[: config.shot_count], instruction, domain_header(domain))
    prompt = bundle.render()
    p_tok = count_tokens(prompt, config.tokenizer)
    if check_overflow(p_tok, 0, config.context_limit):
        return ContextOverflow(TokenStats(p_tok))
    completion = _complete_with_retry(client, prompt, config, config.context_limit - p_tok, key)
    stats = TokenStats(p_tok, count_tokens(completion, config.tokenizer))
    if check_overflow(stats.prompt, stats.completion, config.context_limit):
        return ContextOverflow(stats)
    try:
        z = parse_abstraction(completion)
    except PDDLSyntaxError as e:
        return TranslationSyntaxError(str(e), stats, completion)
    try:
        embed_into_problem(z, domain, "query")
    except SemanticError as e:
        return TranslationSemanticError(str(e), stats, completion)
    return TranslationSuccess(z, stats, completion)


# ---------------------------------------------------------------------------
# domain drift


def _solve(domain: Domain, problem_text: str, budget: int):
    problem = parse_problem(problem_text, domain)
    task = ground(domain, problem)
    res = astar_subspace(task, range(len(task.actions)), INFINITY, budget)
    if not res.plans:
        return task, None
    return task, [task.actions[i].name for i in res.plans[-1]]


def measure_drift(
    ref_domain: Domain | str,
    cand_domain: Domain | str,
    problems: Sequence[str],
    planner_budget: int = 10_000,
) -> float:
    """Fraction of problems solved under ``ref_domain`` but not under ``cand_domain``.

    A problem counts as lost if it fails to parse or ground under the
    candidate, if the budgeted planner finds nothing, or if the candidate's
    plan does not validate under the reference model.
    """
    if not problems:
        raise ValueError("no problems given")
    if isinstance(ref_domain, str):
        ref_domain = parse_domain(ref_domain)
    lost = 0
    for text in problems:
        ref_task, ref_plan = _solve(ref_domain, text, planner_budget)
        if ref_plan is None:
            continue
        try:
            cand = parse_domain(cand_domain) if isinstance(cand_domain, str) else cand_domain
            _, cand_plan = _solve(cand, text, planner_budget)
        except ParseError:
            lost += 1
            continue
        if cand_plan is None:
            lost += 1
            continue
        try:
            ids = [ref_task.action_by_name(n).id for n in cand_plan]
        except LookupError:
            lost += 1
            continue
        if not isinstance(validate_plan(ref_task, ids), Success):
            lost += 1
    return lost / len(problems)


def drift_detected(ratio: float, threshold: float = 0.01) -> bool:
    return ratio > threshold
