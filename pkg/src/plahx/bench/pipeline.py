"""End-to-end runs: translate, embed, ground, plan, validate, classify."""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

from ..grounding import GroundedTask, Success, ground, validate_plan
from ..meta import PlanResult, SearchConfig, run
from ..pddl import Domain, Problem, SemanticError, parse_domain
from ..translator import (
    CompletionClient,
    MockClient,
    Shot,
    TranslationOutcome,
    TranslationSuccess,
    TranslatorConfig,
    build_prompt,
    count_tokens,
    domain_header,
    embed_into_problem,
    translate,
)
from .generate import KINDS, TaskInstance, generate_instances
from .report import BaselineResult, PipelineTrace, Report, RunRecord, aggregate, baseline_plan, classify_result, compute_pscr

SHOT_SEED = 1_000_003  # shot pools never overlap with benchmark seeds in practice


@lru_cache(maxsize=None)
def shot_instances(kind: str, k: int = 6) -> tuple[TaskInstance, ...]:
    return tuple(generate_instances(kind, k, seed=SHOT_SEED))


def shots_for(kind: str, k: int = 6) -> list[Shot]:
    return [Shot(s.instruction, s.abstraction) for s in shot_instances(kind, k)]


def prompt_token_pair(instance: TaskInstance, k: int = 6, config: TranslatorConfig | None = None) -> tuple[int, int]:
    """Prompt tokens with abstraction targets vs. whole problem files as targets."""
    config = config or TranslatorConfig()
    domain = parse_domain(instance.domain_pddl)
    header = domain_header(domain)
    pool = shot_instances(instance.kind, k)
    abstract = build_prompt([Shot(s.instruction, s.abstraction) for s in pool], instance.instruction, header)
    full = build_prompt([Shot(s.instruction, s.problem_pddl) for s in pool], instance.instruction, header)
    return (
        count_tokens(abstract.render(), config.tokenizer),
        count_tokens(full.render(), config.tokenizer),
    )


@dataclass
class Solved:
    translation: TranslationOutcome
    problem: Problem | None = None
    task: GroundedTask | None = None
    plan: tuple[int, ...] | None = None
    search: PlanResult | BaselineResult | None = None
    result_class: str = "plan_invalidity"
    cpu_seconds: float = 0.0


def plan_task(task: GroundedTask, planner: str, config: SearchConfig) -> tuple[tuple[int, ...] | None, PlanResult | BaselineResult]:
    if planner == "baseline":
        res = baseline_plan(task, budget=max(config.budget, 1_000_000))
        return res.plan, res
    if planner != "plahx":
        raise ValueError(f"unknown planner '{planner}'")
    res = run(task, config)
    return res.plan, res


def solve_instruction(
    instruction: str,
    domain: Domain,
    client: CompletionClient,
    *,
    key: str | None = None,
    shots: Sequence[Shot] = (),
    translator_config: TranslatorConfig | None = None,
    search_config: SearchConfig | None = None,
    planner: str = "plahx",
    problem_name: str = "query",
) -> Solved:
    tcfg = translator_config or TranslatorConfig()
    scfg = search_config or SearchConfig()
    outcome = translate(instruction, domain, tcfg, client, shots, key=key)
    solved = Solved(outcome)
    trace = PipelineTrace(outcome.result_class)
    if isinstance(outcome, TranslationSuccess):
        try:
            solved.problem = embed_into_problem(outcome.abstraction, domain, problem_name)
        except SemanticError:
            trace.translation_class = "semantic_error"
        else:
            start = time.perf_counter()
            solved.task = ground(domain, solved.problem)
            solved.plan, solved.search = plan_task(solved.task, planner, scfg)
            trace.plan_found = solved.plan is not None
            trace.plan_valid = trace.plan_found and isinstance(validate_plan(solved.task, solved.plan), Success)
            solved.cpu_seconds = time.perf_counter() - start
    solved.result_class = classify_result(trace)
    return solved


def run_instance(
    instance: TaskInstance,
    client: CompletionClient | None = None,
    *,
    planner: str = "plahx",
    search_config: SearchConfig | None = None,
    translator_config: TranslatorConfig | None = None,
) -> RunRecord:
    """Run one benchmark instance; defaults to a mock translator serving the gold abstraction."""
    tcfg = translator_config or TranslatorConfig()
    scfg = search_config or SearchConfig()
    client = client or MockClient(fixtures={instance.id: instance.abstraction})
    domain = parse_domain(instance.domain_pddl)
    shots = shots_for(instance.kind, tcfg.shot_count) if tcfg.shot_count else []
    solved = solve_instruction(
        instance.instruction, domain, client, key=instance.id, shots=shots,
        translator_config=tcfg, search_config=scfg, planner=planner, problem_name=instance.id,
    )
    _, full_tokens = prompt_token_pair(instance, tcfg.shot_count, tcfg)
    record = RunRecord(
        instance_id=instance.id,
        kind=instance.kind,
        result_class=solved.result_class,
        prompt_tokens=solved.translation.tokens.prompt,
        full_prompt_tokens=full_tokens,
        cpu_seconds=solved.cpu_seconds,
        plan_length=len(solved.plan) if solved.plan is not None else None,
        plan=[solved.task.actions[i].name for i in solved.plan] if solved.plan is not None else None,
        optimal_length=instance.optimal_length,
    )
    if solved.task is not None:
        record.n_actions = len(solved.task.actions)
        if isinstance(solved.search, PlanResult):
            m = solved.search.metrics
            record.mean_subspace = m.mean_subspace
            record.violations = list(m.violations)
            if m.max_subspace:
                record.pscr = compute_pscr(m.n_actions, scfg.pop_size, m.max_subspace)
        else:
            record.mean_subspace = float(record.n_actions)
    return record


def run_suite(
    kinds: Sequence[str] = KINDS,
    count: int = 10,
    seed: int = 0,
    *,
    planner: str = "plahx",
    search_config: SearchConfig | None = None,
    translator_config: TranslatorConfig | None = None,
    max_length: int | None = None,
) -> Report:
    scfg = search_config or SearchConfig(seed=seed)
    records = []
    for kind in kinds:
        for inst in generate_instances(kind, count, seed=seed, max_length=max_length):
            records.append(
                run_instance(inst, planner=planner, search_config=replace(scfg), translator_config=translator_config)
            )
    return aggregate(records, planner)
