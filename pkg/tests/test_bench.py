import json

import pytest

from plahx.bench.generate import KINDS, PLAN_LENGTHS, generate_instances, write_instances
from plahx.bench.pipeline import prompt_token_pair, run_instance, run_suite
from plahx.bench.report import (
    RESULT_CLASSES,
    EmptyInput,
    PipelineTrace,
    RunRecord,
    aggregate,
    baseline_plan,
    classify_result,
    compute_pscr,
)
from plahx.grounding import Success, ground, validate_plan
from plahx.oracle import bfs_optimal
from plahx.pddl import parse_domain, parse_problem
from plahx.search import INFINITY
from plahx.translator import MockClient, TranslatorConfig


@pytest.mark.parametrize("kind", KINDS)
def test_generated_instances_are_certified(kind):
    insts = generate_instances(kind, 5, seed=1)
    lo, hi = PLAN_LENGTHS[kind]
    assert len({i.id for i in insts}) == 5
    for inst in insts:
        d = parse_domain(inst.domain_pddl)
        task = ground(d, parse_problem(inst.problem_pddl, d))
        assert lo <= inst.optimal_length <= hi
        assert bfs_optimal(task).length == inst.optimal_length
        assert inst.instruction.strip()


def test_generation_is_seeded():
    assert generate_instances("blocks", 3, seed=5) == generate_instances("blocks", 3, seed=5)
    assert generate_instances("blocks", 3, seed=5) != generate_instances("blocks", 3, seed=6)
    assert generate_instances("hanoi", 0) == []
    with pytest.raises(ValueError):
        generate_instances("sokoban", 1)


def test_single_move_hanoi():
    inst = next(i for i in generate_instances("hanoi", 20, seed=0) if i.optimal_length == 1)
    assert inst.instruction.startswith("Move the ")


def test_write_instances_layout(tmp_path):
    written = write_instances(generate_instances("grippers", 2, seed=3), tmp_path)
    for inst in written:
        assert (tmp_path / f"{inst.id}.completion.txt").read_text() == inst.abstraction
        assert inst.problem_path and inst.domain_path.endswith("grippers-domain.pddl")


@pytest.mark.parametrize(
    "trace, expected",
    [
        (PipelineTrace("success", plan_found=True, plan_valid=True), "plan_success"),
        (PipelineTrace("syntax_error"), "syntax_error"),
        (PipelineTrace("semantic_error"), "semantic_error"),
        (PipelineTrace("context_overflow"), "context_overflow"),
        (PipelineTrace("success"), "plan_invalidity"),
        (PipelineTrace("success", plan_found=True, plan_valid=False), "plan_invalidity"),
        (PipelineTrace("success", drift=True, plan_found=True, plan_valid=True), "domain_drift"),
    ],
)
def test_classify_result(trace, expected):
    assert classify_result(trace) == expected


def test_compute_pscr():
    assert compute_pscr(20, 4, 4) == pytest.approx(1.25, rel=1e-9)
    assert compute_pscr(22.6, 20, 8.27) == pytest.approx(22.6 / (20 * 8.27), rel=1e-9)
    assert compute_pscr(22.6, 20, 8.27) == pytest.approx(0.1367, abs=1e-4)
    assert compute_pscr(17, 1, 17) == 1.0
    with pytest.raises(ValueError):
        compute_pscr(0, 1, 1)


def _rec(cls, tokens=1000, kind="blocks"):
    return RunRecord("x", kind, cls, tokens)


def test_aggregate():
    r = aggregate([_rec("plan_success")] * 3 + [_rec("syntax_error")])
    assert r.total.success_rate == 75.0
    assert sum(r.total.histogram.values()) == 4 and set(r.total.histogram) == set(RESULT_CLASSES)
    assert aggregate([_rec("plan_success", 1000), _rec("plan_success", 2000)]).total.avg_tokens == 1500
    one = aggregate([RunRecord("x", "hanoi", "plan_success", 321, n_actions=7, mean_subspace=3.5)])
    assert (one.total.avg_tokens, one.total.mean_actions, one.total.mean_subspace) == (321, 7, 3.5)
    with pytest.raises(EmptyInput):
        aggregate([])


def test_baseline_examples(two_task, blocks):
    assert len(baseline_plan(two_task).plan) == 2
    trivial = parse_problem(
        "(define (problem t) (:domain blocks) (:objects b1 - block) (:init (handempty) (ontable b1) (clear b1)) (:goal (handempty)))",
        blocks,
    )
    assert baseline_plan(ground(blocks, trivial)).plan == ()
    d = parse_domain("(define (domain tiny) (:predicates (a) (b)) (:action make-a :parameters () :effect (a)))")
    res = baseline_plan(ground(d, parse_problem("(define (problem u) (:domain tiny) (:init) (:goal (b)))", d)))
    assert res.plan is None and res.h_init == INFINITY


def test_run_instance_success_and_failure_classes():
    inst = generate_instances("rearrangement", 1, seed=2)[0]
    rec = run_instance(inst)
    assert rec.result_class == "plan_success" and rec.plan_length >= rec.optimal_length
    assert 0 < rec.mean_subspace < rec.n_actions and rec.pscr is not None
    assert rec.prompt_tokens < rec.full_prompt_tokens
    bad = run_instance(inst, MockClient(fixtures={inst.id: "(:objects"}))
    assert bad.result_class == "syntax_error" and bad.plan_length is None
    tiny = run_instance(inst, translator_config=TranslatorConfig(context_limit=50))
    assert tiny.result_class == "context_overflow"
    base = run_instance(inst, planner="baseline")
    assert base.result_class == "plan_success" and base.plan_length == inst.optimal_length


def test_token_pair_uses_same_template():
    inst = generate_instances("blocks", 1, seed=0)[0]
    abstract, full = prompt_token_pair(inst)
    assert abstract < full


def test_report_is_reproducible_without_timing():
    a = run_suite(["blocks", "hanoi"], 2, seed=4)
    b = run_suite(["blocks", "hanoi"], 2, seed=4)
    assert a.to_json(timing=False) == b.to_json(timing=False)
    assert "cpu_seconds" not in a.to_json(timing=False) and "cpu_seconds" in a.to_json()
    data = json.loads(a.to_json())
    assert set(data["per_domain"]) == {"blocks", "hanoi"}
    assert "total (by count)" in a.to_text()
