"""Command-line entry point: ``plahx {plan,translate,solve,validate,bench}``.

Exit codes: 0 success, 1 invalid plan or no plan, 2 translation error class,
3 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench.generate import KINDS
from .bench.pipeline import run_suite, solve_instruction
from .grounding import Success, format_plan, ground, parse_plan, validate_plan
from .meta import SearchConfig, result_to_dict, run
from .pddl import ParseError, parse_domain, parse_problem
from .translator import (
    ClientError,
    HTTPChatClient,
    MockClient,
    Shot,
    TranslationSuccess,
    TranslatorConfig,
    translate,
)

EXIT_OK, EXIT_PLAN, EXIT_TRANSLATION, EXIT_USAGE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from e


def _search_config(args) -> SearchConfig:
    return SearchConfig(
        pop_size=args.pop_size,
        max_iters=args.max_iters,
        archive_threshold=args.archive_threshold,
        budget=args.budget,
        seed=args.seed,
        workers=1 if args.single_thread else args.workers,
    )


def _load_shots(path: str | None) -> list[Shot]:
    """Shots file: JSON list of ``{"instruction": ..., "abstraction": ...}``."""
    if path is None:
        return []
    try:
        items = json.loads(_read(path))
        return [Shot(d["instruction"], d["abstraction"]) for d in items]
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"bad shots file {path}: {e}") from e


def _client(args):
    if args.mock:
        return MockClient(fixture_dir=args.mock)
    if args.endpoint:
        return HTTPChatClient(args.endpoint, model=args.model)
    raise UsageError("one of --endpoint or --mock is required")


def _instruction(args) -> str:
    if args.instruction_file:
        return _read(args.instruction_file).strip()
    if args.instruction is None:
        raise UsageError("one of --instruction or --instruction-file is required")
    return args.instruction


def cmd_plan(args) -> int:
    domain = parse_domain(_read(args.domain))
    problem = parse_problem(_read(args.problem), domain)
    task = ground(domain, problem)
    log = open(args.log, "w") if args.log else None
    try:
        result = run(task, _search_config(args), log=log)
    finally:
        if log:
            log.close()
    if result.plan is not None:
        sys.stdout.write(format_plan(task, result.plan))
    print(json.dumps(result_to_dict(result), sort_keys=True))
    return EXIT_OK if result.found else EXIT_PLAN


def _translator_config(args) -> TranslatorConfig:
    return TranslatorConfig(context_limit=args.context_limit, shot_count=args.shots)


def cmd_translate(args) -> int:
    domain = parse_domain(_read(args.domain))
    shots = _load_shots(args.shots_file)
    outcome = translate(_instruction(args), domain, _translator_config(args), _client(args), shots, key=args.instance_id)
    if isinstance(outcome, TranslationSuccess):
        sys.stdout.write(outcome.abstraction.render())
        return EXIT_OK
    print(outcome.result_class)
    if getattr(outcome, "message", None):
        print(outcome.message, file=sys.stderr)
    return EXIT_TRANSLATION


def cmd_solve(args) -> int:
    domain = parse_domain(_read(args.domain))
    solved = solve_instruction(
        _instruction(args),
        domain,
        _client(args),
        key=args.instance_id,
        shots=_load_shots(args.shots_file),
        translator_config=_translator_config(args),
        search_config=_search_config(args),
        planner="baseline" if args.baseline else "plahx",
    )
    if solved.result_class in ("syntax_error", "semantic_error", "context_overflow"):
        print(solved.result_class)
        return EXIT_TRANSLATION
    if solved.plan is not None:
        sys.stdout.write(format_plan(solved.task, solved.plan))
    print(json.dumps({"result_class": solved.result_class, "cpu_seconds": solved.cpu_seconds}, sort_keys=True))
    return EXIT_OK if solved.result_class == "plan_success" else EXIT_PLAN


def cmd_validate(args) -> int:
    domain = parse_domain(_read(args.domain))
    task = ground(domain, parse_problem(_read(args.problem), domain))
    try:
        plan = parse_plan(task, _read(args.plan))
    except LookupError as e:
        raise UsageError(f"plan names an unknown action: {e}") from e
    outcome = validate_plan(task, plan)
    d = {"outcome": type(outcome).__name__}
    for k, v in vars(outcome).items():
        d[k] = sorted(map(str, v)) if isinstance(v, frozenset) else v if isinstance(v, int) else str(v)
    print(json.dumps(d, sort_keys=True))
    return EXIT_OK if isinstance(outcome, Success) else EXIT_PLAN


def cmd_bench(args) -> int:
    kinds = KINDS if args.suite == "all" else (args.suite,)
    cfg = _search_config(args)
    report = run_suite(
        kinds, args.count, args.seed,
        planner="baseline" if args.baseline else "plahx",
        search_config=cfg,
        max_length=args.max_length,
    )
    timing = not args.no_timing
    sys.stdout.write(report.to_text(timing))
    if args.json:
        try:
            Path(args.json).write_text(report.to_json(timing))
        except OSError as e:
            raise UsageError(f"cannot write {args.json}: {e.strerror or e}") from e
    return EXIT_OK


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    d = SearchConfig()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--pop-size", type=int, default=d.pop_size)
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--archive-threshold", type=int, default=d.archive_threshold)
    p.add_argument("--budget", type=int, default=d.budget, help="node expansions per local search")
    p.add_argument("--workers", type=int, default=4, help="local-search threads (ignored with --single-thread)")
    p.add_argument("--single-thread", action="store_true")


def _add_translate_flags(p: argparse.ArgumentParser) -> None:
    d = TranslatorConfig()
    p.add_argument("--domain", required=True)
    p.add_argument("--instruction")
    p.add_argument("--instruction-file")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--endpoint", help="chat-completions URL; token from $PLAHX_API_KEY")
    src.add_argument("--mock", metavar="DIR", help="fixture directory of <id>.completion.txt files")
    p.add_argument("--model", default="local-model")
    p.add_argument("--instance-id", help="fixture key for --mock")
    p.add_argument("--shots", type=int, default=d.shot_count)
    p.add_argument("--shots-file", help="JSON list of {instruction, abstraction}")
    p.add_argument("--context-limit", type=int, default=d.context_limit)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plahx", description="Instruction-to-plan pipeline with a population-based planner.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="plan for a PDDL domain/problem pair")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--log", help="write one JSON line per generation here")
    _add_search_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("translate", help="turn an instruction into an abstraction")
    _add_translate_flags(p)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("solve", help="translate, embed and plan")
    _add_translate_flags(p)
    _add_search_flags(p)
    p.add_argument("--baseline", action="store_true", help="plan with full-space A* instead")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a plan file against a problem")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--plan", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a generated benchmark suite")
    p.add_argument("--suite", choices=[*KINDS, "all"], default="all")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--baseline", action="store_true")
    p.add_argument("--max-length", type=int, help="cap on oracle plan length")
    p.add_argument("--json", metavar="PATH", help="also write the JSON report here")
    p.add_argument("--no-timing", action="store_true", help="omit CPU times (reproducible output)")
    _add_search_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, ValueError) as e:
        print(f"plahx: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ClientError as e:
        print(f"plahx: translator unreachable: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
