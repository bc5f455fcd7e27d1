"""Command-line entry point.

Machine-readable output (JSON/JSONL) goes to stdout or the configured
files; human summaries go to stderr.  Exit codes: 0 success (audit: no
violations), 1 violations found, 2 any error.  All randomness flows from
the seed flag or the config seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EMBEDDED, ConfigError, build_labeler, build_model, load_config
from .intervention import GuardedSession, PolicyError, run_guarded, violation_rate
from .ltl import (
    And,
    Always,
    Eventually,
    FalseBool,
    Formula,
    Implies,
    Next,
    Not,
    Or,
    ParseError,
    Prop,
    TrueBool,
    TruthAssignment,
    Until,
    parse,
    progress,
    render,
    simplify,
    verdict_of,
)
from .models import EndpointError
from .monitor import CrossCheckError, audit_log, score_f1
from .synthbench import (
    CoinFlipJudge,
    GenerationError,
    MonitorOracleJudge,
    eval_judge,
    gen_constraint_scaling,
    gen_elasticity,
    gen_proposition_scaling,
    load_cases,
    save_cases,
)
from .trace import (
    LabelingError,
    TraceError,
    apply_labeler,
    load_reports,
    load_trace,
    report_to_dict,
    save_reports,
    save_trace,
    step_to_dict,
)

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_ERROR = 2


def _human(message: str) -> None:
    print(message, file=sys.stderr)


def _ast_dict(phi: Formula) -> dict:
    match phi:
        case TrueBool():
            return {"kind": "true"}
        case FalseBool():
            return {"kind": "false"}
        case Prop(name):
            return {"kind": "prop", "name": name}
        case Not(child):
            return {"kind": "not", "child": _ast_dict(child)}
        case Next(child):
            return {"kind": "next", "child": _ast_dict(child)}
        case Eventually(child):
            return {"kind": "eventually", "child": _ast_dict(child)}
        case Always(child):
            return {"kind": "always", "child": _ast_dict(child)}
        case And(left, right):
            return {"kind": "and", "left": _ast_dict(left), "right": _ast_dict(right)}
        case Or(left, right):
            return {"kind": "or", "left": _ast_dict(left), "right": _ast_dict(right)}
        case Implies(left, right):
            return {"kind": "implies", "left": _ast_dict(left), "right": _ast_dict(right)}
        case Until(left, right):
            return {"kind": "until", "left": _ast_dict(left), "right": _ast_dict(right)}
    raise TypeError(f"not a formula: {phi!r}")


def _print_parse_error(text: str, err: ParseError) -> None:
    _human(f"error: {err}")
    lines = text.splitlines() or [""]
    if 1 <= err.line <= len(lines):
        _human(f"  {lines[err.line - 1]}")
        _human("  " + " " * (err.column - 1) + "^")


def _parse_labels(text: str) -> TruthAssignment:
    return frozenset(part.strip() for part in text.split(",") if part.strip())


def cmd_parse(args: argparse.Namespace) -> int:
    try:
        phi = parse(args.formula)
    except ParseError as err:
        _print_parse_error(args.formula, err)
        return EXIT_ERROR
    canonical = simplify(phi)
    document = {
        "canonical": render(canonical, "ascii"),
        "parsed": render(phi, "ascii"),
        "ast": _ast_dict(phi),
    }
    print(json.dumps(document, ensure_ascii=False, indent=2))
    return EXIT_OK


def cmd_progress(args: argparse.Namespace) -> int:
    try:
        phi = parse(args.formula)
    except ParseError as err:
        _print_parse_error(args.formula, err)
        return EXIT_ERROR
    if args.steps_file:
        try:
            lines = Path(args.steps_file).read_text(encoding="utf-8").splitlines()
        except OSError as err:
            _human(f"error: {err}")
            return EXIT_ERROR
        assignments = [_parse_labels(line) for line in lines]
    else:
        assignments = [_parse_labels(args.labels or "")]
    residual = simplify(phi)
    for t, labels in enumerate(assignments, 1):
        residual = simplify(progress(residual, labels))
        verdict = verdict_of(residual)
        print(
            json.dumps(
                {"t": t, "residual": render(residual, "ascii"), "verdict": verdict.value},
                ensure_ascii=False,
            )
        )
        _human(f"step {t}: {render(residual, 'ascii')} / {verdict.value}")
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
        trace = load_trace(args.trace)
        labeler = build_labeler(config.labeler_spec)
        if labeler is not EMBEDDED:
            trace = apply_labeler(trace, labeler, overwrite=args.relabel)
        mode = args.mode or config.mode
        reports = audit_log(trace, config.constraints, mode=mode, cross_check=args.cross_check)
        extra: dict = {"mode": mode, "trace_length": len(trace)}
        if args.f1_against:
            truth = load_reports(args.f1_against)
            result = score_f1(reports, truth)
            extra["f1"] = {
                "pooled": {
                    "precision": result.pooled.precision,
                    "recall": result.pooled.recall,
                    "f1": result.pooled.f1,
                },
                "per_constraint": {
                    cid: {"precision": s.precision, "recall": s.recall, "f1": s.f1}
                    for cid, s in sorted(result.per_constraint.items())
                },
            }
            _human(
                f"pooled F1 {result.pooled.f1:.4f} "
                f"(precision {result.pooled.precision:.4f}, recall {result.pooled.recall:.4f})"
            )
    except (ConfigError, TraceError, LabelingError, CrossCheckError, ParseError, ValueError, OSError) as err:
        _human(f"error: {err}")
        return EXIT_ERROR
    if args.out:
        save_reports(reports, args.out, extra=extra)
    else:
        doc = {"reports": [report_to_dict(r) for r in reports], **extra}
        print(json.dumps(doc, ensure_ascii=False, indent=2))
    violations = sum(r.violations for r in reports)
    _human(
        f"audited {len(trace)} steps against {len(reports)} constraints: "
        f"{violations} violation(s)"
    )
    return EXIT_VIOLATIONS if violations else EXIT_OK


def cmd_guard(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    try:
        config = load_config(args.config)
        labeler = build_labeler(config.labeler_spec)
        if labeler is EMBEDDED:
            raise ConfigError("guard mode needs a concrete labeler, not embedded labels")
        model = build_model(config.model_spec)
        substitute = (
            build_model(config.substitute_spec) if config.substitute_spec else None
        )
        seed = config.seed if args.seed is None else args.seed
        session = GuardedSession(
            model=model,
            labeler=labeler,
            constraints=config.constraints,
            policy=config.policy,
            substitute=substitute,
            seed=seed,
            rules_text=config.rules_text(),
            stop_token=config.stop_token,
            action_temperature=config.action_temperature,
            sampling_temperature=config.sampling_temperature,
            reset_mode=(config.mode == "reset"),
        )
    except (ConfigError, PolicyError) as err:
        _human(f"error: {err}")
        return EXIT_ERROR

    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        trace, outcomes, reports = run_guarded(
            session, max_steps=args.max_steps, initial_input=config.initial_input
        )
    except (EndpointError, LabelingError, RuntimeError) as err:
        _flush_guard_outputs(session, out_dir)
        _human(f"error: {err} (partial outputs flushed to {out_dir})")
        return EXIT_ERROR
    save_trace(trace, out_dir / "trace.jsonl")
    with (out_dir / "guard_log.jsonl").open("w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome.to_dict(), ensure_ascii=False) + "\n")
    save_reports(
        reports,
        out_dir / "reports.json",
        extra={"violation_rate": violation_rate(reports), "steps": len(trace)},
    )
    interventions = sum(o.intervened for o in outcomes)
    _human(
        f"ran {len(trace)} steps, {interventions} intervention(s), "
        f"violation rate {violation_rate(reports):.4f}"
    )
    return EXIT_OK


def _flush_guard_outputs(session: GuardedSession, out_dir: Path) -> None:
    with (out_dir / "guard_log.jsonl").open("w", encoding="utf-8") as fh:
        for outcome in session.outcomes:
            fh.write(json.dumps(outcome.to_dict(), ensure_ascii=False) + "\n")
    with (out_dir / "trace.jsonl").open("w", encoding="utf-8") as fh:
        for record in session.steps:
            fh.write(json.dumps(step_to_dict(record), ensure_ascii=False) + "\n")


def cmd_bench_gen(args: argparse.Namespace) -> int:
    try:
        if args.suite == "elasticity":
            cases = gen_elasticity(
                gap=args.gap, family=args.family, seed=args.seed, count=args.count
            )
        elif args.suite == "constraint":
            cases = [
                gen_constraint_scaling(args.n, args.family, seed=args.seed + i)
                for i in range(args.count)
            ]
        else:
            cases = [
                gen_proposition_scaling(args.entities, args.family, seed=args.seed + i)
                for i in range(args.count)
            ]
        save_cases(cases, args.out)
    except (GenerationError, OSError) as err:
        _human(f"error: {err}")
        return EXIT_ERROR
    satisfied = sum(sum(case.truth) for case in cases)
    total = sum(len(case.truth) for case in cases)
    _human(
        f"wrote {len(cases)} case(s) to {args.out}: "
        f"{satisfied}/{total} constraint instances satisfied"
    )
    return EXIT_OK


def cmd_bench_eval(args: argparse.Namespace) -> int:
    try:
        cases = load_cases(args.bench)
        if args.judge == "oracle":
            judge = MonitorOracleJudge()
        elif args.judge == "coinflip":
            judge = CoinFlipJudge()
        else:
            if not args.judge_config:
                raise ConfigError("--judge endpoint requires --judge-config")
            spec = json.loads(Path(args.judge_config).read_text(encoding="utf-8"))
            judge = build_model({"type": "endpoint", **spec})
        report = eval_judge(cases, judge, level=args.level, seed=args.seed)
    except (ConfigError, GenerationError, EndpointError, TraceError, OSError, ValueError) as err:
        _human(f"error: {err}")
        return EXIT_ERROR
    document = report.to_dict()
    if args.out:
        Path(args.out).write_text(
            json.dumps(document, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
    else:
        print(json.dumps(document, ensure_ascii=False, indent=2))
    _human(
        f"overall accuracy {report.overall.accuracy:.4f} "
        f"± {report.overall.half_width:.4f} over {report.overall.judgments} judgment(s), "
        f"{report.overall.parse_failures} parse failure(s)"
    )
    for key, acc in sorted(report.by_knob.items()):
        _human(f"  {key}: {acc.accuracy:.4f} ± {acc.half_width:.4f} (n={acc.judgments})")
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltlguard",
        description=(
            "Audit, monitor, predict, and intervene on sequential systems "
            "against temporal-logic constraints."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse a formula and print its canonical form")
    p_parse.add_argument("formula")
    p_parse.set_defaults(func=cmd_parse)

    p_progress = sub.add_parser("progress", help="progress a formula through truth assignments")
    p_progress.add_argument("formula")
    p_progress.add_argument("--labels", default=None, help="comma list for a single step")
    p_progress.add_argument(
        "--steps-file", default=None, help="file with one comma list of labels per line"
    )
    p_progress.set_defaults(func=cmd_progress)

    p_audit = sub.add_parser("audit", help="audit a recorded trace against constraints")
    p_audit.add_argument("trace")
    p_audit.add_argument("--config", required=True)
    p_audit.add_argument("--mode", choices=("plain", "reset"), default=None)
    p_audit.add_argument("--cross-check", action="store_true")
    p_audit.add_argument("--relabel", action="store_true", help="overwrite embedded labels")
    p_audit.add_argument("--f1-against", default=None, help="ground-truth report file")
    p_audit.add_argument("--out", default=None, help="report output path (default stdout)")
    p_audit.set_defaults(func=cmd_audit)

    p_guard = sub.add_parser("guard", help="run a guarded model loop")
    p_guard.add_argument("--config", required=True)
    p_guard.add_argument("--max-steps", type=int, required=True)
    p_guard.add_argument("--seed", type=int, default=None)
    p_guard.add_argument("--out-dir", default="guard_out")
    p_guard.set_defaults(func=cmd_guard)

    p_bench = sub.add_parser("bench", help="generate or evaluate synthetic benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench_command", required=True)

    p_gen = bench_sub.add_parser("gen", help="generate benchmark cases")
    p_gen.add_argument("--suite", choices=("elasticity", "constraint", "proposition"), required=True)
    p_gen.add_argument("--family", choices=("simple", "complex"), default="simple")
    p_gen.add_argument("--gap", type=int, default=10)
    p_gen.add_argument("--n", type=int, default=1, help="constraints per case (constraint suite)")
    p_gen.add_argument("--entities", type=int, default=1, help="entities per step (proposition suite)")
    p_gen.add_argument("--count", type=int, default=40)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_bench_gen)

    p_eval = bench_sub.add_parser("eval", help="evaluate a judge on benchmark cases")
    p_eval.add_argument("--bench", required=True)
    p_eval.add_argument("--judge", choices=("oracle", "coinflip", "endpoint"), required=True)
    p_eval.add_argument("--judge-config", default=None)
    p_eval.add_argument("--level", choices=("informal", "precise", "precise+ltl"), default="informal")
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_bench_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
