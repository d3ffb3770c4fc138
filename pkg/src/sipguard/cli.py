"""Command-line interface: analyze, generate, validate-config, explain."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import config_file_violations, default_config, load_config
from .engine import (
    CHILD_ORDER,
    BeliefReport,
    ConfigurationError,
    DetectorConfig,
    alert_for,
    run,
)
from .traceio import (
    ScenarioKind,
    ScenarioSpec,
    TraceFormatError,
    generate,
    read_trace,
    write_trace,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_vector(values) -> str:
    return "(" + " ".join(_fmt(v) for v in values) + ")"


def _load_config_arg(path: str | None) -> DetectorConfig:
    if path is None:
        return default_config()
    return load_config(path)


def _require_file(parser: argparse.ArgumentParser, path: str) -> None:
    if not Path(path).is_file():
        parser.error(f"no such file: {path}")


def _report_record(report: BeliefReport, config: DetectorConfig) -> dict:
    return {
        "period": report.period_id,
        "start": report.start,
        "end": report.end,
        "events": report.n_events,
        "partial": report.partial,
        "verdict": report.verdict,
        "alert": alert_for(report, config) is not None,
        "belief": {cls: report.belief[i] for i, cls in enumerate(config.classes)},
        "fused": list(report.fused),
        "children": {name: list(vec) for name, vec in report.child_likelihoods.items()},
    }


def _print_human(reports: list[BeliefReport], config: DetectorConfig) -> None:
    headings = ("period", "window", "events", "verdict", "confidence", "alert")
    rows = []
    for report in reports:
        if report.verdict in config.classes:
            confidence = _fmt(report.belief[config.classes.index(report.verdict)])
        else:
            confidence = "-"
        rows.append((
            str(report.period_id),
            f"{report.start:.2f}-{report.end:.2f}" + ("*" if report.partial else ""),
            str(report.n_events),
            report.verdict,
            confidence,
            "yes" if alert_for(report, config) else "",
        ))
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headings)]
    print("  ".join(h.ljust(w) for h, w in zip(headings, widths)).rstrip())
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    if any(r.partial for r in reports):
        print("(* partial period)")


_EVIDENCE_LABELS = {
    "request_intensity": "request intensity",
    "error_intensity": "error response intensity",
    "parse_error_intensity": "parse error intensity",
    "destinations": "distinct destinations",
    "rtp_ports": "opened rtp ports",
    "waiting_dialogs": "max dialogs awaiting ack",
    "request_methods": "request methods (I R A C B)",
    "response_classes": "response classes (1xx..6xx)",
}


def _print_explanation(report: BeliefReport, config: DetectorConfig) -> None:
    snap = report.snapshot
    values = {
        "request_intensity": _fmt(snap.request_intensity),
        "error_intensity": _fmt(snap.error_intensity),
        "parse_error_intensity": _fmt(snap.parse_error_intensity),
        "destinations": str(snap.n_destinations),
        "rtp_ports": str(snap.n_rtp_ports),
        "waiting_dialogs": str(snap.max_waiting),
        "request_methods": _fmt_vector(snap.request_counts),
        "response_classes": _fmt_vector(snap.response_counts),
    }
    span = f"[{report.start:.2f}, {report.end:.2f}]"
    partial = " (partial)" if report.partial else ""
    print(f"period {report.period_id}  {span}  events={report.n_events}{partial}")
    print("  evidence at the leaves:")
    for name in CHILD_ORDER:
        if name not in report.child_likelihoods:
            continue
        print(f"    {_EVIDENCE_LABELS[name]:<28} {values[name]:>14}"
              f"   likelihood {_fmt_vector(report.child_evidence[name])}")
    print("  likelihood passed to the root:")
    for name in CHILD_ORDER:
        if name not in report.child_likelihoods:
            continue
        print(f"    {_EVIDENCE_LABELS[name]:<28} {_fmt_vector(report.child_likelihoods[name])}")
    print(f"  fused likelihood: {_fmt_vector(report.fused)}")
    beliefs = " ".join(f"{cls}={_fmt(b)}" for cls, b in zip(config.classes, report.belief))
    print(f"  belief: {beliefs}")
    print(f"  verdict: {report.verdict}")


def _cmd_analyze(args, parser) -> int:
    _require_file(parser, args.trace)
    if args.config:
        _require_file(parser, args.config)
    try:
        config = _load_config_arg(args.config)
        trace = read_trace(args.trace)
        reports = list(run(trace.events, config))
    except (ConfigurationError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.format == "human":
        _print_human(reports, config)
    else:
        for report in reports:
            print(json.dumps(_report_record(report, config)))
    return EXIT_OK


def _cmd_explain(args, parser) -> int:
    _require_file(parser, args.trace)
    if args.config:
        _require_file(parser, args.config)
    try:
        config = _load_config_arg(args.config)
        trace = read_trace(args.trace)
        reports = list(run(trace.events, config))
    except (ConfigurationError, TraceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for i, report in enumerate(reports):
        if i:
            print()
        _print_explanation(report, config)
    return EXIT_OK


def _cmd_generate(args, parser) -> int:
    try:
        kind = ScenarioKind(args.kind.upper().replace("-", "_"))
    except ValueError:
        parser.error(f"unsupported scenario kind: {args.kind}")
    try:
        spec = ScenarioSpec(
            kind=kind,
            count=args.count,
            inter_dialog_spacing=args.spacing,
            intra_dialog_spacing=args.intra_spacing,
            seed=args.seed,
        )
    except ValueError as exc:
        parser.error(str(exc))
    trace = generate(spec)
    write_trace(trace, args.output)
    print(f"wrote {len(trace.events)} events to {args.output}")
    return EXIT_OK


def _cmd_validate_config(args, parser) -> int:
    _require_file(parser, args.config)
    violations = config_file_violations(args.config)
    if violations:
        for violation in violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.config}: ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sipguard",
        description="Classify SIP traffic windows by naive-Bayes belief fusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="classify a trace file period by period")
    analyze.add_argument("trace")
    analyze.add_argument("--config", help="detector config (TOML); built-in default if omitted")
    analyze.add_argument("--format", choices=("jsonl", "human"), default="jsonl")

    explain = sub.add_parser("explain", help="print the full inference walkthrough")
    explain.add_argument("trace")
    explain.add_argument("--config", help="detector config (TOML); built-in default if omitted")

    gen = sub.add_parser("generate", help="generate a labeled synthetic scenario")
    gen.add_argument("kind", help="scan | dos | spit | password-cracking | normal")
    gen.add_argument("--count", type=int, default=9)
    gen.add_argument("--spacing", type=float, default=5.0,
                     help="seconds between dialogs (default 5)")
    gen.add_argument("--intra-spacing", type=float, default=0.1,
                     help="seconds between messages of one dialog (default 0.1)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", required=True)

    validate = sub.add_parser("validate-config", help="check a config file, listing every problem")
    validate.add_argument("config")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "analyze": _cmd_analyze,
        "explain": _cmd_explain,
        "generate": _cmd_generate,
        "validate-config": _cmd_validate_config,
    }
    return handlers[args.command](args, parser)


if __name__ == "__main__":
    sys.exit(main())
