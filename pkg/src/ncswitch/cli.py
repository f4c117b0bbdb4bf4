"""Command-line entry point.

    ncswitch run <scenario.json> --out <dir> [--ftc on|off] [--horizon N]
    ncswitch bound <scenario.json>
    ncswitch validate <scenario.json>
    ncswitch plot <trace-dir> --class high|mean|low --out <file.svg>

Exit codes: 0 success, 2 unreadable or invalid scenario, 3 unstable bound.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import scenario as scn
from .model import class_label, parse_class
from .simulation import UnstableBounds, build, effective_bounds
from .trace import EmptyClass, export_csv, format_tu, plot, read_trace, summary, write_meta

EXIT_OK, EXIT_INVALID, EXIT_UNSTABLE = 0, 2, 3


def _decimal(x: Fraction, digits: int = 6) -> str:
    return format_tu(x, 1, digits)


def _load_doc(path: str):
    """Returns (document, diagnostics)."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        return None, [f"{path}: {e.strerror or e}"]
    try:
        return json.loads(text), []
    except json.JSONDecodeError as e:
        return None, [f"{path}: line {e.lineno}, column {e.colno}: {e.msg}"]


def _report(diags: list[str]) -> None:
    for d in diags:
        print(f"error: {d}", file=sys.stderr)


def _horizon_arg(text: str):
    return int(text) if text.strip().isdigit() else text


def cmd_validate(args) -> int:
    diags = scn.validate(args.scenario)
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_OK if not diags else EXIT_INVALID


def cmd_bound(args) -> int:
    doc, diags = _load_doc(args.scenario)
    sc = None
    if doc is not None:
        sc, diags = scn.parse(doc)
    if diags:
        _report(diags)
        return EXIT_INVALID
    reports, _ = effective_bounds(sc)
    lab = sc.label
    print("flow_id,class,port,sigma_tu,rho,leftover_rate,leftover_latency_tu,bound_tu,bound_decimal_tu,bound_ticks")
    unstable = False
    for r in reports:
        head = f"{r.flow_id},{lab(r.cls)},{r.port},{r.arrival.sigma},{r.arrival.rho}"
        if r.bound is None:
            unstable = True
            svc = f"{r.service.rate},{r.service.latency}" if r.service else ","
            print(f"{head},{svc},Unstable,,  # {r.unstable}")
            continue
        b = r.bound
        print(f"{head},{r.service.rate},{r.service.latency},{b.bound},{_decimal(b.bound)},{b.bound_ticks}")
    if sc.bounds:
        for c, v in sorted(sc.bounds.items()):
            print(f"# override: class {lab(c)} threshold {v} T.U ({sc.timebase.ceil_ticks(v)} ticks)")
    return EXIT_UNSTABLE if unstable else EXIT_OK


def cmd_run(args) -> int:
    doc, diags = _load_doc(args.scenario)
    sc = None
    if doc is not None:
        ftc = None if args.ftc is None else args.ftc == "on"
        horizon = None if args.horizon is None else _horizon_arg(args.horizon)
        doc = scn.with_overrides(doc, ftc=ftc, horizon=horizon)
        sc, diags = scn.parse(doc)
    if diags:
        _report(diags)
        return EXIT_INVALID
    try:
        sim = build(sc)
    except UnstableBounds as e:
        for r in e.reports:
            print(f"Unstable: flow {r.flow_id} class {sc.label(r.cls)} port {r.port}: {r.unstable}", file=sys.stderr)
        return EXIT_UNSTABLE
    trace = sim.run()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.json").write_text(scn.canonical_json(sc.raw))
    export_csv(trace, out)
    write_meta(trace, out)
    lines = [f"scenario {sc.raw.get('name', Path(args.scenario).stem)} digest {trace.digest[:16]}",
             f"horizon {format_tu(sc.horizon, sc.tick_scale)} T.U, events {sim.summary.dispatched}"]
    c = sim.counts()
    lines.append("frames " + " ".join(f"{k}={v}" for k, v in c.items()))
    for cls in range(sc.switch.priorities, 0, -1):
        try:
            lines.append(summary(trace, cls).describe(sc.tick_scale, sc.switch.priorities))
        except EmptyClass:
            pass
    lines.append(f"faults {len(trace.faults)}, compensation changes {len(trace.decisions)}")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_plot(args) -> int:
    trace = read_trace(args.trace_dir)
    cls = parse_class(args.cls)
    scale = trace.ticks_per_tu
    cap = None if args.cap is None else math.ceil(scn.parse_tu(_horizon_arg(args.cap)) * scale)
    bound = None if args.bound is None else math.ceil(scn.parse_tu(_horizon_arg(args.bound)) * scale)
    try:
        plot(trace, cls, args.out, bound=bound, cap=cap, title=args.title)
    except EmptyClass as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    print(f"wrote {args.out} ({class_label(cls, trace.priorities)}, {len(trace.of_class(cls))} frames)")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncswitch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a scenario and write its trace")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--ftc", choices=["on", "off"], help="override ftc.enabled")
    p.add_argument("--horizon", help="override the horizon (T.U)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bound", help="print network-calculus delay bounds")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("validate", help="list scenario problems")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("plot", help="plot delays of one class from a trace directory")
    p.add_argument("trace_dir")
    p.add_argument("--class", dest="cls", required=True, help="high, mean or low")
    p.add_argument("--out", required=True)
    p.add_argument("--cap", help="omit frames with delay above this (T.U)")
    p.add_argument("--bound", help="threshold line (T.U); defaults to the run's threshold")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
