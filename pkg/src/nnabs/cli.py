"""Command-line front end.

Exit codes: 0 success / verified, 1 not verified, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._jsonfmt import dumps
from .analyzer import (CONFIGS, AnalysisConfig, analyze, check_robustness, max_verifiable_delta,
                       report_to_dict, soundness_sample, stable_stats)
from .errors import NnabsError
from .hints import export_hints
from .network import REGION_KINDS, RobustnessQuery, build_region, load_input, load_network

EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2


def _delta_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of floats: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", required=True, help="model JSON file")
    common.add_argument("--input", required=True, help="CSV file with one row: the center input x0")
    common.add_argument("--domain", choices=("box", "zono"), default="box")
    common.add_argument("--symprop", choices=("on", "off"), default="on")
    common.add_argument("--region", choices=REGION_KINDS, default="linf")
    common.add_argument("--label", type=int, default=None,
                        help="target class (default: argmax of the network output at x0)")
    common.add_argument("--out", default=None, help="write the machine-readable result here")
    common.add_argument("--samples", type=int, default=0,
                        help="also run this many concrete samples as a soundness check")
    common.add_argument("--eps-out", type=float, default=0.0, dest="eps_out",
                        help="relative outward slack added to every computed interval")

    parser = argparse.ArgumentParser(prog="nnabs", description="Abstract interpretation of ReLU networks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("analyze", "bounds and neuron phases for one region"),
                       ("verify", "local robustness check"),
                       ("hints", "export per-neuron hints for an SMT verifier"),
                       ("compare", "output bounds under Box, Zono, SymBox, SymZono")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--delta", type=float, required=True)
    p = sub.add_parser("maxdelta", parents=[common], help="largest verifiable delta on a grid")
    p.add_argument("--deltas", type=_delta_list, required=True, help="ascending, comma-separated")
    return parser


def _config(args) -> AnalysisConfig:
    return AnalysisConfig(args.domain, args.symprop == "on", args.eps_out)


def _fmt_bounds(lo, hi) -> str:
    return ", ".join(f"[{l:.6g}, {h:.6g}]" for l, h in zip(lo, hi))


def _write(path: str | None, doc) -> None:
    if path:
        Path(path).write_text(dumps(doc) + "\n", encoding="utf-8")


def _cmd_analyze(args, net, x0) -> int:
    q = RobustnessQuery(x0, args.delta, args.region, args.label)
    region = build_region(q)
    report = analyze(net, region, _config(args))
    print(f"{report.config.name}: {len(report.layers)} layers analysed in {report.wall_time:.3f}s")
    for lr in report.layers:
        line = f"  layer {lr.index} ({lr.kind}, {len(lr.names)} neurons)"
        if lr.phases is not None:
            counts = {ph: sum(p.value == ph for p in lr.phases) for ph in ("active", "inactive", "uncertain")}
            line += " " + " ".join(f"{k}={v}" for k, v in counts.items())
        print(line)
    print(f"output bounds: {_fmt_bounds(report.output_lo, report.output_hi)}")
    print("stability: " + " ".join(f"{k}={v}" for k, v in stable_stats(report).items()))
    doc = report_to_dict(report)
    if args.samples > 0:
        bad = soundness_sample(net, region, report, args.samples)
        print(f"soundness sampling: {bad} of {args.samples} samples outside the bounds")
        doc["soundness"] = {"samples": args.samples, "violations": bad}
    _write(args.out, doc)
    return EXIT_OK


def _cmd_verify(args, net, x0) -> int:
    q = RobustnessQuery(x0, args.delta, args.region, args.label)
    report = analyze(net, build_region(q), _config(args))
    verdict = check_robustness(report, q.resolved_label(net))
    worst = min(verdict.margins.values(), default=float("inf"))
    print(f"{report.config.name} delta={args.delta} label={verdict.label}: {verdict.status} "
          f"(worst margin {worst:.6g}, {verdict.method})")
    _write(args.out, report_to_dict(report, verdict))
    return EXIT_OK if verdict.verified else EXIT_UNKNOWN


def _cmd_maxdelta(args, net, x0) -> int:
    best = max_verifiable_delta(net, x0, args.deltas, _config(args), args.region, args.label)
    print(f"largest verified delta: {best if best is not None else 'none'}")
    _write(args.out, {"deltas": args.deltas, "max_delta": best})
    return EXIT_OK if best is not None else EXIT_UNKNOWN


def _cmd_hints(args, net, x0) -> int:
    if not args.out:
        raise argparse.ArgumentTypeError("hints needs --out")
    q = RobustnessQuery(x0, args.delta, args.region, args.label)
    report = analyze(net, build_region(q), _config(args))
    hints = export_hints(report, net, q, args.out)
    print(f"wrote {len(hints.neurons)} neuron records ({len(hints.decided())} decided) to {args.out}")
    return EXIT_OK


def _cmd_compare(args, net, x0) -> int:
    q = RobustnessQuery(x0, args.delta, args.region, args.label)
    region = build_region(q)
    label = q.resolved_label(net)
    doc = {}
    print(f"{'config':8} {'verdict':8} {'uncertain':>9}  output bounds")
    for name, cfg in CONFIGS.items():
        cfg = AnalysisConfig(cfg.domain, cfg.symprop, args.eps_out)
        report = analyze(net, region, cfg)
        verdict = check_robustness(report, label)
        stats = stable_stats(report)
        print(f"{name:8} {verdict.status:8} {stats['uncertain']:>9}  "
              f"{_fmt_bounds(report.output_lo, report.output_hi)}")
        doc[name] = report_to_dict(report, verdict)
    _write(args.out, doc)
    return EXIT_OK


COMMANDS = {"analyze": _cmd_analyze, "verify": _cmd_verify, "maxdelta": _cmd_maxdelta,
            "hints": _cmd_hints, "compare": _cmd_compare}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags, 0 on --help
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        net = load_network(args.model)
        x0 = load_input(args.input)
        if x0.size != net.input_dim:
            raise NnabsError(f"input has {x0.size} values, model expects {net.input_dim}")
        return COMMANDS[args.command](args, net, x0)
    except (OSError, NnabsError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"nnabs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
