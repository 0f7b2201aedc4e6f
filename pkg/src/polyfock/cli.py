"""Command-line harness: build the truncated model, run a suite, report.

Subcommands ``verify``, ``toeplitz``, ``berezin``, and ``fourier`` each run
one check suite and emit a JSON report; ``report`` runs all four and writes
a JSON report, a CSV summary, and static figures into an output directory.

Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage error
(bad flags or an unusable truncation), 3 precondition violation (point
outside the hyperball, unreadable operator file).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .basis import TruncationSpec
from .berezin import radial_model
from .suites import (
    Report,
    RunConfig,
    berezin_suite,
    fourier_suite,
    toeplitz_suite,
    verify_suite,
)

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=1, help="number of tensor factors")
    p.add_argument("--n", type=int, nargs="+", default=[1], help="alphabet size per factor")
    p.add_argument("--m", type=int, nargs="+", default=[1], help="weight order per factor")
    p.add_argument("--L", type=int, nargs="+", default=[6], help="truncation degree per factor")
    p.add_argument("--d", type=int, default=1, help="coefficient space dimension")
    p.add_argument("--seed", type=int, default=1, help="base seed for random instances")
    p.add_argument("--tol", type=float, default=None, help="override the suite tolerance")
    p.add_argument("--out", type=str, default=None, help="output path (JSON; directory for report)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyfock",
        description="Truncated poly-hyperball models: operator, Toeplitz, and kernel checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="operator-identity checks")
    _add_spec_flags(p_verify)

    p_toe = sub.add_parser("toeplitz", help="Toeplitz structure checks on one operator")
    _add_spec_flags(p_toe)
    p_toe.add_argument(
        "--source",
        choices=("random-symbol", "random-dense", "file"),
        default="random-symbol",
        help="where the operator comes from",
    )
    p_toe.add_argument("--operator", type=str, default=None, help="operator file for --source file")

    p_ber = sub.add_parser("berezin", help="kernel and transform checks at one point")
    _add_spec_flags(p_ber)
    p_ber.add_argument(
        "--radial",
        type=float,
        default=0.5,
        help="radius of the radial model point (0 <= r < 1)",
    )

    p_fou = sub.add_parser("fourier", help="homogeneous decomposition checks")
    _add_spec_flags(p_fou)

    p_rep = sub.add_parser("report", help="run all suites; write JSON, CSV, and figures")
    _add_spec_flags(p_rep)
    p_rep.add_argument(
        "--radial", type=float, default=0.5, help="radius for the berezin section"
    )

    return parser


def _build_spec(parser: argparse.ArgumentParser, args: argparse.Namespace) -> TruncationSpec:
    try:
        spec = TruncationSpec.make(args.k, args.n, args.m, args.L, args.d)
    except ValueError as exc:
        parser.error(str(exc))
    for Li, mi in zip(spec.L, spec.m):
        if Li < mi:
            parser.error(
                f"truncation degree {Li} leaves no interior for guard band {mi}"
            )
    return spec


def _emit(report: Report, out: Optional[str]) -> None:
    text = report.to_json_str() + "\n"
    if out:
        Path(out).write_text(text)
        print(f"{report.suite}: {'pass' if report.overall_pass else 'FAIL'} -> {out}")
    else:
        sys.stdout.write(text)


def _exit_for(report: Report) -> int:
    return EXIT_PASS if report.overall_pass else EXIT_CHECK_FAILURE


def _run_report(config: RunConfig, radial: float, out_dir: str) -> int:
    from .figures import render_report_figures

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = [
        verify_suite(config),
        toeplitz_suite(RunConfig(config.spec, "toeplitz", config.seed, config.tol)),
        berezin_suite(
            RunConfig(config.spec, "berezin", config.seed, config.tol),
            radial_model(config.spec, radial),
        ),
        fourier_suite(RunConfig(config.spec, "fourier", config.seed, config.tol)),
    ]
    overall = all(r.overall_pass for r in reports)
    combined = {
        "spec": config.spec.to_json(),
        "seed": config.seed,
        "suites": [r.to_json() for r in reports],
        "overall_pass": overall,
    }
    (out / "report.json").write_text(json.dumps(combined, indent=2, sort_keys=True) + "\n")

    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["suite", "check", "pass", "residual", "guard_band", "elapsed_ms"])
        for r in reports:
            for c in r.checks:
                writer.writerow(
                    [
                        r.suite,
                        c.name,
                        "true" if c.passed else "false",
                        f"{c.residual:.6e}",
                        " ".join(str(g) for g in c.guard_band),
                        f"{c.elapsed_ms:.3f}",
                    ]
                )

    figures = render_report_figures(config.spec, config.seed, reports, out)
    for name in ["report.json", "summary.csv"] + [f.name for f in figures]:
        print(f"wrote {out / name}")
    print(f"overall: {'pass' if overall else 'FAIL'}")
    return EXIT_PASS if overall else EXIT_CHECK_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    spec = _build_spec(parser, args)

    try:
        if args.command == "verify":
            report = verify_suite(RunConfig(spec, "verify", args.seed, args.tol))
        elif args.command == "toeplitz":
            config = RunConfig(
                spec,
                "toeplitz",
                args.seed,
                args.tol,
                source=args.source,
                operator_path=args.operator,
            )
            if args.source == "file" and not args.operator:
                parser.error("--source file requires --operator")
            report = toeplitz_suite(config)
        elif args.command == "berezin":
            point = radial_model(spec, args.radial)
            report = berezin_suite(RunConfig(spec, "berezin", args.seed, args.tol), point)
        elif args.command == "fourier":
            report = fourier_suite(RunConfig(spec, "fourier", args.seed, args.tol))
        else:  # report
            return _run_report(
                RunConfig(spec, "report", args.seed, args.tol),
                args.radial,
                args.out or "report_out",
            )
    except FileNotFoundError as exc:
        print(f"error: cannot read {exc.filename or exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    _emit(report, args.out)
    return _exit_for(report)


if __name__ == "__main__":
    sys.exit(main())
