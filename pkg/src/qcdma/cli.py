"""Command-line entry point: design-filter, run and verify.

Exit codes: 0 ok, 2 config error, 3 invariant failure, 4 capacity cap.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .errors import CapacityError, ConfigError
from .filters import filter_csv, response_csv
from .serialize import dumps, write

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_CAPACITY = 0, 2, 3, 4


def _design_filter(args) -> int:
    from .scenario import load_scenario

    sc = load_scenario(args.config)
    fp = sc.build_filter()
    out = Path(args.out)
    write(out / "filter_taps.csv", filter_csv(fp))
    write(out / "filter_response.csv", response_csv(fp, args.points))
    print(f"unitarity_defect={fp.unitarity_defect:.17g} power_defect={fp.power_defect:.17g} "
          f"cross_defect={fp.cross_defect:.17g}")
    return EXIT_OK


def _run(args) -> int:
    from .runner import run_scenario
    from .scenario import load_scenario

    sc = load_scenario(args.config)
    summary = run_scenario(sc, Path(args.out), jobs=args.jobs)
    for name in summary["files"]:
        print(Path(args.out) / name)
    return EXIT_OK


def _verify(args) -> int:
    from .verify import run_suite

    checks = run_suite(args.scale, inject_broken=args.inject_broken_filter)
    for c in checks:
        print(c.line(), file=sys.stderr)
    report = {"scale": args.scale, "passed": all(c.passed for c in checks), "checks": [c.record() for c in checks]}
    text = dumps(report)
    if args.out:
        write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["passed"] else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcdma", description="Quantum spread-spectrum CDMA simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("design-filter", help="design the scenario's filter and write tap and response CSVs")
    d.add_argument("config", help="scenario JSON file")
    d.add_argument("--out", default="out", help="output directory")
    d.add_argument("--points", type=int, default=1024, help="frequency points in the response CSV")
    d.set_defaults(func=_design_filter)

    r = sub.add_parser("run", help="propagate a scenario and write intensities, statistics and coefficients")
    r.add_argument("config", help="scenario JSON file")
    r.add_argument("--out", default="out", help="output directory")
    r.add_argument("--jobs", type=int, default=1, help="worker processes for seed sweeps")
    r.set_defaults(func=_run)

    v = sub.add_parser("verify", help="run the invariant suite and emit a JSON report")
    v.add_argument("--scale", choices=["quick", "default", "full"], default="default")
    v.add_argument("--out", help="write the report here instead of stdout")
    v.add_argument("--inject-broken-filter", action="store_true", help="add a deliberately non-unitary filter")
    v.set_defaults(func=_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity cap: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
