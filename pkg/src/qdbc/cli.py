"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 data/format error,
4 numerical/degenerate error, 5 no accepted shots.
"""
from __future__ import annotations

import argparse
import json
import re
import sys

from . import classifier as clf
from .data import DataFormatError, DegeneratePointError
from .experiment import (
    OUTPUT_FORMATS,
    PROBLEM_KEYS,
    RUN_MODES,
    ExperimentConfig,
    render_report,
    run_experiment,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_NO_ACCEPTANCE = 5

CONFIG_KEYS = set(PROBLEM_KEYS) | {
    "mode", "shots", "seed", "output", "export_cqasm", "iris", "standardize_over", "raw_reduction",
}


class UsageError(ValueError):
    pass


def _floats(text: str, n: int) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
    return vals


def _indices(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated integers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qdbc",
        description="Two-qubit distance-based classifier: exact, sampled and classical runs.",
    )
    # let comma-separated negative values such as -3.54,-1.97 through as arguments
    p._negative_number_matcher = re.compile(r"^-\.?\d[\d.,eE+-]*$")
    p.add_argument("--config", help="JSON file with the same keys as the flags")
    p.add_argument("--preset", help="published data set: dataset1 or dataset2")
    p.add_argument("--indices", type=_indices, metavar="A,B,C",
                   help="0-based Iris rows for x0 (setosa), x1 (versicolor) and the test point")
    p.add_argument("--point-x0", type=lambda s: _floats(s, 2), metavar="X,Y")
    p.add_argument("--point-x1", type=lambda s: _floats(s, 2), metavar="X,Y")
    p.add_argument("--point-test", type=lambda s: _floats(s, 2), metavar="X,Y")
    p.add_argument("--angles", type=lambda s: _floats(s, 2), metavar="PHI,OMEGA",
                   help="encoding angles of x1 and the test point (x0 at angle 0)")
    p.add_argument("--mode", choices=RUN_MODES)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", choices=OUTPUT_FORMATS)
    p.add_argument("--export-cqasm", metavar="PATH")
    p.add_argument("--iris", metavar="PATH", help="Iris CSV (defaults to the bundled copy)")
    p.add_argument("--standardize-over", choices=("retained", "all"))
    p.add_argument("--raw-reduction", action="store_true", default=None,
                   help="apply the angle formula to the raw ratio (no label-orientation folding)")
    return p


def _problem_from_args(args) -> dict:
    point_flags = (args.point_x0, args.point_x1, args.point_test)
    problem: dict = {}
    if args.preset is not None:
        problem["preset"] = args.preset
    if args.indices is not None:
        problem["indices"] = args.indices
    if any(v is not None for v in point_flags):
        if not all(v is not None for v in point_flags):
            raise UsageError("--point-x0, --point-x1 and --point-test must be given together")
        problem["points"] = dict(zip(("x0", "x1", "x_test"), point_flags))
    if args.angles is not None:
        problem["angles"] = {"phi": args.angles[0], "omega": args.angles[1]}
    if len(problem) > 1:
        raise UsageError(f"conflicting problem specs: {', '.join(problem)}")
    return problem


def parse_config(argv: list[str] | None = None) -> ExperimentConfig:
    """Merge an optional JSON config with command-line flags (flags win)."""
    parser = build_parser()
    args = parser.parse_args(argv)

    values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid config JSON: {exc}") from None
        if not isinstance(values, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(values) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    file_problem = {k: values.pop(k) for k in PROBLEM_KEYS if k in values}
    if len(file_problem) > 1:
        raise UsageError(f"conflicting problem specs in config: {', '.join(file_problem)}")

    flag_problem = _problem_from_args(args)
    problem = flag_problem or file_problem
    if not problem:
        raise UsageError("no problem given (use --preset, --indices, --point-* or --angles)")

    for key in ("mode", "shots", "seed", "output", "export_cqasm", "iris",
                "standardize_over", "raw_reduction"):
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    try:
        return ExperimentConfig(problem=problem, **values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def main(argv: list[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"qdbc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = run_experiment(config)
    except clf.NoAcceptanceError as exc:
        print(f"qdbc: {exc}", file=sys.stderr)
        return EXIT_NO_ACCEPTANCE
    except (clf.DegenerateRatioError, clf.NonUnitVectorError, DegeneratePointError) as exc:
        print(f"qdbc: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataFormatError, OSError, IndexError) as exc:
        print(f"qdbc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"qdbc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    sys.stdout.write(render_report(report, config.output))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
