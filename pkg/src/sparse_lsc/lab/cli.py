"""Command line entry point: ``lab <experiment> --config <path> [options]``."""
from __future__ import annotations

import argparse
import sys

from .config import EXPERIMENTS, ConfigError, load_config
from .report import write_report
from .runner import run

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _u64(text):
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description="Run a sparse random matrix experiment.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="YAML config file")
    p.add_argument("--seed", type=_u64)
    p.add_argument("--trials", type=_positive)
    p.add_argument("--workers", type=_positive, help="default: $LAB_WORKERS or 1")
    p.add_argument("--out", help="output directory (default: out_dir from the config)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    overrides = {"experiment": args.experiment, "seed": args.seed, "trials": args.trials,
                 "workers": args.workers}
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"lab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run(cfg)
    out_dir = args.out or cfg.out_dir
    write_report(report, out_dir)
    status = "PASS" if report.passed else "FAIL"
    print(f"{cfg.experiment}: {status} ({len(report.rows)} rows, {report.wall_time:.1f} s) -> {out_dir}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
