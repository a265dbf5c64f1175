# geolab - universal-cover experiments on flat tori and hyperbolic surfaces
"""
geolab - command-line experiment runner

Runs the torus, hyperbolic, convexity and half-space experiments through the
experiment graph and writes a JSON report (plus an optional CSV of samples).

    python app.py torus --config configs/torus_generic.json --out out/torus.json
    python app.py all --samples.trials 1000 --record-timing false

Exit code 0 iff every asserted claim passed; 2 on a configuration error.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

from src.config import (
    EXPERIMENTS,
    add_override_arguments,
    collect_overrides,
    configure_logging,
    load_config,
    thread_count,
)
from src.errors import ConfigError
from src.graph import run_all, run_experiments
from src.reports import write_report, write_samples_csv

logger = logging.getLogger("geolab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geolab",
        description="Cut-locus orders, local maxima of the distance, and convexity checks on quotient manifolds.",
    )
    parser.add_argument("experiment", choices=EXPERIMENTS + ("all",), help="experiment to run, or all of them")
    parser.add_argument("--config", default=None, help="JSON config document; flags override its fields")
    parser.add_argument("--log-level", default=None, help="overrides GEOLAB_LOG_LEVEL")
    add_override_arguments(parser)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    # Load environment variables
    load_dotenv()

    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        configure_logging(args.log_level)
        config = load_config(args.config)
        overrides = collect_overrides(args)
        if args.experiment != "all":
            overrides["experiment"] = args.experiment
        config = config.with_overrides(overrides).validate()
        workers = thread_count()
    except ConfigError as exc:
        print(f"geolab: configuration error: {exc}", file=sys.stderr)
        return 2

    experiments = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    logger.info("[RUN] Running %s with %d worker thread(s)", ", ".join(experiments), workers)

    if args.experiment == "all":
        reports = run_all(config, max_workers=workers)
    else:
        reports = run_experiments(config, experiments, max_workers=workers)
    doc = write_report(reports, config.out)
    if config.csv:
        write_samples_csv(reports, config.csv)

    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        print(f"{report.experiment}: {status} ({sum(c.passed for c in report.claims)}/{len(report.claims)} claims)")
        if report.error:
            print(f"  error: {report.error}")
        for claim in report.claims:
            if not claim.passed:
                print(f"  FAIL {claim.claim_id}: measured {claim.measured}, expected {claim.expected}")

    return 0 if doc["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
