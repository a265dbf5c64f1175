"""
Shared plumbing for experiment nodes: report creation, error capture and timing.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import asdict
from typing import Callable, Iterator, Optional

from ..config import ExperimentConfig
from ..errors import GeolabError
from ..reports import ExperimentReport
from ..state import ExperimentState

logger = logging.getLogger(__name__)

Runner = Callable[[ExperimentConfig, Optional[int]], ExperimentReport]


def new_report(experiment: str, config: ExperimentConfig) -> ExperimentReport:
    return ExperimentReport(
        experiment=experiment,
        config=config.to_dict(),
        tolerances=asdict(config.tolerances),
    )


@contextmanager
def experiment_run(report: ExperimentReport, config: ExperimentConfig) -> Iterator[ExperimentReport]:
    """
    Run an experiment body, turning GeolabError into a report diagnostic.

    Other exceptions propagate. The wall-clock duration is recorded only when
    config.record_timing is set, so untimed reports are reproducible byte for byte.
    """
    start = time.perf_counter()
    logger.info("[RUN] Starting %s", report.experiment)
    try:
        yield report
    except GeolabError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        best = getattr(exc, "best", None)
        if best is not None:
            report.measurements["best_iterate"] = best.to_dict()
        logger.error("[RUN] %s failed: %s", report.experiment, report.error)
    finally:
        if config.record_timing:
            report.duration_s = round(time.perf_counter() - start, 3)
    logger.info("[RUN] Finished %s: %s", report.experiment, "PASS" if report.passed else "FAIL")


def make_experiment_node(name: str, runner: Runner, max_workers: Optional[int]) -> Callable[[ExperimentState], dict]:
    """Wrap a runner as a graph node that files its report and marks itself complete."""
    def experiment_node(state: ExperimentState) -> dict:
        report = runner(state["config"], max_workers)
        reports = dict(state.get("reports", {}))
        reports[name] = report
        completed = list(state.get("completed", []))
        completed.append(name)
        return {
            "reports": reports,
            "completed": completed,
        }

    return experiment_node
