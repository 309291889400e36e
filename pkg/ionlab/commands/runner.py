"""Row scheduling, error isolation and report assembly shared by the commands."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

from pydantic import ValidationError

from ionlab.config import Settings
from ionlab.exceptions import ConfigurationError, ConvergenceError
from ionlab.models import ExperimentReport, FitResult, SearchOptions
from ionlab.utils.latency_tracker import latency_tracker
from ionlab.utils.logging_config import get_metrics_logger

logger = logging.getLogger(__name__)
metrics_logger = get_metrics_logger(__name__)

Row = Dict[str, Any]

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONVERGENCE = 2
EXIT_BAD_ARGUMENTS = 3


def search_options(settings: Settings, **overrides: Any) -> SearchOptions:
    """SearchOptions seeded from the resolved settings."""
    values = {
        "restarts": settings.restarts,
        "max_iterations": settings.max_iterations,
        "tol": settings.tol,
        "seed": settings.seed,
    }
    values.update(overrides)
    return SearchOptions(**values)


def worker_count(jobs: int) -> int:
    return jobs if jobs > 0 else (os.cpu_count() or 1)


def _guarded(worker: Callable[[Row], Row], task: Row) -> Row:
    """Run one row; failures become a status instead of aborting the table."""
    try:
        row = worker(task)
        row.setdefault("status", "ok")
        return row
    except ConfigurationError as e:
        logger.error(f"Row {task} rejected: {e}")
        return {**task, "status": f"error: {e}", "exit_code": EXIT_BAD_ARGUMENTS}
    except ConvergenceError as e:
        logger.error(f"Row {task} did not converge: {e}")
        return {**task, "status": f"error: {e}", "exit_code": EXIT_CONVERGENCE, "last_residual": e.last_residual}
    except ValidationError as e:
        logger.error(f"Row {task} rejected: {e}")
        return {**task, "status": f"error: {e.errors()[0]['msg']}", "exit_code": EXIT_BAD_ARGUMENTS}
    except Exception as e:
        # Degenerate end states and domain errors inside a row are numerical failures
        logger.error(f"Row {task} failed: {e}")
        return {**task, "status": f"error: {e}", "exit_code": EXIT_CONVERGENCE}


def run_rows(worker: Callable[[Row], Row], tasks: Sequence[Row], jobs: int, key: Sequence[str]) -> List[Row]:
    """
    Evaluate independent rows, in a process pool when more than one worker is requested.

    Args:
        worker: Module-level function mapping a task to a row
        tasks: Task dicts; their fields are echoed into failed rows
        jobs: Worker count (0 = one per processor)
        key: Fields that order the emitted rows

    Returns:
        Rows sorted by key, independent of the schedule
    """
    count = min(worker_count(jobs), max(1, len(tasks)))
    task_runner = partial(_guarded, worker)
    if count == 1:
        rows = [task_runner(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=count) as pool:
            rows = list(pool.map(task_runner, tasks))
    return sorted(rows, key=lambda row: tuple(row.get(field) for field in key))


def rows_exit_code(rows: Iterable[Row]) -> int:
    """Worst exit code carried by failed rows."""
    return max((row.get("exit_code", EXIT_OK) for row in rows), default=EXIT_OK)


class CommandRun:
    """Times a command and assembles its report."""

    def __init__(self, command: str, parameters: Dict[str, Any], seed: Optional[int] = None):
        self.command = command
        self.parameters = parameters
        self.seed = seed
        self._timer = latency_tracker.start_step(f"cmd_{command}")

    def finish(self, records: List[Row], verdicts: Dict[str, Any], exit_code: int,
               fit: Optional[FitResult] = None) -> ExperimentReport:
        metrics = latency_tracker.end_step(self._timer, success=exit_code == EXIT_OK)
        wall_time = metrics.seconds if metrics else 0.0
        report = ExperimentReport(
            command=self.command,
            parameters=self.parameters,
            records=records,
            fit=fit,
            verdicts=verdicts,
            seed=self.seed,
            wall_time=wall_time,
            exit_code=exit_code,
        )
        logger.info(f"{self.command}: {len(records)} records in {wall_time:.2f}s, exit code {exit_code}")
        summary = latency_tracker.get_metrics_summary()
        for step, entry in sorted(summary["steps"].items()):
            metrics_logger.log_workflow_step(
                "timing",
                f"{step}: {entry['count']} calls, {entry['failures']} failed",
                level=logging.DEBUG,
                workflow_context={"evaluations": entry["count"], "duration_ms": entry["total_duration_ms"]},
            )
        return report
