"""Wall-clock accounting for solver calls and commands."""

import logging
import time
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from functools import wraps
from itertools import count
from typing import Any, Callable, Dict, Iterator, List, Optional, Tuple

logger = logging.getLogger(__name__)

# Steps slower than this are reported at INFO
SLOW_STEP_MS = 1000.0


@dataclass(frozen=True)
class StepTiming:
    """One finished step."""
    step_name: str
    duration_ms: float
    success: bool
    error_message: Optional[str] = None

    @property
    def seconds(self) -> float:
        return self.duration_ms / 1000.0


class LatencyTracker:
    """
    Keeps the timings of named steps for the lifetime of a process.

    Timers are opened with start_step and closed with end_step; the
    decorator and the timed() context manager do both around a call.
    Worker processes have their own tracker, so a command only sees the
    steps run in its own process.
    """

    def __init__(self):
        self.history: List[StepTiming] = []
        self._open: Dict[str, Tuple[str, float]] = {}
        self._ids = count()

    def start_step(self, step_name: str) -> str:
        """Open a timer and return its id."""
        timer_id = f"{step_name}#{next(self._ids)}"
        self._open[timer_id] = (step_name, time.perf_counter())
        return timer_id

    def end_step(self, timer_id: str, success: bool = True, error_message: Optional[str] = None) -> Optional[StepTiming]:
        """Close a timer; unknown ids are logged and give None."""
        opened = self._open.pop(timer_id, None)
        if opened is None:
            logger.warning(f"No open timer {timer_id}")
            return None

        step_name, started = opened
        timing = StepTiming(step_name, (time.perf_counter() - started) * 1000, success, error_message)
        self.history.append(timing)

        if not success:
            logger.error(f"{step_name} failed after {timing.duration_ms:.1f}ms: {error_message}")
        elif timing.duration_ms > SLOW_STEP_MS:
            logger.info(f"{step_name} took {timing.seconds:.2f}s")
        return timing

    @contextmanager
    def timed(self, step_name: str) -> Iterator[None]:
        timer_id = self.start_step(step_name)
        try:
            yield
        except Exception as e:
            self.end_step(timer_id, success=False, error_message=str(e))
            raise
        self.end_step(timer_id)

    def get_metrics_summary(self) -> Dict[str, Any]:
        """Count, failures, total and mean duration per step name."""
        steps: Dict[str, Dict[str, float]] = defaultdict(lambda: {"count": 0, "failures": 0, "total_duration_ms": 0.0})
        for timing in self.history:
            entry = steps[timing.step_name]
            entry["count"] += 1
            entry["failures"] += not timing.success
            entry["total_duration_ms"] += timing.duration_ms
        for entry in steps.values():
            entry["average_duration_ms"] = entry["total_duration_ms"] / entry["count"]
        return {
            "total_steps": len(self.history),
            "total_duration_ms": sum(t.duration_ms for t in self.history),
            "steps": dict(steps),
        }

    def reset(self):
        self.history.clear()
        self._open.clear()


def track_latency(step_name: str):
    """Record every call of the decorated function under step_name."""
    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            with latency_tracker.timed(step_name):
                return func(*args, **kwargs)
        return wrapper
    return decorator


# Global latency tracker instance
latency_tracker = LatencyTracker()
