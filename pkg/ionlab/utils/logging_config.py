"""Simplified logging configuration for the laboratory."""

import logging
import sys
from typing import Any, Dict, Optional


class SimpleFormatter(logging.Formatter):
    """Simple formatter with optional solver metrics."""

    def __init__(self, include_metrics: bool = False):
        super().__init__("%(asctime)s %(levelname)s %(name)s: %(message)s")
        self.include_metrics = include_metrics

    def format(self, record):
        """Format log record with optional metrics."""
        base_msg = super().format(record)

        if self.include_metrics and hasattr(record, "metrics"):
            metrics = record.metrics
            base_msg += f" [evals: {metrics.get('evaluations', 0)}, duration: {metrics.get('duration_ms', 0):.1f}ms]"

        return base_msg


class MetricsLogger:
    """Logger for multi-step solver workflows."""

    def __init__(self, name: str):
        """Initialize metrics logger."""
        self.logger = logging.getLogger(name)

    def log_workflow_step(self, step_name: str, message: str, level: int = logging.INFO,
                          workflow_context: Optional[Dict[str, Any]] = None):
        """Log a workflow step, attaching context as record metrics."""
        if self.logger.isEnabledFor(level):
            self.logger.log(level, f"[{step_name}] {message}", extra={"metrics": workflow_context or {}})

    def log_search(self, label: str, best_value: float, evaluations: int, converged: bool):
        """Log the outcome of a global search."""
        status = "converged" if converged else "budget exhausted"
        self.log_workflow_step(
            "search",
            f"{label}: best={best_value:.12g} ({status})",
            workflow_context={"evaluations": evaluations},
        )


def setup_logging(log_level: str = "INFO", include_metrics: bool = False):
    """
    Setup simplified logging configuration.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        include_metrics: Whether to include solver metrics in log messages
    """
    # Clear existing handlers
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    level = getattr(logging, log_level.upper(), logging.INFO)

    # Create console handler
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(SimpleFormatter(include_metrics=include_metrics))

    # Configure root logger
    root_logger.setLevel(level)
    root_logger.addHandler(console_handler)

    # Reduce noise from numerical libraries
    logging.getLogger("ionlab").setLevel(level)
    logging.getLogger("scipy").setLevel(logging.WARNING)
    logging.getLogger("numpy").setLevel(logging.WARNING)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging configured - Level: {log_level}, Metrics: {include_metrics}")


def get_metrics_logger(name: str) -> MetricsLogger:
    """Get a metrics logger instance."""
    return MetricsLogger(name)
