"""Unit tests for latency tracking and metrics logging."""

import logging

import pytest

from ionlab.utils.latency_tracker import latency_tracker, track_latency
from ionlab.utils.logging_config import SimpleFormatter, get_metrics_logger


@pytest.mark.unit
class TestLatencyTracker:
    """Test cases for the latency tracker."""

    def test_start_and_end(self):
        timer = latency_tracker.start_step("solve")
        metrics = latency_tracker.end_step(timer)

        assert metrics.step_name == "solve"
        assert metrics.duration_ms >= 0
        assert latency_tracker.get_metrics_summary()["steps"]["solve"]["count"] == 1

    def test_unknown_timer(self):
        assert latency_tracker.end_step("missing") is None

    def test_decorator_records_failures(self):
        @track_latency("fails")
        def fails():
            raise RuntimeError("boom")

        with pytest.raises(RuntimeError):
            fails()
        summary = latency_tracker.get_metrics_summary()
        assert summary["steps"]["fails"]["failures"] == 1

    def test_timed_block(self):
        with latency_tracker.timed("bisect"):
            pass
        with pytest.raises(ValueError):
            with latency_tracker.timed("bisect"):
                raise ValueError("bracket")

        timings = [t for t in latency_tracker.history if t.step_name == "bisect"]
        assert [t.success for t in timings] == [True, False]
        assert timings[1].error_message == "bracket"
        assert timings[0].seconds == pytest.approx(timings[0].duration_ms / 1000)


@pytest.mark.unit
class TestMetricsLogger:
    """Test cases for the workflow logger."""

    def test_search_line(self, caplog):
        logger = get_metrics_logger("ionlab.test")
        with caplog.at_level(logging.INFO, logger="ionlab.test"):
            logger.log_search("QMinimax N=2 d=3", 0.5, 120, True)

        assert "[search] QMinimax N=2 d=3: best=0.5 (converged)" in caplog.text
        assert caplog.records[-1].metrics == {"evaluations": 120}

    def test_formatter_appends_metrics(self):
        record = logging.LogRecord("ionlab", logging.INFO, __file__, 1, "step done", None, None)
        record.metrics = {"evaluations": 7, "duration_ms": 12.5}

        assert SimpleFormatter(include_metrics=True).format(record).endswith("[evals: 7, duration: 12.5ms]")
        assert "evals" not in SimpleFormatter().format(record)
