"""check: randomized property suites with counterexample files."""

import logging
from typing import List, Optional, Sequence

from ionlab.commands.runner import EXIT_VIOLATION, CommandRun, Row
from ionlab.exceptions import ConfigurationError
from ionlab.models import ExperimentReport
from ionlab.services.property_suites import SUITES, run_suite
from ionlab.services.report_writer import write_counterexamples

logger = logging.getLogger(__name__)


def resolve_suites(names: Sequence[str]) -> List[str]:
    """Expand "all" and reject unknown suite names."""
    if not names or "all" in names:
        return sorted(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ConfigurationError(f"Unknown suites {unknown}; choose from {', '.join(sorted(SUITES))} or all")
    return list(names)


def cmd_check(suites: Sequence[str], samples: Optional[int], seed: int, out_dir: Optional[str] = None) -> ExperimentReport:
    """
    Run property suites; the exit code is 1 iff a non-exploratory suite has a violation.

    Exploratory suites only record empirical minima.
    """
    names = resolve_suites(suites)
    run = CommandRun("check", {"suites": names, "samples": samples}, seed=seed)

    records: List[Row] = []
    verdicts = {}
    for name in names:
        outcome = run_suite(name, samples, seed)
        status = "EXPLORATORY" if outcome.exploratory else ("PASS" if outcome.passed else "FAIL")
        verdicts[name] = status
        records.append({
            "suite": name,
            "samples": outcome.samples,
            "violations": outcome.violations,
            "skipped": outcome.skipped,
            "min_value": outcome.min_value,
            "status": status,
        })
        records.extend({"suite": name, **row} for row in outcome.rows)
        if out_dir and outcome.counterexamples:
            write_counterexamples(name, seed, outcome.counterexamples, out_dir)

    exit_code = EXIT_VIOLATION if "FAIL" in verdicts.values() else 0
    return run.finish(records, verdicts, exit_code)
