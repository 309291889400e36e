"""Serialization of experiment reports and counterexamples."""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

from ionlab.models import ExperimentReport

logger = logging.getLogger(__name__)

COUNTEREXAMPLE_DIR = "counterexamples"


def _columns(rows: Sequence[Dict[str, Any]]) -> List[str]:
    """Union of row keys in first-seen order."""
    columns: Dict[str, None] = {}
    for row in rows:
        for key in row:
            columns.setdefault(key, None)
    return list(columns)


def write_csv(path: Path, rows: Sequence[Dict[str, Any]]) -> Path:
    """Write rows as CSV; missing cells stay empty."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=_columns(rows), restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def write_report(report: ExperimentReport, out_dir: str, output_format: str = "both") -> List[Path]:
    """
    Emit a report as JSON, CSV or both under out_dir.

    The CSV holds the records only; the JSON holds the whole report.

    Returns:
        Paths written
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    try:
        if output_format in ("json", "both"):
            json_path = directory / f"{report.command}.json"
            json_path.write_text(report.model_dump_json(indent=2))
            written.append(json_path)
        if output_format in ("csv", "both") and report.records:
            written.append(write_csv(directory / f"{report.command}.csv", report.records))
    except OSError as e:
        logger.error(f"Error writing {report.command} report to {directory}: {e}")
        raise
    for path in written:
        logger.info(f"Wrote {path}")
    return written


def write_counterexamples(suite: str, seed: int, counterexamples: Iterable[Dict[str, Any]], out_dir: str) -> List[Path]:
    """One JSON file per counterexample under <out_dir>/counterexamples/, tagged with suite and seed."""
    directory = Path(out_dir) / COUNTEREXAMPLE_DIR
    written = []
    for index, payload in enumerate(counterexamples):
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{suite}-{index:03d}.json"
        path.write_text(json.dumps({"suite": suite, "seed": seed, "index": index, **payload}, indent=2))
        written.append(path)
    if written:
        logger.warning(f"Suite {suite}: wrote {len(written)} counterexample files to {directory}")
    return written


def read_report(path: str) -> ExperimentReport:
    """Load a JSON report written by write_report."""
    return ExperimentReport.model_validate_json(Path(path).read_text())
