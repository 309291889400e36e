"""bound-table: the improved ionization bound against Lieb's 2Z + 1."""

import logging
from typing import List, Optional, Sequence

from ionlab.commands.runner import EXIT_VIOLATION, CommandRun, Row
from ionlab.exceptions import ConfigurationError
from ionlab.models import ExperimentReport
from ionlab.services.functionals import BOUND_LINEAR, lieb_bound, theorem_bound

logger = logging.getLogger(__name__)

# Charge from which the improved bound beats Lieb's
EXPECTED_CROSSOVER = 6


def crossover(rows: Sequence[Row]) -> Optional[float]:
    """Smallest Z from which the improved bound stays below Lieb's for the rest of the table."""
    found = None
    for row in reversed(rows):
        if row["smaller"] != "theorem":
            break
        found = row["Z"]
    return found


def cmd_bound_table(Z_values: Sequence[float], seed: Optional[int] = None) -> ExperimentReport:
    """Tabulate 1.22 Z + 3 Z^(1/3) and 2Z + 1, with the crossover charge; seed is only echoed."""
    if not Z_values or any(Z <= 0 for Z in Z_values):
        raise ConfigurationError(f"Z values must be positive, got {list(Z_values)}")
    run = CommandRun("bound-table", {"Z": sorted(Z_values)}, seed=seed)

    records: List[Row] = []
    for Z in sorted(Z_values):
        theorem, lieb = theorem_bound(Z), lieb_bound(Z)
        records.append({
            "Z": Z,
            "theorem_bound": theorem,
            "lieb_bound": lieb,
            "smaller": "theorem" if theorem < lieb else "lieb",
            "theorem_ratio": theorem / Z,
            "lieb_ratio": lieb / Z,
        })

    verdicts = {
        "crossover_Z": crossover(records),
        "asymptotic_ratio": {"theorem": BOUND_LINEAR, "lieb": 2.0},
    }
    covers = {EXPECTED_CROSSOVER - 1, EXPECTED_CROSSOVER} <= set(Z_values)
    if covers:
        verdicts["crossover_at_6"] = "PASS" if verdicts["crossover_Z"] == EXPECTED_CROSSOVER else "FAIL"
    exit_code = EXIT_VIOLATION if verdicts.get("crossover_at_6") == "FAIL" else 0
    return run.finish(records, verdicts, exit_code)
