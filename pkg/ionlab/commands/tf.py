"""tf: Thomas-Fermi sweeps, profile files and the moment-inequality lattice."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ionlab.commands.runner import EXIT_VIOLATION, CommandRun, Row, rows_exit_code, run_rows
from ionlab.exceptions import ConfigurationError
from ionlab.models import ExperimentReport, GridSpec
from ionlab.services.tf_atom import moment_check, save_solution, solve_tf
from ionlab.services.tf_shooting import shooting_deviation, solve_neutral_tf_shooting

logger = logging.getLogger(__name__)

MOMENT_EXPONENTS = (2.0, 3.0, 5.0, 10.0, 1000.0)
# Neutral runs must bind at least this fraction of Z
NEUTRAL_RATIO = 0.99
# Tolerated excess charge, relative to Z
CHARGE_SLACK = 1e-4
SHOOTING_TOL = 1e-3


def moment_radii(grid: np.ndarray) -> List[float]:
    """Grid quartiles and the outermost radius."""
    return [float(np.quantile(grid, q)) for q in (0.25, 0.5, 0.75)] + [float(grid[-1])]


def _tag(value: float) -> str:
    return f"{value:.6g}".replace(".", "p")


def _profile_name(Z: float, gamma: float, n_target: float) -> str:
    """File stem with dots spelled as p."""
    return f"Z{_tag(Z)}_gamma{_tag(gamma)}_N{_tag(n_target)}"


def _tf_row(task: Row) -> Row:
    grid_spec = GridSpec(**task["grid"])
    sol = solve_tf(task["Z"], task["N_target"], task["gamma"], grid_spec, mixing=task["mixing"],
                   alpha=task["alpha"], max_iterations=task["max_iterations"], tol=task["tol"])
    checks = [moment_check(sol, k, R) for k in MOMENT_EXPONENTS for R in moment_radii(sol.grid)]
    if task["out_dir"]:
        save_solution(sol, Path(task["out_dir"]) / "tf" / _profile_name(sol.Z, sol.gamma, task["N_target"]))

    row: Row = {
        "Z": sol.Z,
        "gamma": sol.gamma,
        "N_target": task["N_target"],
        "mu": sol.mu,
        "total_charge": sol.total_charge,
        "charge_ratio": sol.total_charge / sol.Z,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "moments_ok": all(check.ok for check in checks),
        "moments": [check.model_dump() for check in checks],
    }
    if task["N_target"] >= sol.Z and sol.mu == 0.0:
        row["shooting_deviation"] = shooting_deviation(sol, solve_neutral_tf_shooting())
    return row


def cmd_tf(Z_values: Sequence[float], gammas: Sequence[float], grid_spec: GridSpec,
           n_targets: Optional[Sequence[float]] = None, ratios: Optional[Sequence[float]] = None,
           mixing: str = "newton", alpha: float = 0.3, max_iterations: int = 10_000, tol: float = 1e-8,
           out_dir: Optional[str] = None, jobs: int = 1, seed: Optional[int] = None) -> ExperimentReport:
    """
    Solve the Thomas-Fermi equation over a (Z, gamma, N_target) sweep.

    Each solution is written as a profile (CSV plus JSON sidecar) and checked
    against the moment inequality on a (k, R) lattice; neutral solutions are
    also compared with the shooting solution.

    Args:
        Z_values: Nuclear charges
        gammas: Thomas-Fermi constants
        grid_spec: Log grid in units of Z^(-1/3)
        n_targets: Absolute electron numbers
        ratios: Electron numbers as multiples of Z, used when n_targets is empty
        mixing: "newton" or "linear"
        alpha: Damping of the linear mixing
        max_iterations: Budget per fixed-mu solve
        tol: Residual tolerance
        out_dir: Directory for profile files (None skips them)
        jobs: Worker count
        seed: Run seed echoed into the report (the solver itself draws nothing)
    """
    if not Z_values or any(Z <= 0 for Z in Z_values) or not gammas or any(g <= 0 for g in gammas):
        raise ConfigurationError("Z and gamma values must be positive and non-empty")
    if mixing not in ("newton", "linear"):
        raise ConfigurationError(f"unknown mixing {mixing!r}")
    ratios = list(ratios or [1.0])

    run = CommandRun(
        "tf",
        {"Z": list(Z_values), "gamma": list(gammas), "N_target": list(n_targets or []), "ratios": ratios,
         "grid": grid_spec.model_dump(), "mixing": mixing, "alpha": alpha, "max_iterations": max_iterations,
         "tol": tol},
        seed=seed,
    )
    tasks: List[Row] = []
    for Z in Z_values:
        targets = list(n_targets) if n_targets else [ratio * Z for ratio in ratios]
        for gamma in gammas:
            for n_target in targets:
                tasks.append({"Z": Z, "gamma": gamma, "N_target": n_target, "grid": grid_spec.model_dump(),
                              "mixing": mixing, "alpha": alpha, "max_iterations": max_iterations, "tol": tol,
                              "out_dir": out_dir})
    rows = run_rows(_tf_row, tasks, jobs, key=("Z", "gamma", "N_target"))

    records: List[Row] = []
    for row in rows:
        moments = row.pop("moments", [])
        for field in ("grid", "mixing", "alpha", "max_iterations", "tol", "out_dir"):
            row.pop(field, None)
        records.append({"kind": "solution", **row})
        records.extend({"kind": "moment", "Z": row["Z"], "gamma": row["gamma"], "N_target": row["N_target"], **m}
                       for m in moments)

    verdicts = _verdicts([row for row in rows if row.get("status") == "ok"])
    logger.info(f"ionization bound ∫ρ ≤ Z: {verdicts['ionization_bound']}")
    failed = any(value == "FAIL" for value in verdicts.values())
    exit_code = max(rows_exit_code(rows), EXIT_VIOLATION if failed else 0)
    return run.finish(records, verdicts, exit_code)


def _verdicts(rows: List[Row]) -> Dict[str, Any]:
    verdicts: Dict[str, Any] = {
        "ionization_bound": "PASS" if all(row["total_charge"] <= row["Z"] * (1 + CHARGE_SLACK) for row in rows) else "FAIL",
        "moment_lattice": "PASS" if all(row["moments_ok"] for row in rows) else "FAIL",
    }
    neutral = [row for row in rows if row["N_target"] >= row["Z"]]
    if neutral:
        verdicts["neutral_binding"] = "PASS" if all(row["charge_ratio"] >= NEUTRAL_RATIO for row in neutral) else "FAIL"
    deviations = [row["shooting_deviation"] for row in neutral if "shooting_deviation" in row]
    if deviations:
        verdicts["shooting_max_deviation"] = max(deviations)
        verdicts["shooting_agreement"] = "PASS" if max(deviations) <= SHOOTING_TOL else "FAIL"
    return verdicts
