"""Radial Thomas-Fermi atom: self-consistent solver, moments and serialization."""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import solve_banded

from ionlab.exceptions import ConvergenceError, DomainError
from ionlab.models import GridSpec, MomentCheck, TFSolution
from ionlab.services.geometry import log_grid, newton_potential_profile
from ionlab.utils.latency_tracker import track_latency
from ionlab.utils.logging_config import get_metrics_logger

logger = logging.getLogger(__name__)
metrics_logger = get_metrics_logger(__name__)

# Conventional Thomas-Fermi constant (3 pi^2)^(2/3)
PHYSICAL_GAMMA = (3 * np.pi ** 2) ** (2.0 / 3.0)
# Relative accuracy of the outer chemical-potential bisection
CHARGE_TOL = 1e-6
MAX_BISECTIONS = 200
# Allowed quadrature slack on the moment inequality, relative to Z
MOMENT_TOL = 1e-6
# Plain iteration is abandoned once the defect exceeds this
DIVERGENCE_LIMIT = 1e8

Mixing = Literal["newton", "linear"]


def tf_length_scale(Z: float, gamma: float) -> float:
    """b = (4 pi)^(-2/3) gamma Z^(-1/3); the neutral potential is Z chi(r/b)/r."""
    if not Z > 0 or not gamma > 0:
        raise DomainError("Z and gamma must be positive")
    return (4 * np.pi) ** (-2.0 / 3.0) * gamma * Z ** (-1.0 / 3.0)


def default_grid(Z: float, spec: Optional[GridSpec] = None) -> np.ndarray:
    """Log-spaced radii spanning [r_min, r_max] * Z^(-1/3)."""
    spec = spec or GridSpec()
    return Z ** (-1.0 / 3.0) * log_grid(spec.points, spec.r_min, spec.r_max)


def log_trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    """Trapezoid weights for integrals over ln r."""
    steps = np.diff(np.log(grid))
    weights = np.zeros_like(grid)
    weights[:-1] += 0.5 * steps
    weights[1:] += 0.5 * steps
    return weights


def shell_masses(grid: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Charge carried by each grid shell: 4 pi r^3 rho dln(r)."""
    return 4 * np.pi * grid ** 3 * rho * log_trapezoid_weights(grid)


def inverse_kernel_bands(grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tridiagonal inverse of G_ik = 1/max(r_i, r_k).

    In t = 1/r the kernel is min(t_i, t_k), whose inverse has diagonal
    1/dt_j + 1/dt_{j+1} and off-diagonal -1/dt_{j+1}, with dt_1 = t_1.

    Returns:
        (diagonal, off_diagonal) in the grid order
    """
    t = 1.0 / grid[::-1]
    dt = np.diff(t, prepend=0.0)
    diagonal = 1.0 / dt
    diagonal[:-1] += 1.0 / dt[1:]
    off = -1.0 / dt[1:]
    return diagonal[::-1].copy(), off[::-1].copy()


class ThomasFermiSolver:
    """
    Solver of gamma rho^(2/3) = [Z/r - (rho * 1/|x|)(r) - mu]_+ on a fixed grid.

    The unknown is the electronic potential V on the grid. Newton mixing
    solves (G^-1 + diag(W chi)) dV = m - G^-1 V with a banded solve;
    linear mixing damps the density update by alpha.
    """

    def __init__(self, Z: float, gamma: float, grid: np.ndarray, mixing: Mixing = "newton",
                 alpha: float = 0.3, max_iterations: int = 10_000, tol: float = 1e-8):
        if not Z > 0 or not gamma > 0:
            raise DomainError("Z and gamma must be positive")
        if mixing not in ("newton", "linear"):
            raise DomainError(f"unknown mixing {mixing!r}")
        self.Z = Z
        self.gamma = gamma
        self.grid = np.asarray(grid, dtype=float)
        self.mixing = mixing
        self.alpha = alpha
        self.max_iterations = max_iterations
        self.tol = tol

        self.nuclear = Z / self.grid
        self.shell_weights = 4 * np.pi * self.grid ** 3 * log_trapezoid_weights(self.grid)
        self.diagonal, self.off = inverse_kernel_bands(self.grid)
        self.iterations = 0

    def density(self, potential: np.ndarray, mu: float) -> np.ndarray:
        excess = np.clip(self.nuclear - potential - mu, 0.0, None)
        return self.gamma ** -1.5 * excess ** 1.5

    def electron_potential(self, rho: np.ndarray) -> np.ndarray:
        return newton_potential_profile(self.grid, self.shell_weights * rho, self.grid)

    def defect(self, rho: np.ndarray, mu: float) -> float:
        """sup |gamma rho^(2/3) - [Z/r - V_rho - mu]_+| relative to Z/r."""
        lhs = self.gamma * rho ** (2.0 / 3.0)
        rhs = np.clip(self.nuclear - self.electron_potential(rho) - mu, 0.0, None)
        return float(np.max(np.abs(lhs - rhs) / self.nuclear))

    def _apply_inverse_kernel(self, v: np.ndarray) -> np.ndarray:
        out = self.diagonal * v
        out[:-1] += self.off * v[1:]
        out[1:] += self.off * v[:-1]
        return out

    def _newton_step(self, potential: np.ndarray, mu: float) -> np.ndarray:
        excess = np.clip(self.nuclear - potential - mu, 0.0, None)
        slope = 1.5 * self.gamma ** -1.5 * np.sqrt(excess)
        masses = self.shell_weights * self.density(potential, mu)
        banded = np.zeros((3, self.grid.size))
        banded[0, 1:] = self.off
        banded[1, :] = self.diagonal + self.shell_weights * slope
        banded[2, :-1] = self.off
        return solve_banded((1, 1), banded, masses - self._apply_inverse_kernel(potential))

    def _potential_defect(self, potential: np.ndarray, mu: float) -> float:
        induced = self.electron_potential(self.density(potential, mu))
        return float(np.max(np.abs(potential - induced) / self.nuclear))

    def solve_fixed_mu(self, mu: float, potential: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray, float]:
        """
        Self-consistent density at a fixed chemical potential.

        Returns:
            (rho, potential, residual)

        Raises:
            ConvergenceError: the iteration budget ran out or the iteration diverged
        """
        if self.mixing == "linear":
            return self._solve_linear(mu)

        potential = np.zeros_like(self.grid) if potential is None else potential.copy()
        trace: List[float] = []
        for _ in range(self.max_iterations):
            self.iterations += 1
            rho = self.density(potential, mu)
            residual = self.defect(rho, mu)
            trace.append(residual)
            if residual <= self.tol:
                return rho, potential, residual

            step = self._newton_step(potential, mu)
            current = self._potential_defect(potential, mu)
            scale = 1.0
            for _ in range(30):
                trial = potential + scale * step
                if self._potential_defect(trial, mu) < current:
                    break
                scale *= 0.5
            potential = trial

        raise ConvergenceError(
            f"Thomas-Fermi Newton iteration did not converge in {self.max_iterations} steps (mu={mu:.6g})",
            residual_trace=trace,
        )

    def _solve_linear(self, mu: float) -> Tuple[np.ndarray, np.ndarray, float]:
        rho = np.zeros_like(self.grid)
        trace: List[float] = []
        for _ in range(self.max_iterations):
            self.iterations += 1
            potential = self.electron_potential(rho)
            residual = self.defect(rho, mu)
            trace.append(residual)
            if residual <= self.tol:
                return rho, potential, residual
            if not np.isfinite(residual) or residual > DIVERGENCE_LIMIT:
                break
            rho = (1 - self.alpha) * rho + self.alpha * self.density(potential, mu)

        raise ConvergenceError(
            f"Thomas-Fermi damped iteration (alpha={self.alpha}) did not converge (mu={mu:.6g})",
            residual_trace=trace,
        )

    def total_charge(self, rho: np.ndarray) -> float:
        return float(self.shell_weights @ rho)

    def solve(self, n_target: float) -> TFSolution:
        """Drive the total charge to min(n_target, Z) by bisection on mu >= 0."""
        target = min(n_target, self.Z)
        tolerance = CHARGE_TOL * self.Z

        rho, potential, residual = self.solve_fixed_mu(0.0)
        charge = self.total_charge(rho)
        mu = 0.0
        if charge > target + tolerance:
            lo, hi = 0.0, self.Z / self.grid[0]
            for _ in range(MAX_BISECTIONS):
                mu = 0.5 * (lo + hi)
                rho, potential, residual = self.solve_fixed_mu(mu, potential)
                charge = self.total_charge(rho)
                if abs(charge - target) <= tolerance:
                    break
                if charge > target:
                    lo = mu
                else:
                    hi = mu
            else:
                raise ConvergenceError(
                    f"chemical potential bisection did not reach charge {target:.6g} (last {charge:.6g})",
                    residual_trace=[residual],
                )

        metrics_logger.log_workflow_step(
            "tf",
            f"Z={self.Z:g} gamma={self.gamma:.6g} N_target={n_target:g}: mu={mu:.6g} charge={charge:.8g}",
            workflow_context={"evaluations": self.iterations},
        )
        return TFSolution(
            Z=self.Z,
            gamma=self.gamma,
            mu=mu,
            grid=self.grid,
            rho=rho,
            total_charge=charge,
            residual=residual,
            n_target=n_target,
            iterations=self.iterations,
        )


@track_latency("solve_tf")
def solve_tf(Z: float, n_target: float, gamma: float, grid_spec: Optional[GridSpec] = None,
             mixing: Mixing = "newton", alpha: float = 0.3, max_iterations: int = 10_000,
             tol: float = 1e-8) -> TFSolution:
    """
    Solve the radial Thomas-Fermi equation for an atom of charge Z holding n_target electrons.

    Args:
        Z: Nuclear charge
        n_target: Requested electron number; at most Z can be bound
        gamma: Thomas-Fermi constant
        grid_spec: Log grid in units of Z^(-1/3)
        mixing: "newton" (default) or "linear" damped density mixing
        alpha: Damping of the linear mixing
        max_iterations: Budget per fixed-mu solve
        tol: Target residual

    Returns:
        Converged TFSolution
    """
    if not n_target > 0:
        raise DomainError(f"n_target must be positive, got {n_target}")
    solver = ThomasFermiSolver(Z, gamma, default_grid(Z, grid_spec), mixing, alpha, max_iterations, tol)
    return solver.solve(n_target)


def screened_potential(sol: TFSolution, r: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Z/r minus the electronic Newton potential at r."""
    radii = np.asarray(r, dtype=float)
    if np.any(radii <= 0):
        raise DomainError("screened_potential requires r > 0")
    masses = shell_masses(sol.grid, sol.rho)
    value = sol.Z / radii - newton_potential_profile(sol.grid, masses, np.atleast_1d(radii)).reshape(radii.shape)
    return float(value) if value.ndim == 0 else value


def enclosed_charge(sol: TFSolution, R: float) -> float:
    """4 pi times the integral of rho r^2 up to R."""
    log_grid_values = np.log(sol.grid)
    cumulative = cumulative_trapezoid(4 * np.pi * sol.grid ** 3 * sol.rho, log_grid_values, initial=0.0)
    return float(np.interp(np.log(R), log_grid_values, cumulative))


def moment_check(sol: TFSolution, k: float, R: float) -> MomentCheck:
    """(1 - 1/k) times the charge inside R, compared with Z."""
    if not k > 1:
        raise DomainError(f"moment_check needs k > 1, got {k}")
    if not sol.grid[0] <= R <= sol.grid[-1]:
        raise DomainError(f"R={R} lies outside the grid [{sol.grid[0]:.3g}, {sol.grid[-1]:.3g}]")
    lhs = (1 - 1 / k) * enclosed_charge(sol, R)
    return MomentCheck(k=k, R=R, lhs=lhs, rhs=sol.Z, ok=lhs <= sol.Z * (1 + MOMENT_TOL))


def charge_curve(Z: float, gamma: float, mus: Sequence[float], grid_spec: Optional[GridSpec] = None,
                 mixing: Mixing = "newton") -> List[Dict[str, float]]:
    """Total bound charge as a function of the chemical potential."""
    solver = ThomasFermiSolver(Z, gamma, default_grid(Z, grid_spec), mixing)
    rows = []
    potential = None
    for mu in sorted(mus):
        if mu < 0:
            raise DomainError(f"mu must be non-negative, got {mu}")
        rho, potential, _ = solver.solve_fixed_mu(mu, potential)
        rows.append({"mu": float(mu), "total_charge": solver.total_charge(rho)})
    return rows


def save_solution(sol: TFSolution, path: Union[str, Path]) -> Tuple[Path, Path]:
    """
    Write the profile as CSV "r,rho,phi_screened" plus a JSON sidecar.

    Returns:
        (csv_path, json_path)
    """
    csv_path = Path(path).with_suffix(".csv")
    json_path = Path(path).with_suffix(".json")
    csv_path.parent.mkdir(parents=True, exist_ok=True)

    table = np.column_stack((sol.grid, sol.rho, screened_potential(sol, sol.grid)))
    np.savetxt(csv_path, table, delimiter=",", header="r,rho,phi_screened", comments="", fmt="%.17g")
    sidecar = sol.model_dump(include={"Z", "gamma", "mu", "total_charge", "residual", "n_target", "iterations"})
    json_path.write_text(json.dumps(sidecar, indent=2))
    logger.info(f"Saved Thomas-Fermi profile to {csv_path}")
    return csv_path, json_path


def load_solution(path: Union[str, Path]) -> TFSolution:
    """Read a profile written by save_solution."""
    csv_path = Path(path).with_suffix(".csv")
    json_path = Path(path).with_suffix(".json")
    try:
        table = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        sidecar = json.loads(json_path.read_text())
    except (OSError, ValueError) as e:
        logger.error(f"Error loading Thomas-Fermi profile {path}: {e}")
        raise DomainError(f"Cannot load Thomas-Fermi profile {path}: {e}") from e
    return TFSolution(grid=table[:, 0], rho=table[:, 1], **sidecar)
