"""
Shooting solver for the universal neutral Thomas-Fermi screening function.

chi'' = chi^(3/2) / sqrt(x), chi(0) = 1, chi(x) -> 0 as x -> infinity.
Used as an independent check on the fixed-point solver: for a neutral
atom, r * phi(r) / Z = chi(r / b) with b from tf_atom.tf_length_scale.
"""

import logging
from dataclasses import dataclass
from typing import Any, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp

from ionlab.exceptions import ConvergenceError, DomainError
from ionlab.models import TFSolution
from ionlab.services.tf_atom import screened_potential, tf_length_scale

logger = logging.getLogger(__name__)

# Series start point; chi ~ 1 + s x + (4/3) x^(3/2) near the nucleus
X_START = 1e-6
SLOPE_BRACKET = (-1.7, -1.5)
SHOOT_RANGE = 50.0
SLOPE_TOL = 1e-13


def _rhs(x: float, y: np.ndarray) -> np.ndarray:
    return np.array([y[1], max(y[0], 0.0) ** 1.5 / np.sqrt(x)])


def _hits_zero(x: float, y: np.ndarray) -> float:
    return y[0]


_hits_zero.terminal = True  # type: ignore[attr-defined]
_hits_zero.direction = -1  # type: ignore[attr-defined]


def _turns_up(x: float, y: np.ndarray) -> float:
    return y[1]


_turns_up.terminal = True  # type: ignore[attr-defined]
_turns_up.direction = 1  # type: ignore[attr-defined]


def _initial_state(slope: float) -> np.ndarray:
    return np.array([
        1.0 + slope * X_START + (4.0 / 3.0) * X_START ** 1.5,
        slope + 2.0 * X_START ** 0.5,
    ])


def _shoot(slope: float, x_end: float, dense: bool = False) -> Any:
    return solve_ivp(
        _rhs, (X_START, x_end), _initial_state(slope), method="DOP853",
        events=(_hits_zero, _turns_up), rtol=1e-12, atol=1e-14, dense_output=dense,
    )


@dataclass
class ShootingSolution:
    """Screening function from the converged initial slope."""
    slope: float
    x_max: float
    _solution: Any

    def chi(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """chi(x) for X_START <= x <= x_max."""
        values = np.asarray(x, dtype=float)
        if np.any(values < X_START) or np.any(values > self.x_max):
            raise DomainError(f"chi is tabulated on [{X_START}, {self.x_max}]")
        out = self._solution.sol(values)[0]
        return float(out) if np.ndim(out) == 0 else out


def solve_neutral_tf_shooting(x_max: float = 10.0, bracket: Tuple[float, float] = SLOPE_BRACKET,
                              max_bisections: int = 200) -> ShootingSolution:
    """
    Bisect the initial slope chi'(0) until the solution neither crosses zero nor turns up.

    A trajectory that crosses zero started too steep; one whose derivative
    turns positive started too shallow.

    Args:
        x_max: Upper end of the returned interpolant
        bracket: Initial slope bracket (steep, shallow)
        max_bisections: Bisection budget

    Returns:
        ShootingSolution with slope close to -1.588071
    """
    steep, shallow = bracket
    for _ in range(max_bisections):
        if shallow - steep <= SLOPE_TOL:
            break
        mid = 0.5 * (steep + shallow)
        trajectory = _shoot(mid, SHOOT_RANGE)
        if trajectory.t_events[0].size:
            steep = mid
        elif trajectory.t_events[1].size:
            shallow = mid
        else:
            # Still positive and decreasing over the whole range
            steep = shallow = mid
            break
    else:
        raise ConvergenceError(f"shooting bracket [{steep}, {shallow}] did not close")

    slope = 0.5 * (steep + shallow)
    final = _shoot(slope, x_max, dense=True)
    if final.t[-1] < x_max:
        raise ConvergenceError(f"shooting trajectory with slope {slope:.12g} stopped at x={final.t[-1]:.3g}")
    logger.debug(f"Thomas-Fermi initial slope {slope:.12f}")
    return ShootingSolution(slope=slope, x_max=x_max, _solution=final)


def shooting_deviation(sol: TFSolution, shooting: ShootingSolution, x_range: Tuple[float, float] = (1e-2, 10.0),
                       points: int = 200) -> float:
    """
    Largest relative gap between r phi(r) / Z of a neutral solution and chi(r / b).

    Args:
        sol: Converged neutral TFSolution
        shooting: Screening function covering x_range
        x_range: Dimensionless radii compared
        points: Log-spaced comparison points
    """
    b = tf_length_scale(sol.Z, sol.gamma)
    x = np.geomspace(x_range[0], x_range[1], points)
    r = b * x
    if r[0] < sol.grid[0] or r[-1] > sol.grid[-1]:
        raise DomainError("comparison radii fall outside the solution grid")
    reduced = r * screened_potential(sol, r) / sol.Z
    reference = shooting.chi(x)
    return float(np.max(np.abs(reduced - reference) / np.abs(reference)))
