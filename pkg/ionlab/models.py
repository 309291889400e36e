"""Pydantic models for the ionization laboratory."""

from enum import Enum
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator, model_validator

from ionlab import __version__

# Tolerance on the total mass of a probability measure
MEASURE_MASS_TOL = 1e-12


def _frozen_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.flags.writeable = False
    return array


class ArrayModel(BaseModel):
    """Immutable model whose fields may hold numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __eq__(self, other: object) -> bool:
        if type(self) is not type(other):
            return NotImplemented
        for name in type(self).model_fields:
            mine, theirs = getattr(self, name), getattr(other, name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True


class PointConfiguration(ArrayModel):
    """N electron positions in R^d; the nucleus sits at the origin."""
    points: np.ndarray

    @field_validator("points", mode="before")
    @classmethod
    def _coerce_points(cls, value: Any) -> np.ndarray:
        array = np.array(value, dtype=float)
        if array.ndim == 1:
            array = array.reshape(-1, 1)  # a flat sequence is a 1D configuration
        if array.ndim != 2 or array.shape[0] < 1:
            raise ValueError("points must be a non-empty N x d array")
        if array.shape[1] not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {array.shape[1]}")
        if not np.all(np.isfinite(array)):
            raise ValueError("every coordinate must be finite")
        return _frozen_array(array)

    @field_serializer("points")
    def _serialize_points(self, points: np.ndarray) -> List[List[float]]:
        return points.tolist()

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def radii(self) -> np.ndarray:
        """Distances |x_i| to the nucleus."""
        return np.linalg.norm(self.points, axis=1)


class RadialMeasure(ArrayModel):
    """Discrete radial probability measure: shells of given radii and weights."""
    radii: np.ndarray
    weights: np.ndarray

    @field_validator("radii", "weights", mode="before")
    @classmethod
    def _coerce_vector(cls, value: Any) -> np.ndarray:
        array = np.atleast_1d(np.array(value, dtype=float))
        if array.ndim != 1 or array.size < 1:
            raise ValueError("expected a non-empty 1D sequence")
        if not np.all(np.isfinite(array)):
            raise ValueError("values must be finite")
        return _frozen_array(array)

    @model_validator(mode="after")
    def _check_measure(self) -> "RadialMeasure":
        if self.radii.shape != self.weights.shape:
            raise ValueError("radii and weights must have the same length")
        if np.any(self.radii <= 0):
            raise ValueError("radii must be positive")
        if np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")
        if abs(float(self.weights.sum()) - 1.0) > MEASURE_MASS_TOL:
            raise ValueError(f"weights must sum to 1, got {self.weights.sum():.15g}")
        return self

    @field_serializer("radii", "weights")
    def _serialize_vector(self, values: np.ndarray) -> List[float]:
        return values.tolist()

    @classmethod
    def normalized(cls, radii: Any, weights: Any) -> "RadialMeasure":
        """Build a measure after rescaling the weights to unit mass."""
        weights = np.clip(np.asarray(weights, dtype=float), 0.0, None)
        total = weights.sum()
        if total <= 0:
            raise ValueError("weights must have positive total mass")
        return cls(radii=radii, weights=weights / total)

    @property
    def size(self) -> int:
        return int(self.radii.size)

    @property
    def first_moment(self) -> float:
        return float(self.weights @ self.radii)


class FunctionalTag(str, Enum):
    """Configuration and measure functionals."""
    SIGAL_EXCESS = "SigalExcess"
    LSST_VALUE = "LsstValue"
    Q_MINIMAX = "QMinimax"
    BETA_RATIO = "BetaRatio"
    MEASURE_RATIO = "MeasureRatio"


REQUIRED_PARAMETERS: Dict[FunctionalTag, tuple] = {
    FunctionalTag.SIGAL_EXCESS: ("Z",),
    FunctionalTag.LSST_VALUE: ("epsilon",),
    FunctionalTag.Q_MINIMAX: (),
    FunctionalTag.BETA_RATIO: (),
    FunctionalTag.MEASURE_RATIO: (),
}


class FunctionalKind(BaseModel):
    """A functional tag with its named parameters."""
    model_config = ConfigDict(frozen=True)

    tag: FunctionalTag
    parameters: Dict[str, float] = {}

    @model_validator(mode="after")
    def _check_parameters(self) -> "FunctionalKind":
        required = set(REQUIRED_PARAMETERS[self.tag])
        if set(self.parameters) != required:
            raise ValueError(f"{self.tag.value} requires parameters {sorted(required)}, got {sorted(self.parameters)}")
        if "Z" in self.parameters and not self.parameters["Z"] > 0:
            raise ValueError("Z must be positive")
        if "epsilon" in self.parameters and not 0 < self.parameters["epsilon"] < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        return self

    @classmethod
    def sigal_excess(cls, Z: float) -> "FunctionalKind":
        return cls(tag=FunctionalTag.SIGAL_EXCESS, parameters={"Z": Z})

    @classmethod
    def lsst_value(cls, epsilon: float) -> "FunctionalKind":
        return cls(tag=FunctionalTag.LSST_VALUE, parameters={"epsilon": epsilon})

    @classmethod
    def q_minimax(cls) -> "FunctionalKind":
        return cls(tag=FunctionalTag.Q_MINIMAX)

    @classmethod
    def beta_ratio(cls) -> "FunctionalKind":
        return cls(tag=FunctionalTag.BETA_RATIO)

    @classmethod
    def measure_ratio(cls) -> "FunctionalKind":
        return cls(tag=FunctionalTag.MEASURE_RATIO)

    @property
    def is_minimax(self) -> bool:
        return self.tag in (FunctionalTag.Q_MINIMAX, FunctionalTag.LSST_VALUE)

    @property
    def is_scale_invariant(self) -> bool:
        return self.tag in (FunctionalTag.Q_MINIMAX, FunctionalTag.BETA_RATIO, FunctionalTag.MEASURE_RATIO)


class SearchOptions(BaseModel):
    """Options of the multi-start global search."""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default=8, ge=1)
    max_iterations: int = Field(default=400, ge=1)
    # Softmax temperature schedule for minimax objectives
    tau0: float = Field(default=1.0, gt=0)
    tau_decay: float = Field(default=0.5, gt=0, lt=1)
    tau_floor: float = Field(default=1e-4, gt=0)
    # Gradient step schedule
    initial_step: float = Field(default=0.1, gt=0)
    step_growth: float = Field(default=2.0, gt=1)
    armijo: float = Field(default=1e-4, gt=0, lt=1)
    quasi_newton: bool = True
    polish_sweeps: int = Field(default=40, ge=0)
    # Annealing fallback
    anneal: bool = True
    anneal_temperature: float = Field(default=0.05, gt=0)
    anneal_cooling: float = Field(default=0.995, gt=0, lt=1)
    anneal_steps: int = Field(default=1500, ge=1)
    anneal_spread: float = Field(default=1e-3, gt=0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    tol: float = Field(default=1e-9, gt=0)

    @model_validator(mode="after")
    def _check_schedule(self) -> "SearchOptions":
        if self.tau_floor > self.tau0:
            raise ValueError("tau_floor must not exceed tau0")
        return self


class OptimizationResult(ArrayModel):
    """Outcome of a multi-start global search."""
    best_value: float
    best_config: Union[PointConfiguration, RadialMeasure]
    restarts: int
    evaluations: int
    converged: bool
    seed: int
    per_restart_values: List[float]
    annealed: bool = False
    min_separation: Optional[float] = None  # closest approach to a collision or the nucleus
    trace: List[float] = []

    @model_validator(mode="after")
    def _check_best(self) -> "OptimizationResult":
        if self.per_restart_values and self.best_value != min(self.per_restart_values):
            raise ValueError("best_value must equal the minimum of per_restart_values")
        return self

    @property
    def spread(self) -> float:
        """Relative spread of the per-restart values."""
        values = np.asarray(self.per_restart_values)
        scale = max(abs(values.max()), abs(values.min()), 1e-12)
        return float((values.max() - values.min()) / scale)


class TFSolution(ArrayModel):
    """Radial Thomas-Fermi atom on a logarithmic grid."""
    Z: float = Field(gt=0)
    gamma: float = Field(gt=0)
    mu: float = Field(ge=0)
    grid: np.ndarray
    rho: np.ndarray
    total_charge: float
    residual: float
    n_target: Optional[float] = None
    iterations: int = 0

    @field_validator("grid", "rho", mode="before")
    @classmethod
    def _coerce_profile(cls, value: Any) -> np.ndarray:
        return _frozen_array(value)

    @model_validator(mode="after")
    def _check_profile(self) -> "TFSolution":
        if self.grid.ndim != 1 or self.grid.shape != self.rho.shape:
            raise ValueError("grid and rho must be 1D arrays of equal length")
        if np.any(np.diff(self.grid) <= 0) or self.grid[0] <= 0:
            raise ValueError("grid must be positive and increasing")
        if np.any(self.rho < 0):
            raise ValueError("rho must be non-negative")
        return self

    @field_serializer("grid", "rho")
    def _serialize_profile(self, values: np.ndarray) -> List[float]:
        return values.tolist()


class GridSpec(BaseModel):
    """Logarithmic radial grid in units of Z^(-1/3)."""
    model_config = ConfigDict(frozen=True)

    points: int = Field(default=2000, ge=16)
    r_min: float = Field(default=1e-4, gt=0)
    r_max: float = Field(default=1e2, gt=0)

    @model_validator(mode="after")
    def _check_span(self) -> "GridSpec":
        if self.r_max <= self.r_min:
            raise ValueError("r_max must exceed r_min")
        return self


class MomentCheck(BaseModel):
    """Truncated moment inequality (1 - 1/k) * charge inside R <= Z."""
    k: float
    R: float
    lhs: float
    rhs: float
    ok: bool


class FitResult(BaseModel):
    """Least-squares extrapolation v(N) = beta_est - c_est * N^(-2/3)."""
    beta_est: float
    c_est: float
    residual: float


class ExperimentReport(BaseModel):
    """Serialized result of one laboratory command."""
    command: str
    parameters: Dict[str, Any] = {}
    records: List[Dict[str, Any]] = []
    fit: Optional[FitResult] = None
    verdicts: Dict[str, Any] = {}
    seed: Optional[int] = None
    wall_time: float = 0.0
    artifact_version: str = __version__
    exit_code: int = 0


class SuiteOutcome(BaseModel):
    """Result of one randomized property suite."""
    suite: str
    samples: int
    violations: int = 0
    skipped: int = 0
    min_value: Optional[float] = None
    exploratory: bool = False
    rows: List[Dict[str, Any]] = []
    counterexamples: List[Dict[str, Any]] = []

    @property
    def passed(self) -> bool:
        return self.exploratory or self.violations == 0
