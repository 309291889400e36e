"""Multi-start global search over point configurations and radial measures."""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import pdist, squareform
from scipy.special import logsumexp, softmax

from ionlab.exceptions import ConfigurationError, DegenerateInputError
from ionlab.models import (
    FunctionalKind,
    FunctionalTag,
    OptimizationResult,
    PointConfiguration,
    RadialMeasure,
    SearchOptions,
)
from ionlab.services import functionals
from ionlab.services.geometry import (
    DELTA_MIN,
    min_separation,
    normalization_factor,
    random_configuration,
    symmetric_configuration,
)
from ionlab.utils.latency_tracker import track_latency
from ionlab.utils.logging_config import get_metrics_logger

logger = logging.getLogger(__name__)
metrics_logger = get_metrics_logger(__name__)

# Soft collision barrier, active below BARRIER_RANGE and dropped from reported values
BARRIER_STRENGTH = 1e-6
BARRIER_RANGE = 1e-4
# Value handed to L-BFGS-B when an iterate leaves the domain
DEGENERATE_PENALTY = 1e12
# Restart seeds are drawn from a ball of this radius before normalization
INIT_RADIUS = 2.0
# Width of the final epsilon bracket
EPSILON_BRACKET = 1e-3

SEARCHABLE = (FunctionalTag.Q_MINIMAX, FunctionalTag.LSST_VALUE, FunctionalTag.BETA_RATIO)


def restart_rng(seed: int, restart: int, stream: int = 0) -> np.random.Generator:
    """Private generator of one restart, split from the master seed."""
    spawn_key = (restart,) if stream == 0 else (restart, stream)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=spawn_key))


def project_on_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u) - 1.0
    index = np.arange(1, v.size + 1)
    active = u - cssv / index > 0
    rho = index[active][-1]
    theta = cssv[active][-1] / rho
    return np.maximum(v - theta, 0.0)


def finite_difference_gradient(func: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    flat = grad.reshape(-1)
    for i in range(x.size):
        step = np.zeros(x.size)
        step[i] = h
        step = step.reshape(x.shape)
        flat[i] = (func(x + step) - func(x - step)) / (2 * h)
    return grad


class ConfigObjective:
    """
    Objective of a configuration search in flat coordinates.

    On the half-line the coordinates are logarithms of the radii, so every
    iterate stays on the positive ray.
    """

    def __init__(self, kind: FunctionalKind, n: int, dim: int, half_line: bool = False):
        self.kind = kind
        self.n = n
        self.dim = dim
        self.half_line = half_line
        self.evaluations = 0
        # beta tolerates points at the nucleus; the minimax terms divide by |x_j|
        self.check_origin = kind.tag is not FunctionalTag.BETA_RATIO

    @property
    def smooth(self) -> bool:
        return not self.kind.is_minimax

    def to_points(self, z: np.ndarray) -> np.ndarray:
        if self.half_line:
            return np.exp(z).reshape(self.n, 1)
        return z.reshape(self.n, self.dim)

    def from_points(self, points: np.ndarray) -> np.ndarray:
        if self.half_line:
            return np.log(points[:, 0]).copy()
        return np.array(points, dtype=float).reshape(-1)

    def normalize(self, z: np.ndarray) -> np.ndarray:
        """Move to the gauge sum |x_i| = N."""
        factor = normalization_factor(self.to_points(z))
        if self.half_line:
            return z + np.log(factor)
        return z * factor

    def degenerate(self, points: np.ndarray) -> bool:
        radii = np.linalg.norm(points, axis=1)
        total = radii.sum()
        if not np.isfinite(total) or total <= 0:
            return True
        scale = self.n / total
        if pdist(points).min() * scale < DELTA_MIN:
            return True
        return self.check_origin and radii.min() * scale < DELTA_MIN

    def exact(self, z: np.ndarray) -> float:
        """Unsmoothed functional at the normalized configuration; inf outside the domain."""
        self.evaluations += 1
        try:
            config = PointConfiguration(points=self.to_points(self.normalize(z)))
            return functionals.evaluate(self.kind, config)
        except DegenerateInputError:
            return np.inf

    def _barrier(self, points: np.ndarray) -> Tuple[float, np.ndarray]:
        value = 0.0
        grad = np.zeros_like(points)
        distances = squareform(pdist(points))
        np.fill_diagonal(distances, np.inf)
        close = distances < BARRIER_RANGE
        if np.any(close):
            d = np.where(close, distances, 1.0)
            value += BARRIER_STRENGTH * 0.5 * np.where(close, 1.0 / d - 1.0 / BARRIER_RANGE, 0.0).sum()
            weight = np.where(close, BARRIER_STRENGTH / d ** 3, 0.0)
            grad -= weight.sum(axis=1)[:, None] * points - weight @ points
        if self.check_origin:
            radii = np.linalg.norm(points, axis=1)
            near = radii < BARRIER_RANGE
            if np.any(near):
                r = radii[near]
                value += BARRIER_STRENGTH * (1.0 / r - 1.0 / BARRIER_RANGE).sum()
                grad[near] -= (BARRIER_STRENGTH / r ** 3)[:, None] * points[near]
        return float(value), grad

    def smoothed(self, z: np.ndarray, tau: float) -> Tuple[float, np.ndarray]:
        """
        Surrogate value and gradient at temperature tau, barrier included.

        Minimax objectives use tau * logsumexp(T / tau) over per-electron terms T;
        the lsst terms are multiplied by the mean radius so the surrogate is
        scale invariant.
        """
        self.evaluations += 1
        points = self.to_points(z)
        if self.degenerate(points):
            return np.inf, np.zeros_like(z)

        if self.kind.tag is FunctionalTag.BETA_RATIO:
            value, grad = functionals.beta_ratio_with_gradient(points)
        else:
            distances = squareform(pdist(points))
            radii = np.linalg.norm(points, axis=1)
            if self.kind.tag is FunctionalTag.Q_MINIMAX:
                terms = functionals.q_terms(distances, radii)
                weights = softmax(terms / tau)
                grad = functionals.q_terms_vjp(points, weights)
            else:
                epsilon = self.kind.parameters["epsilon"]
                raw = functionals.lsst_terms(distances, radii, epsilon)
                mean_radius = radii.sum() / self.n
                terms = mean_radius * raw
                weights = softmax(terms / tau)
                grad = (weights @ raw / self.n) * points / radii[:, None]
                grad = grad + mean_radius * functionals.lsst_terms_vjp(points, weights, epsilon)
            value = float(tau * logsumexp(terms / tau))

        penalty, penalty_grad = self._barrier(points)
        grad = grad + penalty_grad
        value += penalty
        if self.half_line:
            grad = grad * points
        return value, grad.reshape(-1)


@dataclass
class _RestartState:
    """Best exact point seen along one restart."""
    z: np.ndarray
    value: float
    converged: bool = False
    history: List[float] = field(default_factory=list)

    def offer(self, z: np.ndarray, value: float) -> None:
        if value < self.value:
            self.z = z.copy()
            self.value = value
        self.history.append(self.value)


def _descend(objective: ConfigObjective, z: np.ndarray, tau: float, opts: SearchOptions) -> Tuple[np.ndarray, bool]:
    """Gradient descent with Armijo backtracking; the iterate is renormalized after each step."""
    value, grad = objective.smoothed(z, tau)
    if not np.isfinite(value):
        return z, False
    step = opts.initial_step
    for _ in range(opts.max_iterations):
        g2 = float(grad @ grad)
        if g2 == 0.0 or not np.isfinite(g2):
            return z, True
        while True:
            trial = objective.normalize(z - step * grad)
            trial_value, trial_grad = objective.smoothed(trial, tau)
            if trial_value <= value - opts.armijo * step * g2:
                break
            step *= 0.5
            if step < 1e-16:
                return z, True
        decrease = value - trial_value
        z, value, grad = trial, trial_value, trial_grad
        step *= opts.step_growth
        if decrease <= opts.tol * max(1.0, abs(value)):
            return z, True
    return z, False


def _refine(objective: ConfigObjective, z: np.ndarray, tau: float, opts: SearchOptions) -> Tuple[np.ndarray, bool]:
    """Quasi-Newton refinement of the surrogate."""

    def fun(x: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = objective.smoothed(x, tau)
        if not np.isfinite(value):
            return DEGENERATE_PENALTY, np.zeros_like(x)
        return value, grad

    result = minimize(fun, z, jac=True, method="L-BFGS-B", options={"maxiter": opts.max_iterations})
    candidate = result.x
    try:
        candidate = objective.normalize(candidate)
    except DegenerateInputError:
        return z, False
    return candidate, bool(result.success)


def _polish(objective: ConfigObjective, state: _RestartState, opts: SearchOptions) -> None:
    """Coordinate pattern search on the exact maximum."""
    z = state.z.copy()
    value = state.value
    h = 1e-2
    for _ in range(opts.polish_sweeps):
        improved = False
        for i in range(z.size):
            for sign in (1.0, -1.0):
                trial = z.copy()
                trial[i] += sign * h
                trial_value = objective.exact(trial)
                if trial_value < value:
                    z, value, improved = objective.normalize(trial), trial_value, True
                    break
        if not improved:
            h *= 0.5
            if h < 1e-10:
                break
    state.offer(z, value)


def _local_search(objective: ConfigObjective, state: _RestartState, opts: SearchOptions) -> None:
    """Temperature continuation followed by exact-max polish."""
    z = state.z
    if objective.smooth:
        taus = [opts.tau0]
    else:
        taus = []
        tau = opts.tau0
        while tau > opts.tau_floor:
            taus.append(tau)
            tau *= opts.tau_decay
        taus.append(opts.tau_floor)

    converged = False
    for tau in taus:
        z, converged = _descend(objective, z, tau, opts)
        if opts.quasi_newton:
            z, converged = _refine(objective, z, tau, opts)
        state.offer(z, objective.exact(z))
        z = state.z
    state.converged = state.converged or converged

    if not objective.smooth and opts.polish_sweeps:
        _polish(objective, state, opts)


def _anneal(objective: ConfigObjective, state: _RestartState, rng: np.random.Generator, opts: SearchOptions) -> None:
    """Metropolis walk moving one point at a time under geometric cooling."""
    z = state.z.copy()
    value = state.value
    temperature = opts.anneal_temperature
    width = 0.1 if not objective.half_line else 0.2
    per_point = z.size // objective.n
    for _ in range(opts.anneal_steps):
        trial = z.copy()
        i = rng.integers(objective.n)
        trial[i * per_point:(i + 1) * per_point] += width * rng.standard_normal(per_point)
        trial_value = objective.exact(trial)
        delta = trial_value - value
        if np.isfinite(trial_value) and (delta < 0 or rng.random() < np.exp(-delta / temperature)):
            z, value = objective.normalize(trial), trial_value
            state.offer(z, value)
        temperature *= opts.anneal_cooling
    _local_search(objective, state, opts)


def _validate(kind: FunctionalKind, n: int, dim: int, half_line: bool) -> None:
    if kind.tag not in SEARCHABLE:
        raise ConfigurationError(f"{kind.tag.value} is not a configuration search target")
    if n < 2:
        raise ConfigurationError(f"configuration search needs N >= 2, got {n}")
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"dimension must be 1, 2 or 3, got {dim}")
    if half_line and dim != 1:
        raise ConfigurationError("half_line applies to d = 1 only")


def _initial_state(objective: ConfigObjective, restart: int, opts: SearchOptions) -> _RestartState:
    if restart == 0:
        config = symmetric_configuration(objective.n, objective.dim, objective.half_line)
        z = objective.from_points(config.points)
    else:
        rng = restart_rng(opts.seed, restart)
        config = random_configuration(objective.n, objective.dim, rng, INIT_RADIUS, objective.half_line)
        z = objective.normalize(objective.from_points(config.points))
    return _RestartState(z=z, value=objective.exact(z))


@track_latency("minimize_config")
def minimize_config(kind: FunctionalKind, n: int, dim: int, opts: Optional[SearchOptions] = None,
                    half_line: bool = False) -> OptimizationResult:
    """
    Multi-start minimization of a configuration functional.

    Restart 0 starts from the symmetric configuration, the others from
    i.i.d. points in a ball. Minimax functionals are smoothed with a
    log-sum-exp surrogate whose temperature is lowered to its floor, then
    polished on the exact maximum. When the restarts disagree by more than
    opts.anneal_spread, every restart gets an annealing pass.

    Args:
        kind: QMinimax, LsstValue or BetaRatio
        n: Number of points
        dim: Ambient dimension
        opts: Search options
        half_line: Restrict a 1D search to the positive ray

    Returns:
        OptimizationResult whose best_value is the exact functional at best_config
    """
    opts = opts or SearchOptions()
    _validate(kind, n, dim, half_line)
    objective = ConfigObjective(kind, n, dim, half_line)

    states: List[_RestartState] = []
    for restart in range(opts.restarts):
        state = _initial_state(objective, restart, opts)
        _local_search(objective, state, opts)
        states.append(state)
        logger.debug(f"{kind.tag.value} N={n} d={dim} restart {restart}: {state.value:.12g}")

    values = [s.value for s in states]
    annealed = False
    if opts.anneal and _relative_spread(values) > opts.anneal_spread:
        metrics_logger.log_workflow_step(
            "anneal", f"{kind.tag.value} N={n} d={dim}: restart spread {_relative_spread(values):.3g}, annealing"
        )
        for restart, state in enumerate(states):
            _anneal(objective, state, restart_rng(opts.seed, restart, stream=1), opts)
        annealed = True

    values = [s.value for s in states]
    if not np.all(np.isfinite(values)):
        raise DegenerateInputError(f"{kind.tag.value} search ended outside the domain for N={n}, d={dim}")

    best = int(np.argmin(values))
    best_points = objective.to_points(objective.normalize(states[best].z))
    best_config = PointConfiguration(points=best_points)
    best_value = functionals.evaluate(kind, best_config)
    values[best] = best_value

    result = OptimizationResult(
        best_value=best_value,
        best_config=best_config,
        restarts=opts.restarts,
        evaluations=objective.evaluations,
        converged=states[best].converged,
        seed=opts.seed,
        per_restart_values=values,
        annealed=annealed,
        min_separation=min_separation(best_points),
        trace=np.minimum.accumulate(values).tolist(),
    )
    metrics_logger.log_search(f"{kind.tag.value} N={n} d={dim}", result.best_value, result.evaluations, result.converged)
    return result


def _relative_spread(values: Sequence[float]) -> float:
    finite = np.asarray([v for v in values if np.isfinite(v)])
    if finite.size < len(values):
        return np.inf
    scale = max(abs(finite.max()), abs(finite.min()), 1e-12)
    return float((finite.max() - finite.min()) / scale)


def _measure_descent(kernel: np.ndarray, radii: np.ndarray, w: np.ndarray, opts: SearchOptions,
                     max_iterations: int, trace: List[float]) -> Tuple[np.ndarray, bool]:
    """Projected-gradient descent of w K w / (w . r) on the simplex."""

    def ratio(weights: np.ndarray) -> float:
        return float(weights @ kernel @ weights / (weights @ radii))

    value = ratio(w)
    step = opts.initial_step
    for _ in range(max_iterations):
        first_moment = w @ radii
        grad = (2 * kernel @ w - value * radii) / first_moment
        while True:
            trial = project_on_simplex(w - step * grad)
            trial_value = ratio(trial)
            if trial_value < value:
                break
            step *= 0.5
            if step < 1e-16:
                return w, True
        decrease = value - trial_value
        w, value = trial, trial_value
        trace.append(min(trace[-1], value) if trace else value)
        step *= opts.step_growth
        if decrease <= opts.tol * value:
            return w, True
    return w, False


@track_latency("minimize_measure_ratio")
def minimize_measure_ratio(radii_grid: Sequence[float], opts: Optional[SearchOptions] = None,
                           max_iterations: Optional[int] = None) -> OptimizationResult:
    """
    Minimize the radial beta ratio over probability weights on a fixed grid.

    Restart 0 starts from uniform weights, the others from Dirichlet draws.
    A single-point grid has exactly one measure, with value 1.

    Args:
        radii_grid: Strictly increasing positive radii
        opts: Search options
        max_iterations: Iteration cap per restart (defaults to opts.max_iterations)
    """
    opts = opts or SearchOptions()
    radii = np.asarray(radii_grid, dtype=float)
    if radii.ndim != 1 or radii.size < 1:
        raise ConfigurationError("radii grid must be a non-empty 1D sequence")
    if not np.all(np.isfinite(radii)) or np.any(radii <= 0) or np.any(np.diff(radii) <= 0):
        raise ConfigurationError("radii grid must be finite, positive and strictly increasing")

    kernel = functionals.radial_kernel(radii)
    iterations = max_iterations or opts.max_iterations
    trace: List[float] = []
    measures: List[RadialMeasure] = []
    values: List[float] = []
    converged: List[bool] = []
    for restart in range(opts.restarts):
        if restart == 0:
            w = np.full(radii.size, 1.0 / radii.size)
        else:
            w = restart_rng(opts.seed, restart).dirichlet(np.ones(radii.size))
        w, done = _measure_descent(kernel, radii, w, opts, iterations, trace)
        measure = RadialMeasure.normalized(radii, w)
        measures.append(measure)
        values.append(functionals.measure_ratio(measure))
        converged.append(done)

    best = int(np.argmin(values))
    result = OptimizationResult(
        best_value=values[best],
        best_config=measures[best],
        restarts=opts.restarts,
        evaluations=len(trace) + opts.restarts,
        converged=converged[best],
        seed=opts.seed,
        per_restart_values=values,
        trace=trace or [values[best]],
    )
    metrics_logger.log_search(f"MeasureRatio K={radii.size}", result.best_value, result.evaluations, result.converged)
    return result


def nu_constant(n: int, dim: int, half_line: bool = False, opts: Optional[SearchOptions] = None) -> float:
    """nu(N, d) = N - inf Q; the classical inequality holds with C exactly when C >= nu."""
    result = minimize_config(FunctionalKind.q_minimax(), n, dim, opts, half_line=half_line)
    return n - result.best_value


@track_latency("bisect_epsilon")
def bisect_epsilon(n: int, dim: int, opts: Optional[SearchOptions] = None, half_line: bool = False) -> float:
    """
    Smallest epsilon in (0, 1) with inf lsst_value >= 0 at this N.

    Bisects until the bracket is at most 1e-3 wide and returns its midpoint.
    """
    lo, hi = 0.0, 1.0
    while hi - lo > EPSILON_BRACKET:
        mid = 0.5 * (lo + hi)
        result = minimize_config(FunctionalKind.lsst_value(mid), n, dim, opts, half_line=half_line)
        if result.best_value >= 0:
            hi = mid
        else:
            lo = mid
        logger.debug(f"epsilon bracket N={n} d={dim}: [{lo:.6f}, {hi:.6f}]")
    return 0.5 * (lo + hi)


def pair_oracle(kind: FunctionalKind, dim: int = 3, resolution: int = 100) -> Tuple[float, PointConfiguration]:
    """
    Brute-force minimum of a scale-invariant functional over two-point configurations.

    Up to rotation and scale a pair is x1 = e1, x2 = t (cos a, sin a), with
    radius ratio t in (0, 1] and angle a in (0, pi]; both are scanned on a
    uniform grid that contains the antipodal pair.
    """
    if not kind.is_scale_invariant or kind.tag not in SEARCHABLE:
        raise ConfigurationError(f"pair oracle needs a scale-invariant search functional, got {kind.tag.value}")
    if dim not in (1, 2, 3):
        raise ConfigurationError(f"d must be 1, 2 or 3, got {dim}")

    ratios = np.linspace(1.0 / resolution, 1.0, resolution)
    angles = np.array([np.pi]) if dim == 1 else np.linspace(np.pi / resolution, np.pi, resolution)
    best_value, best_points = np.inf, None
    for t in ratios:
        for angle in angles:
            points = np.zeros((2, dim))
            points[0, 0] = 1.0
            points[1, 0] = t * np.cos(angle)
            if dim > 1:
                points[1, 1] = t * np.sin(angle)
            value = functionals.evaluate(kind, PointConfiguration(points=points))
            if value < best_value:
                best_value, best_points = value, points
    assert best_points is not None
    return float(best_value), PointConfiguration(points=best_points)
