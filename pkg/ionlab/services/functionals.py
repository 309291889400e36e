"""
Evaluators for the classical configuration functionals and inequalities.

Everything here is pure. Configuration functionals take a PointConfiguration,
apply the minimum-separation guard and return exact values; the scalar
inequality kernels broadcast over numpy arrays so the property suites can
evaluate millions of samples in one call.
"""

import logging
from typing import Tuple, Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ionlab.exceptions import DegenerateInputError, DomainError
from ionlab.models import FunctionalKind, FunctionalTag, PointConfiguration, RadialMeasure
from ionlab.services.geometry import guarded_geometry

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Constants of the improved ionization bound N < a*Z + b*Z^(1/3)
BOUND_LINEAR = 1.22
BOUND_CUBE_ROOT = 3.0
# Floor on the variational constant and the finite-N correction of the sandwich
BETA_FLOOR = 0.82
SANDWICH_CONSTANT = 1.55


def _scalar_or_array(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def _require_pairs(config: PointConfiguration, name: str) -> None:
    if config.n < 2:
        raise DomainError(f"{name} needs at least two points, got N={config.n}")


def inverse_distances(distances: np.ndarray) -> np.ndarray:
    """1/|x_i - x_j| off the diagonal, zero on it."""
    inv = np.zeros_like(distances)
    mask = ~np.eye(distances.shape[0], dtype=bool)
    inv[mask] = 1.0 / distances[mask]
    return inv


def repulsion_sums(distances: np.ndarray) -> np.ndarray:
    """S_j = sum over i != j of 1/|x_i - x_j|."""
    return inverse_distances(distances).sum(axis=1)


# --- configuration functionals ---------------------------------------------

def sigal_excess(config: PointConfiguration, Z: float) -> float:
    """
    Energy contributed by the farthest electron.

    Returns -Z/|x_f| + sum_{i != f} 1/|x_i - x_f|, with ties for the farthest
    point broken by the lowest index. Positive whenever N > 2Z + 1.
    """
    _require_pairs(config, "sigal_excess")
    distances, radii = guarded_geometry(config.points)
    far = int(np.argmax(radii))
    return float(-Z / radii[far] + repulsion_sums(distances)[far])


def sigal_lower_bound(config: PointConfiguration, Z: float) -> float:
    """(N - 1 - 2Z) / (2|x_f|); never exceeds sigal_excess since |x_i - x_f| <= 2|x_f|."""
    _require_pairs(config, "sigal_lower_bound")
    _, radii = guarded_geometry(config.points)
    return float((config.n - 1 - 2 * Z) / (2 * radii.max()))


def far_field_excess(config: PointConfiguration, Z: float, t: float) -> float:
    """
    |t x_f| times the farthest-electron excess after pushing x_f out by factor t.

    Tends to N - 1 - Z as t grows.
    """
    if not t >= 1:
        raise DomainError(f"far_field_excess needs t >= 1, got {t}")
    _require_pairs(config, "far_field_excess")
    far = int(np.argmax(config.radii))
    points = np.array(config.points)
    points[far] *= t
    moved = PointConfiguration(points=points)
    return float(np.linalg.norm(points[far]) * sigal_excess(moved, Z))


def lsst_terms(distances: np.ndarray, radii: np.ndarray, epsilon: float) -> np.ndarray:
    """Per-electron terms S_j - N(1 - eps)/|x_j|."""
    n = radii.size
    return repulsion_sums(distances) - n * (1 - epsilon) / radii


def lsst_value(config: PointConfiguration, epsilon: float) -> float:
    """max_j of S_j - N(1 - eps)/|x_j|; its sign does not depend on the scale."""
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")
    _require_pairs(config, "lsst_value")
    distances, radii = guarded_geometry(config.points)
    return float(lsst_terms(distances, radii, epsilon).max())


def q_terms(distances: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Per-electron terms |x_j| S_j of the minimax functional."""
    return radii * repulsion_sums(distances)


def q_minimax(config: PointConfiguration) -> float:
    """
    Q(X) = max_j |x_j| sum_{i != j} 1/|x_i - x_j|.

    The classical ionization inequality holds with constant C for a
    configuration exactly when Q(X) >= N - C. A single point gives 0.
    """
    distances, radii = guarded_geometry(config.points)
    if config.n == 1:
        return 0.0
    return float(q_terms(distances, radii).max())


def beta_ratio(config: PointConfiguration) -> float:
    """sum_{i<j} (|x_i|^2 + |x_j|^2)/|x_i - x_j| over (N - 1) sum |x_i|."""
    _require_pairs(config, "beta_ratio")
    distances, radii = guarded_geometry(config.points, check_origin=False)
    squares = radii ** 2
    numerator = 0.5 * ((squares[:, None] + squares[None, :]) * inverse_distances(distances)).sum()
    return float(numerator / ((config.n - 1) * radii.sum()))


def beta_ratio_with_gradient(points: np.ndarray) -> Tuple[float, np.ndarray]:
    """Value and analytic gradient of the beta ratio; no separation guard."""
    n = points.shape[0]
    radii = np.linalg.norm(points, axis=1)
    inv = inverse_distances(squareform(pdist(points)))
    squares = radii ** 2
    pair_sq = squares[:, None] + squares[None, :]

    numerator = 0.5 * (pair_sq * inv).sum()
    denominator = (n - 1) * radii.sum()
    value = numerator / denominator

    weighted = pair_sq * inv ** 3
    grad_num = 2 * points * inv.sum(axis=1)[:, None] - (weighted.sum(axis=1)[:, None] * points - weighted @ points)
    safe = np.where(radii > 0, radii, 1.0)
    grad_den = (n - 1) * points / safe[:, None]
    grad_den[radii == 0] = 0.0
    return float(value), (grad_num - value * grad_den) / denominator


def repulsion_vjp(points: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    """Gradient of sum_j coeffs_j S_j with respect to the positions."""
    inv = inverse_distances(squareform(pdist(points)))
    weighted = (coeffs[:, None] + coeffs[None, :]) * inv ** 3
    return -(weighted.sum(axis=1)[:, None] * points - weighted @ points)


def q_terms_vjp(points: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Gradient of sum_j weights_j |x_j| S_j."""
    radii = np.linalg.norm(points, axis=1)
    sums = repulsion_sums(squareform(pdist(points)))
    radial = (weights * sums / radii)[:, None] * points
    return radial + repulsion_vjp(points, weights * radii)


def lsst_terms_vjp(points: np.ndarray, weights: np.ndarray, epsilon: float) -> np.ndarray:
    """Gradient of sum_j weights_j (S_j - N(1 - eps)/|x_j|)."""
    radii = np.linalg.norm(points, axis=1)
    strength = points.shape[0] * (1 - epsilon)
    return repulsion_vjp(points, weights) + (weights * strength / radii ** 3)[:, None] * points


def lieb_symmetrized_sum(config: PointConfiguration) -> float:
    """(1/(2N)) sum_{i != j} (|x_i| + |x_j|)/|x_i - x_j|; at least (N - 1)/2."""
    distances, radii = guarded_geometry(config.points, check_origin=False)
    pair = (radii[:, None] + radii[None, :]) * inverse_distances(distances)
    return float(pair.sum() / (2 * config.n))


# --- measure functional ----------------------------------------------------

def radial_kernel(radii: np.ndarray) -> np.ndarray:
    """K(r, s) = (r^2 + s^2) / (2 max(r, s)), the angular average of (x^2 + y^2)/(2|x - y|)."""
    squares = radii ** 2
    return (squares[:, None] + squares[None, :]) / (2 * np.maximum(radii[:, None], radii[None, :]))


def measure_ratio(measure: RadialMeasure) -> float:
    """Double integral of the radial kernel over the first radial moment; diagonal included."""
    denominator = measure.first_moment
    if denominator <= 0:
        raise DegenerateInputError("measure has zero first moment")
    w = measure.weights
    return float(w @ radial_kernel(measure.radii) @ w / denominator)


# --- scalar inequality kernels ---------------------------------------------

def triangle_kernel_check(x: np.ndarray, y: np.ndarray) -> ArrayLike:
    """
    (|x| + |y|)/|x - y| - 1, never negative.

    Broadcasts over leading axes; the last axis holds coordinates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    separation = np.linalg.norm(x - y, axis=-1)
    if np.any(separation == 0):
        raise DomainError("triangle_kernel_check is undefined for x = y")
    value = (np.linalg.norm(x, axis=-1) + np.linalg.norm(y, axis=-1)) / separation - 1
    return _scalar_or_array(value)


def elementary_inequality_gap(r: ArrayLike, s: ArrayLike, k: ArrayLike) -> ArrayLike:
    """(r^k + s^k)/max(r, s) - (1 - 1/k)(r^(k-1) + s^(k-1)); non-negative for k > 1."""
    r, s, k = (np.asarray(v, dtype=float) for v in (r, s, k))
    if np.any(k <= 1):
        raise DomainError("elementary_inequality_gap needs k > 1")
    if np.any(r <= 0) or np.any(s <= 0):
        raise DomainError("elementary_inequality_gap needs r, s > 0")
    value = (r ** k + s ** k) / np.maximum(r, s) - (1 - 1 / k) * (r ** (k - 1) + s ** (k - 1))
    return _scalar_or_array(value)


def _radial_pair(r: ArrayLike, s: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(r <= 0) or np.any(s <= 0):
        raise DomainError("radial identities need r, s > 0")
    return (r ** 2 + s ** 2) / np.maximum(r, s), np.maximum(r, s), np.minimum(r, s)


def radial_identity_A(r: ArrayLike, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Angular average of the first proof inequality: both sides equal (r^2 + s^2)/max."""
    lhs, big, small = _radial_pair(r, s)
    rhs = big + small ** 2 / (3 * big) + (2.0 / 3.0) * small ** 2 / big
    return _scalar_or_array(lhs), _scalar_or_array(rhs)


def radial_identity_B(r: ArrayLike, s: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Angular average of the second proof inequality: (r^2 + s^2)/max = max + min^2/max."""
    lhs, big, small = _radial_pair(r, s)
    rhs = big + small ** 2 / big
    return _scalar_or_array(lhs), _scalar_or_array(rhs)


def proof_brackets(which: str, distances: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """
    Pair brackets of the two proof inequalities, zero on the diagonal.

    "A": (r_i^2 + r_j^2)/d - d - (2/3) min^2/max
    "B": (r_i^2 + r_j^2)/d - max - min^2/d
    """
    inv = inverse_distances(distances)
    squares = radii ** 2
    big = np.maximum(radii[:, None], radii[None, :])
    small = np.minimum(radii[:, None], radii[None, :])
    head = (squares[:, None] + squares[None, :]) * inv
    if which == "A":
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = distances + (2.0 / 3.0) * np.where(big > 0, small ** 2 / big, 0.0)
    elif which == "B":
        tail = big + small ** 2 * inv
    else:
        raise DomainError(f"unknown proof inequality {which!r}; expected 'A' or 'B'")
    bracket = head - tail
    np.fill_diagonal(bracket, 0.0)
    return bracket


def _proof_gap(which: str, config: PointConfiguration) -> float:
    _require_pairs(config, f"proof_inequality_{which}")
    distances, radii = guarded_geometry(config.points, check_origin=False)
    return float(proof_brackets(which, distances, radii).sum() / config.n ** 2)


def proof_inequality_A(config: PointConfiguration) -> float:
    """Off-diagonal gap of the first proof inequality with uniform weights 1/N."""
    return _proof_gap("A", config)


def proof_inequality_B(config: PointConfiguration) -> float:
    """Off-diagonal gap of the second proof inequality with uniform weights 1/N."""
    return _proof_gap("B", config)


def cloud_gap(which: str, n: int, rng: np.random.Generator) -> Tuple[float, float]:
    """
    Monte-Carlo estimate of the integral form of a proof inequality.

    Draws n points from the uniform unit ball and averages the pair bracket
    over i != j. The standard error is taken from the spread of the row means.

    Returns:
        (gap, standard_error); a violation is gap < -5 * standard_error
    """
    if n < 3:
        raise DomainError(f"cloud_gap needs at least 3 points, got {n}")
    directions = rng.standard_normal((n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    points = directions * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0)

    distances, radii = guarded_geometry(points, check_origin=False)
    row_means = proof_brackets(which, distances, radii).sum(axis=1) / (n - 1)
    gap = float(row_means.mean())
    standard_error = float(2 * row_means.std(ddof=1) / np.sqrt(n))
    logger.debug(f"cloud gap {which} over {n} points: {gap:.6g} +/- {standard_error:.3g}")
    return gap, standard_error


# --- bounds ----------------------------------------------------------------

def theorem_bound(Z: float) -> float:
    """Improved ionization bound 1.22 Z + 3 Z^(1/3)."""
    if not Z > 0:
        raise DomainError(f"Z must be positive, got {Z}")
    return BOUND_LINEAR * Z + BOUND_CUBE_ROOT * Z ** (1.0 / 3.0)


def lieb_bound(Z: float) -> float:
    """Lieb's bound 2Z + 1."""
    if not Z > 0:
        raise DomainError(f"Z must be positive, got {Z}")
    return 2 * Z + 1


def sandwich_floor(n: int, beta: float = BETA_FLOOR) -> float:
    """Lower bound beta - 1.55 N^(-2/3) on the N-point beta ratio."""
    return beta - SANDWICH_CONSTANT * n ** (-2.0 / 3.0)


def evaluate(kind: FunctionalKind, target: Union[PointConfiguration, RadialMeasure]) -> float:
    """Evaluate the functional named by kind on a configuration or measure."""
    if kind.tag is FunctionalTag.MEASURE_RATIO:
        if not isinstance(target, RadialMeasure):
            raise DomainError("MeasureRatio is evaluated on a RadialMeasure")
        return measure_ratio(target)
    if not isinstance(target, PointConfiguration):
        raise DomainError(f"{kind.tag.value} is evaluated on a PointConfiguration")
    if kind.tag is FunctionalTag.SIGAL_EXCESS:
        return sigal_excess(target, kind.parameters["Z"])
    if kind.tag is FunctionalTag.LSST_VALUE:
        return lsst_value(target, kind.parameters["epsilon"])
    if kind.tag is FunctionalTag.Q_MINIMAX:
        return q_minimax(target)
    return beta_ratio(target)
