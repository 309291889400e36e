"""Point configurations, radial measures, Newton potentials and scale gauge."""

import logging
from typing import Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ionlab.exceptions import DegenerateInputError, DomainError
from ionlab.models import PointConfiguration, RadialMeasure

logger = logging.getLogger(__name__)

# Minimum separation (after normalization) below which functionals refuse to divide
DELTA_MIN = 1e-9


def pairwise_distances(config: PointConfiguration) -> np.ndarray:
    """Symmetric N x N matrix of Euclidean distances |x_i - x_j|."""
    return squareform(pdist(config.points))


def newton_potential_profile(radii: np.ndarray, masses: np.ndarray, r: np.ndarray) -> np.ndarray:
    """
    Potential of radial shells at many radii: sum_k m_k / max(r, r_k).

    Args:
        radii: Shell radii, strictly increasing
        masses: Shell masses (need not sum to one)
        r: Evaluation radii, all positive

    Returns:
        Array shaped like r
    """
    radii = np.asarray(radii, dtype=float)
    masses = np.asarray(masses, dtype=float)
    r = np.asarray(r, dtype=float)

    inner_mass = np.concatenate(([0.0], np.cumsum(masses)))
    outer_term = np.concatenate((np.cumsum((masses / radii)[::-1])[::-1], [0.0]))
    idx = np.searchsorted(radii, r, side="right")  # shells with r_k <= r
    return inner_mass[idx] / r + outer_term[idx]


def newton_potential(measure: RadialMeasure, r: float) -> float:
    """Coulomb potential of a radial measure at radius r (Newton's theorem)."""
    if not r > 0:
        raise DomainError(f"newton_potential requires r > 0, got {r}")
    return float(newton_potential_profile(measure.radii, measure.weights, np.array([r]))[0])


def normalization_factor(points: np.ndarray) -> float:
    """Scale lambda with sum |lambda x_i| = N."""
    total = float(np.linalg.norm(points, axis=1).sum())
    if total <= 0:
        raise DegenerateInputError("all points sit at the origin; the scale is undefined")
    return points.shape[0] / total


def normalize_scale(config: PointConfiguration) -> PointConfiguration:
    """Rescale so that the radii sum to N; scale-invariant functionals are unchanged."""
    factor = normalization_factor(config.points)
    if factor == 1.0:
        return config
    return PointConfiguration(points=config.points * factor)


def guarded_geometry(points: np.ndarray, check_origin: bool = True,
                     delta_min: float = DELTA_MIN) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distances and radii of a configuration after the minimum-separation guard.

    Args:
        points: N x d coordinates
        check_origin: Also reject points closer than delta_min to the nucleus
        delta_min: Guard measured on the normalized scale

    Returns:
        (distance matrix, radii) at the original scale

    Raises:
        DegenerateInputError: coincident points or a point at the nucleus
    """
    radii = np.linalg.norm(points, axis=1)
    total = radii.sum()
    if total <= 0:
        raise DegenerateInputError("all points sit at the origin")
    factor = points.shape[0] / total

    distances = squareform(pdist(points))
    if points.shape[0] > 1:
        closest = distances[np.triu_indices(points.shape[0], k=1)].min() * factor
        if closest < delta_min:
            raise DegenerateInputError(f"coincident points (normalized separation {closest:.3g})")
    if check_origin and radii.min() * factor < delta_min:
        raise DegenerateInputError(f"a point sits at the nucleus (normalized radius {radii.min() * factor:.3g})")
    return distances, radii


def min_separation(points: np.ndarray) -> float:
    """Smallest normalized distance to another point or to the nucleus."""
    factor = normalization_factor(points)
    radii = np.linalg.norm(points, axis=1)
    closest = radii.min()
    if points.shape[0] > 1:
        closest = min(closest, pdist(points).min())
    return float(closest * factor)


def regular_simplex(n: int, dim: int) -> np.ndarray:
    """Vertices of a regular simplex with n <= dim + 1 vertices on the unit sphere."""
    if n == 1:
        return np.eye(1, dim)
    # Centered standard basis of R^n lives in an (n-1)-dimensional subspace
    vertices = np.eye(n) - 1.0 / n
    _, _, vt = np.linalg.svd(vertices)
    coords = vertices @ vt[: n - 1].T
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    out = np.zeros((n, dim))
    out[:, : n - 1] = coords
    return out


def golden_sphere(n: int) -> np.ndarray:
    """Golden-section spiral on the unit sphere."""
    inc = np.pi * (3 - np.sqrt(5))
    off = 2 / n
    k = np.arange(n)
    phi = k * inc
    y = k * off - 1 + (off / 2)
    r = np.sqrt(1 - y ** 2)
    return np.column_stack((np.cos(phi) * r, y, np.sin(phi) * r))


def symmetric_configuration(n: int, dim: int, half_line: bool = False) -> PointConfiguration:
    """
    Deterministic symmetric seed: simplex, ring, sphere or line lattice.

    Args:
        n: Number of points
        dim: Ambient dimension (1, 2 or 3)
        half_line: In 1D, place every point on the positive ray

    Returns:
        Normalized configuration
    """
    if dim == 1:
        if half_line:
            points = np.arange(1, n + 1, dtype=float).reshape(-1, 1)
        else:
            # 1, -1, 2, -2, ... keeps every point off the nucleus
            k = np.arange(n)
            points = ((k // 2 + 1) * np.where(k % 2 == 0, 1.0, -1.0)).reshape(-1, 1)
    elif n <= dim + 1:
        points = regular_simplex(n, dim)
    elif dim == 2:
        angles = 2 * np.pi * np.arange(n) / n
        points = np.column_stack((np.cos(angles), np.sin(angles)))
    else:
        points = golden_sphere(n)
    return normalize_scale(PointConfiguration(points=points))


def random_configuration(n: int, dim: int, rng: np.random.Generator, radius: float = 2.0,
                         half_line: bool = False) -> PointConfiguration:
    """I.i.d. points uniform in the ball of the given radius (or on (0, radius] for the half-line)."""
    if dim == 1 and half_line:
        points = rng.uniform(0.0, radius, size=(n, 1))
        points[points == 0.0] = radius / 2
        return PointConfiguration(points=points)
    directions = rng.standard_normal((n, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    lengths = radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / dim)
    return PointConfiguration(points=directions * lengths)


def random_measure(size: int, rng: np.random.Generator, r_min: float = 1e-2, r_max: float = 1e2) -> RadialMeasure:
    """Random radial measure with log-uniform shells and Dirichlet weights."""
    radii = np.sort(np.exp(rng.uniform(np.log(r_min), np.log(r_max), size=size)))
    radii = np.unique(radii)
    weights = rng.dirichlet(np.ones(radii.size))
    return RadialMeasure.normalized(radii, weights)


def log_grid(points: int, r_min: float, r_max: float) -> np.ndarray:
    """Logarithmically spaced radii."""
    if points == 1:
        return np.array([r_min])
    return np.geomspace(r_min, r_max, points)


def dump_configuration(config: PointConfiguration) -> str:
    """Text form: 'dim N' then one line of coordinates per point."""
    lines = [f"{config.dim} {config.n}"]
    lines.extend(" ".join(repr(float(c)) for c in row) for row in config.points)
    return "\n".join(lines) + "\n"


def load_configuration(text: str) -> PointConfiguration:
    """Parse the text form written by dump_configuration."""
    lines = [line.split() for line in text.strip().splitlines() if line.strip()]
    try:
        dim, n = int(lines[0][0]), int(lines[0][1])
        rows = [[float(v) for v in row] for row in lines[1:]]
    except (IndexError, ValueError) as e:
        raise DomainError(f"Malformed configuration text: {e}") from e
    if len(rows) != n or any(len(row) != dim for row in rows):
        raise DomainError(f"Expected {n} rows of {dim} coordinates")
    return PointConfiguration(points=np.array(rows).reshape(n, dim))


def dump_measure(measure: RadialMeasure) -> str:
    """Text form: 'K' then one 'radius weight' line per shell."""
    lines = [str(measure.size)]
    lines.extend(f"{float(r)!r} {float(w)!r}" for r, w in zip(measure.radii, measure.weights))
    return "\n".join(lines) + "\n"


def load_measure(text: str) -> RadialMeasure:
    """Parse the text form written by dump_measure."""
    lines = [line.split() for line in text.strip().splitlines() if line.strip()]
    try:
        size = int(lines[0][0])
        pairs = np.array([[float(v) for v in row] for row in lines[1:]], dtype=float)
    except (IndexError, ValueError) as e:
        raise DomainError(f"Malformed measure text: {e}") from e
    if pairs.shape != (size, 2):
        raise DomainError(f"Expected {size} lines of 'radius weight'")
    return RadialMeasure(radii=pairs[:, 0], weights=pairs[:, 1])

