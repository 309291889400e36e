"""Randomized property suites over the classical functionals."""

import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from ionlab.exceptions import ConfigurationError, DegenerateInputError
from ionlab.models import PointConfiguration, SuiteOutcome
from ionlab.services import functionals
from ionlab.services.geometry import dump_configuration, random_configuration
from ionlab.utils.latency_tracker import track_latency

logger = logging.getLogger(__name__)

# Vectorized suites are evaluated in chunks of this many samples
CHUNK = 100_000
# Counterexamples kept per suite
MAX_COUNTEREXAMPLES = 20
# Relative tolerance on inequalities and identities
REL_TOL = 1e-12
# Standard errors a Monte-Carlo gap may fall below zero before it counts
CLOUD_SIGMAS = 5.0
CLOUD_POINTS = 1000


def _suite_rng(seed: int, suite: str) -> np.random.Generator:
    stream = sorted(SUITES).index(suite)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(stream,)))


def _log_uniform(rng: np.random.Generator, low: float, high: float, size) -> np.ndarray:
    return np.exp(rng.uniform(np.log(low), np.log(high), size=size))


def _random_vectors(rng: np.random.Generator, size: int) -> np.ndarray:
    directions = rng.standard_normal((size, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return directions * _log_uniform(rng, 1e-3, 1e3, (size, 1))


def _record(outcome: SuiteOutcome, values: np.ndarray, bad: np.ndarray, payload: Callable[[int], Dict]) -> None:
    outcome.samples += values.size
    outcome.min_value = float(min(values.min(), outcome.min_value if outcome.min_value is not None else np.inf))
    hits = np.flatnonzero(bad)
    outcome.violations += hits.size
    for index in hits[: MAX_COUNTEREXAMPLES - len(outcome.counterexamples)]:
        outcome.counterexamples.append(payload(int(index)))


def suite_sigal(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Farthest-electron excess is positive whenever N > 2Z + 1, and dominates its lower bound."""
    outcome = SuiteOutcome(suite="sigal", samples=0)
    values = np.empty(samples)
    bad = np.zeros(samples, dtype=bool)
    configs: List[Optional[PointConfiguration]] = []
    charges = np.empty(samples)
    for i in range(samples):
        n = int(rng.integers(3, 51))
        Z = float(rng.uniform(0.0, (n - 1) / 2))
        config = random_configuration(n, 3, rng)
        charges[i] = Z
        try:
            value = functionals.sigal_excess(config, Z)
            bound = functionals.sigal_lower_bound(config, Z)
        except DegenerateInputError:
            outcome.skipped += 1
            values[i] = np.inf
            configs.append(None)
            continue
        values[i] = value
        bad[i] = value <= 0 or value < bound - REL_TOL * abs(bound)
        configs.append(config if bad[i] else None)

    kept = np.flatnonzero(np.isfinite(values))
    _record(outcome, values[kept], bad[kept],
            lambda j: {"Z": float(charges[kept[j]]), "configuration": dump_configuration(configs[kept[j]])})
    outcome.samples += outcome.skipped
    return outcome


def suite_triangle(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """(|x| + |y|)/|x - y| - 1 is never negative."""
    outcome = SuiteOutcome(suite="triangle", samples=0)
    remaining = samples
    while remaining:
        size = min(CHUNK, remaining)
        x, y = _random_vectors(rng, size), _random_vectors(rng, size)
        values = np.asarray(functionals.triangle_kernel_check(x, y))
        _record(outcome, values, values < -REL_TOL,
                lambda j: {"x": x[j].tolist(), "y": y[j].tolist()})
        remaining -= size
    return outcome


def suite_elementary(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """(r^k + s^k)/max - (1 - 1/k)(r^(k-1) + s^(k-1)) >= 0 for k in (1, 50]."""
    outcome = SuiteOutcome(suite="elementary", samples=0)
    remaining = samples
    while remaining:
        size = min(CHUNK, remaining)
        r = _log_uniform(rng, 1e-1, 1e1, size)
        s = _log_uniform(rng, 1e-1, 1e1, size)
        k = 1.0 + rng.uniform(0.0, 49.0, size)
        k[k <= 1.0] = 50.0
        gap = np.asarray(functionals.elementary_inequality_gap(r, s, k))
        scale = (r ** k + s ** k) / np.maximum(r, s)
        _record(outcome, gap / scale, gap < -REL_TOL * scale,
                lambda j: {"r": float(r[j]), "s": float(s[j]), "k": float(k[j])})
        remaining -= size
    return outcome


def _radial_suite(name: str, identity: Callable, samples: int, rng: np.random.Generator) -> SuiteOutcome:
    outcome = SuiteOutcome(suite=name, samples=0)
    remaining = samples
    while remaining:
        size = min(CHUNK, remaining)
        r = _log_uniform(rng, 1e-3, 1e3, size)
        s = _log_uniform(rng, 1e-3, 1e3, size)
        lhs, rhs = (np.asarray(v) for v in identity(r, s))
        relative = np.abs(lhs - rhs) / np.abs(lhs)
        # Recorded as a margin so that the minimum is the worst case
        _record(outcome, REL_TOL - relative, relative > REL_TOL,
                lambda j: {"r": float(r[j]), "s": float(s[j]), "lhs": float(lhs[j]), "rhs": float(rhs[j])})
        remaining -= size
    return outcome


def suite_proof_a_radial(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Angular average of the first proof inequality holds with equality."""
    return _radial_suite("proofA-radial", functionals.radial_identity_A, samples, rng)


def suite_proof_b_radial(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Angular average of the second proof inequality holds with equality."""
    return _radial_suite("proofB-radial", functionals.radial_identity_B, samples, rng)


def _offdiag_suite(name: str, gap: Callable, samples: int, rng: np.random.Generator) -> SuiteOutcome:
    outcome = SuiteOutcome(suite=name, samples=0, exploratory=True)
    per_n = max(1, samples // 38)
    for n in range(3, 41):
        worst = np.inf
        worst_config = None
        for _ in range(per_n):
            config = random_configuration(n, 3, rng)
            try:
                value = gap(config)
            except DegenerateInputError:
                outcome.skipped += 1
                continue
            outcome.samples += 1
            if value < worst:
                worst, worst_config = value, config
        outcome.rows.append({"N": n, "min_gap": float(worst), "negative": bool(worst < 0)})
        if worst_config is not None and worst < 0 and len(outcome.counterexamples) < MAX_COUNTEREXAMPLES:
            outcome.counterexamples.append({"N": n, "gap": float(worst), "configuration": dump_configuration(worst_config)})
    outcome.min_value = float(min(row["min_gap"] for row in outcome.rows))
    return outcome


def suite_proof_a_offdiag(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Empirical minima of the off-diagonal gap of the first proof inequality, N in [3, 40]."""
    return _offdiag_suite("proofA-offdiag", functionals.proof_inequality_A, samples, rng)


def suite_proof_b_offdiag(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Empirical minima of the off-diagonal gap of the second proof inequality, N in [3, 40]."""
    return _offdiag_suite("proofB-offdiag", functionals.proof_inequality_B, samples, rng)


def suite_lieb(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """The symmetrized triangle-inequality sum is at least (N - 1)/2."""
    outcome = SuiteOutcome(suite="lieb", samples=0)
    margins = np.empty(samples)
    configs = []
    for i in range(samples):
        n = int(rng.integers(2, 51))
        config = random_configuration(n, 3, rng)
        configs.append(config)
        floor = (n - 1) / 2
        margins[i] = (functionals.lieb_symmetrized_sum(config) - floor) / floor
    _record(outcome, margins, margins < -REL_TOL,
            lambda j: {"configuration": dump_configuration(configs[j])})
    return outcome


def suite_beta_floor(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """beta_ratio(X) >= 0.82 - 1.55 N^(-2/3) for random configurations, N in [2, 64]."""
    outcome = SuiteOutcome(suite="beta-floor", samples=0)
    margins = np.empty(samples)
    configs = []
    for i in range(samples):
        n = int(rng.integers(2, 65))
        config = random_configuration(n, 3, rng)
        configs.append(config)
        margins[i] = functionals.beta_ratio(config) - functionals.sandwich_floor(n)
    _record(outcome, margins, margins < 0,
            lambda j: {"configuration": dump_configuration(configs[j])})
    return outcome


def suite_scale(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Q and beta are scale invariant; the signs of sigal and lsst are."""
    outcome = SuiteOutcome(suite="scale", samples=0)
    margins = np.empty(samples)
    records = []
    for i in range(samples):
        n = int(rng.integers(2, 21))
        config = random_configuration(n, 3, rng)
        factor = float(_log_uniform(rng, 1e-3, 1e3, 1)[0])
        scaled = PointConfiguration(points=config.points * factor)
        Z = float(rng.uniform(0.1, n))
        epsilon = float(rng.uniform(0.01, 0.99))
        drift = max(
            abs(functionals.q_minimax(scaled) / functionals.q_minimax(config) - 1),
            abs(functionals.beta_ratio(scaled) / functionals.beta_ratio(config) - 1),
        )
        same_signs = (
            np.sign(functionals.sigal_excess(scaled, Z)) == np.sign(functionals.sigal_excess(config, Z))
            and np.sign(functionals.lsst_value(scaled, epsilon)) == np.sign(functionals.lsst_value(config, epsilon))
        )
        # A flipped sign counts as a full unit of drift
        margins[i] = REL_TOL - (drift if same_signs else 1.0)
        records.append({"factor": factor, "Z": Z, "epsilon": epsilon, "configuration": dump_configuration(config)})
    _record(outcome, margins, margins < 0, lambda j: records[j])
    return outcome


def suite_cloud(samples: int, rng: np.random.Generator) -> SuiteOutcome:
    """Monte-Carlo integral forms of both proof inequalities on uniform-ball clouds."""
    outcome = SuiteOutcome(suite="cloud", samples=0)
    for _ in range(samples):
        for which in ("A", "B"):
            gap, standard_error = functionals.cloud_gap(which, CLOUD_POINTS, rng)
            violated = gap < -CLOUD_SIGMAS * standard_error
            outcome.rows.append({"inequality": which, "gap": gap, "standard_error": standard_error, "violated": violated})
            outcome.samples += 1
            outcome.violations += int(violated)
            if violated and len(outcome.counterexamples) < MAX_COUNTEREXAMPLES:
                outcome.counterexamples.append(outcome.rows[-1])
    outcome.min_value = float(min(row["gap"] for row in outcome.rows)) if outcome.rows else None
    return outcome


SUITES: Dict[str, Callable[[int, np.random.Generator], SuiteOutcome]] = {
    "sigal": suite_sigal,
    "triangle": suite_triangle,
    "elementary": suite_elementary,
    "proofA-radial": suite_proof_a_radial,
    "proofB-radial": suite_proof_b_radial,
    "proofA-offdiag": suite_proof_a_offdiag,
    "proofB-offdiag": suite_proof_b_offdiag,
    "lieb": suite_lieb,
    "beta-floor": suite_beta_floor,
    "scale": suite_scale,
    "cloud": suite_cloud,
}

DEFAULT_SAMPLES: Dict[str, int] = {
    "sigal": 100_000,
    "triangle": 1_000_000,
    "elementary": 1_000_000,
    "proofA-radial": 100_000,
    "proofB-radial": 100_000,
    "proofA-offdiag": 1_900,
    "proofB-offdiag": 1_900,
    "lieb": 10_000,
    "beta-floor": 10_000,
    "scale": 1_000,
    "cloud": 5,
}


@track_latency("property_suite")
def run_suite(name: str, samples: Optional[int], seed: int) -> SuiteOutcome:
    """Run one named suite with its own seeded stream."""
    if name not in SUITES:
        raise ConfigurationError(f"Unknown suite {name!r}; choose from {', '.join(sorted(SUITES))}")
    count = DEFAULT_SAMPLES[name] if samples is None else samples
    if count < 1:
        raise ConfigurationError(f"samples must be positive, got {count}")
    outcome = SUITES[name](count, _suite_rng(seed, name))
    logger.info(
        f"Suite {name}: {outcome.samples} samples, {outcome.violations} violations, "
        f"min={outcome.min_value if outcome.min_value is not None else float('nan'):.6g}"
    )
    return outcome
