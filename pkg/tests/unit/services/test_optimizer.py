"""Unit tests for the multi-start global search."""

import numpy as np
import pytest

from ionlab.exceptions import ConfigurationError
from ionlab.models import FunctionalKind, PointConfiguration, RadialMeasure, SearchOptions
from ionlab.services import functionals
from ionlab.services.geometry import log_grid
from ionlab.services.optimizer import (
    ConfigObjective,
    bisect_epsilon,
    finite_difference_gradient,
    minimize_config,
    minimize_measure_ratio,
    nu_constant,
    pair_oracle,
    project_on_simplex,
    restart_rng,
)


@pytest.mark.unit
class TestHelpers:
    """Test cases for the search helpers."""

    def test_restart_streams_are_independent(self):
        first = restart_rng(5, 1).standard_normal(4)
        again = restart_rng(5, 1).standard_normal(4)
        other = restart_rng(5, 2).standard_normal(4)
        annealing = restart_rng(5, 1, stream=1).standard_normal(4)

        np.testing.assert_array_equal(first, again)
        assert not np.allclose(first, other)
        assert not np.allclose(first, annealing)

    def test_projection_on_simplex(self):
        projected = project_on_simplex(np.array([0.8, 0.6, -0.5]))
        np.testing.assert_allclose(projected, [0.6, 0.4, 0.0])
        assert projected.sum() == pytest.approx(1.0)

    def test_projection_keeps_simplex_points(self):
        point = np.array([0.2, 0.3, 0.5])
        np.testing.assert_allclose(project_on_simplex(point), point)

    def test_finite_difference_gradient(self):
        grad = finite_difference_gradient(lambda x: float((x ** 2).sum()), np.array([1.0, -2.0]))
        np.testing.assert_allclose(grad, [2.0, -4.0], rtol=1e-8)


@pytest.mark.unit
class TestConfigObjective:
    """Test cases for the smoothed objective."""

    @pytest.mark.parametrize("kind", [FunctionalKind.q_minimax(), FunctionalKind.lsst_value(0.4),
                                      FunctionalKind.beta_ratio()])
    def test_smoothed_gradient(self, kind, rng):
        objective = ConfigObjective(kind, 4, 3)
        z = objective.normalize(rng.uniform(-1, 1, 12))
        _, grad = objective.smoothed(z, 0.5)
        numeric = finite_difference_gradient(lambda x: objective.smoothed(x, 0.5)[0], z)
        np.testing.assert_allclose(grad, numeric, rtol=1e-4, atol=1e-6)

    def test_exact_is_gauge_free(self, rng):
        objective = ConfigObjective(FunctionalKind.q_minimax(), 5, 2)
        z = rng.uniform(-1, 1, 10)
        assert objective.exact(z) == pytest.approx(objective.exact(3.7 * z), rel=1e-12)

    def test_half_line_coordinates(self):
        objective = ConfigObjective(FunctionalKind.q_minimax(), 3, 1, half_line=True)
        points = objective.to_points(np.array([0.0, np.log(2.0), np.log(3.0)]))
        np.testing.assert_allclose(points[:, 0], [1.0, 2.0, 3.0])


@pytest.mark.unit
class TestMinimizeConfig:
    """Test cases for minimize_config."""

    def test_beta_two_points(self, fast_options):
        result = minimize_config(FunctionalKind.beta_ratio(), 2, 3, fast_options)
        assert result.best_value == pytest.approx(0.5, abs=1e-6)

    def test_q_two_points(self, fast_options):
        result = minimize_config(FunctionalKind.q_minimax(), 2, 3, fast_options)
        assert result.best_value == pytest.approx(0.5, abs=1e-6)

    @pytest.mark.parametrize("kind", [FunctionalKind.beta_ratio(), FunctionalKind.q_minimax()])
    def test_two_points_match_brute_force(self, kind, fast_options):
        oracle_value, oracle_config = pair_oracle(kind)
        result = minimize_config(kind, 2, 3, fast_options)

        assert oracle_value == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(oracle_config.radii, [1.0, 1.0])
        assert result.best_value == pytest.approx(oracle_value, abs=1e-6)

    def test_pair_oracle_rejects_non_invariant_kinds(self):
        with pytest.raises(ConfigurationError):
            pair_oracle(FunctionalKind.lsst_value(0.5))

    def test_best_value_is_exact_at_best_config(self, fast_options):
        result = minimize_config(FunctionalKind.q_minimax(), 5, 2, fast_options)
        assert isinstance(result.best_config, PointConfiguration)
        assert result.best_config.radii.sum() == pytest.approx(5.0)
        assert result.best_value == pytest.approx(functionals.q_minimax(result.best_config), rel=1e-12)
        assert result.best_value == min(result.per_restart_values)
        assert result.min_separation > 0

    def test_deterministic(self, fast_options):
        first = minimize_config(FunctionalKind.beta_ratio(), 6, 3, fast_options)
        second = minimize_config(FunctionalKind.beta_ratio(), 6, 3, fast_options)
        assert first.per_restart_values == second.per_restart_values
        assert first.best_config == second.best_config

    def test_more_restarts_never_worse(self):
        few = SearchOptions(restarts=2, max_iterations=100, seed=3, anneal=False)
        many = few.model_copy(update={"restarts": 5})
        kind = FunctionalKind.q_minimax()
        assert minimize_config(kind, 4, 2, many).best_value <= minimize_config(kind, 4, 2, few).best_value

    def test_full_line_three_points_agrees_across_seeds(self):
        values = [
            minimize_config(FunctionalKind.q_minimax(), 3, 1, SearchOptions(restarts=4, seed=seed)).best_value
            for seed in (1, 2)
        ]
        assert values[0] == pytest.approx(values[1], abs=1e-4)

    def test_half_line_stays_on_ray(self, fast_options):
        result = minimize_config(FunctionalKind.q_minimax(), 3, 1, fast_options, half_line=True)
        assert np.all(result.best_config.points > 0)
        assert result.best_value >= 2 - 1e-9

    @pytest.mark.parametrize("kwargs", [
        {"kind": FunctionalKind.sigal_excess(1.0), "n": 3, "dim": 3},
        {"kind": FunctionalKind.q_minimax(), "n": 1, "dim": 3},
        {"kind": FunctionalKind.q_minimax(), "n": 3, "dim": 4},
        {"kind": FunctionalKind.q_minimax(), "n": 3, "dim": 2, "half_line": True},
    ])
    def test_invalid_requests(self, kwargs):
        with pytest.raises(ConfigurationError):
            minimize_config(opts=SearchOptions(restarts=1), **kwargs)


@pytest.mark.unit
class TestMinimizeMeasureRatio:
    """Test cases for the radial relaxation search."""

    def test_single_radius(self):
        result = minimize_measure_ratio([1.0], SearchOptions(restarts=2))
        assert result.best_value == pytest.approx(1.0)
        assert isinstance(result.best_config, RadialMeasure)
        np.testing.assert_allclose(result.best_config.weights, [1.0])

    def test_two_radii_beat_uniform(self):
        result = minimize_measure_ratio([1.0, 2.0], SearchOptions(restarts=3))
        assert result.best_value <= 0.91667
        # optimum at weight sqrt(2) - 1 on the outer shell
        assert result.best_value == pytest.approx(np.sqrt(2) - 0.5, abs=1e-4)

    @pytest.mark.parametrize("grid", [[], [1.0, 1.0], [-1.0, 2.0], [2.0, 1.0]])
    def test_invalid_grids(self, grid):
        with pytest.raises(ConfigurationError):
            minimize_measure_ratio(grid)

    @pytest.mark.slow
    def test_log_grid_value_range(self):
        result = minimize_measure_ratio(log_grid(200, 1e-2, 1e2), SearchOptions(restarts=2), max_iterations=20_000)
        assert 0.82 <= result.best_value <= 1.0


@pytest.mark.unit
class TestNuAndEpsilon:
    """Test cases for nu_constant and bisect_epsilon."""

    def test_nu_two_points_space(self, fast_options):
        assert nu_constant(2, 3, opts=fast_options) == pytest.approx(1.5, abs=1e-4)

    def test_nu_two_points_full_line(self, fast_options):
        assert nu_constant(2, 1, opts=fast_options) == pytest.approx(1.5, abs=1e-4)

    def test_nu_half_line_at_most_one(self, fast_options):
        assert nu_constant(2, 1, half_line=True, opts=fast_options) <= 1 + 1e-6

    @pytest.mark.slow
    @pytest.mark.parametrize("n", range(2, 11))
    def test_nu_half_line_bounded_by_one(self, n):
        opts = SearchOptions(restarts=4, max_iterations=300, seed=5)
        assert nu_constant(n, 1, half_line=True, opts=opts) <= 1 + 1e-6

    @pytest.mark.slow
    def test_epsilon_decreases_with_size(self):
        opts = SearchOptions(restarts=2, max_iterations=200, seed=5, anneal=False)
        assert bisect_epsilon(30, 3, opts) < bisect_epsilon(5, 3, opts)

    @pytest.mark.slow
    @pytest.mark.parametrize("dim", [1, 3])
    def test_epsilon_two_points(self, dim):
        opts = SearchOptions(restarts=2, max_iterations=150, anneal=False)
        assert bisect_epsilon(2, dim, opts) == pytest.approx(0.75, abs=1e-3)
