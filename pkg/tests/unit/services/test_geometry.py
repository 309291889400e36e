"""Unit tests for configurations, measures and Newton potentials."""

import numpy as np
import pytest

from ionlab.exceptions import DegenerateInputError, DomainError
from ionlab.models import PointConfiguration, RadialMeasure
from ionlab.services import functionals
from ionlab.services.geometry import (
    dump_configuration,
    dump_measure,
    guarded_geometry,
    load_configuration,
    load_measure,
    log_grid,
    min_separation,
    newton_potential,
    normalize_scale,
    pairwise_distances,
    random_configuration,
    random_measure,
    symmetric_configuration,
)


@pytest.mark.unit
class TestPairwiseDistances:
    """Test cases for pairwise_distances."""

    def test_one_dimensional(self):
        distances = pairwise_distances(PointConfiguration(points=[0.0, 3.0]))
        assert distances[0, 1] == pytest.approx(3.0)

    def test_antipodal(self, antipodal_pair):
        distances = pairwise_distances(antipodal_pair)
        assert distances[0, 1] == pytest.approx(2.0)
        assert distances[1, 0] == distances[0, 1]
        np.testing.assert_array_equal(np.diag(distances), 0.0)

    def test_single_point(self):
        distances = pairwise_distances(PointConfiguration(points=[[1.0, 2.0, 3.0]]))
        assert distances.shape == (1, 1)
        assert distances[0, 0] == 0.0


@pytest.mark.unit
class TestNewtonPotential:
    """Test cases for newton_potential."""

    def test_unit_mass(self):
        measure = RadialMeasure(radii=[1.0], weights=[1.0])
        assert newton_potential(measure, 2.0) == pytest.approx(0.5)
        assert newton_potential(measure, 0.5) == pytest.approx(1.0)

    def test_two_shells(self, two_shell_measure):
        assert newton_potential(two_shell_measure, 1.5) == pytest.approx(0.5 / 1.5 + 0.5 / 2, rel=1e-12)

    def test_non_increasing_and_far_field(self, two_shell_measure):
        radii = np.geomspace(0.1, 1e4, 200)
        values = np.array([newton_potential(two_shell_measure, r) for r in radii])
        assert np.all(np.diff(values) <= 1e-15)
        assert values[-1] * radii[-1] == pytest.approx(1.0)

    def test_rejects_non_positive_radius(self, two_shell_measure):
        with pytest.raises(DomainError):
            newton_potential(two_shell_measure, 0.0)


@pytest.mark.unit
class TestNormalizeScale:
    """Test cases for normalize_scale."""

    def test_single_point(self):
        config = normalize_scale(PointConfiguration(points=[[2.0, 0.0, 0.0]]))
        assert config.radii[0] == pytest.approx(1.0)

    def test_antipodal_half_radius(self):
        config = normalize_scale(PointConfiguration(points=[[0.5, 0.0, 0.0], [-0.5, 0.0, 0.0]]))
        np.testing.assert_allclose(config.radii, [1.0, 1.0])

    def test_already_normalized(self, antipodal_pair):
        assert normalize_scale(antipodal_pair) == antipodal_pair

    def test_all_at_origin(self):
        with pytest.raises(DegenerateInputError):
            normalize_scale(PointConfiguration(points=[[0.0, 0.0], [0.0, 0.0]]))


@pytest.mark.unit
class TestGuardedGeometry:
    """Test cases for the minimum-separation guard."""

    def test_coincident_points(self):
        with pytest.raises(DegenerateInputError):
            guarded_geometry(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_point_at_nucleus(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0]])
        with pytest.raises(DegenerateInputError):
            guarded_geometry(points)
        distances, radii = guarded_geometry(points, check_origin=False)
        assert distances[0, 1] == pytest.approx(1.0)
        assert radii[0] == 0.0

    def test_min_separation_counts_the_nucleus(self):
        points = np.array([[0.5, 0.0, 0.0], [-1.5, 0.0, 0.0]])
        assert min_separation(points) == pytest.approx(0.5)


@pytest.mark.unit
class TestSeedConfigurations:
    """Test cases for symmetric and random configurations."""

    def test_simplex_is_regular(self):
        config = symmetric_configuration(4, 3)
        distances = pairwise_distances(config)[np.triu_indices(4, k=1)]
        np.testing.assert_allclose(distances, distances[0], rtol=1e-12)
        assert config.radii.sum() == pytest.approx(4.0)

    @pytest.mark.parametrize("n,dim", [(5, 1), (7, 2), (12, 3)])
    def test_symmetric_is_normalized_and_off_nucleus(self, n, dim):
        config = symmetric_configuration(n, dim)
        assert config.radii.sum() == pytest.approx(n)
        assert config.radii.min() > 0

    def test_half_line_seed(self):
        config = symmetric_configuration(4, 1, half_line=True)
        assert np.all(config.points > 0)

    def test_random_configuration_inside_ball(self, rng):
        config = random_configuration(50, 3, rng, radius=2.0)
        assert config.n == 50
        assert config.radii.max() <= 2.0

    def test_random_half_line(self, rng):
        config = random_configuration(10, 1, rng, half_line=True)
        assert np.all(config.points > 0)

    def test_random_measure_is_probability(self, rng):
        measure = random_measure(20, rng)
        assert measure.weights.sum() == pytest.approx(1.0)

    def test_log_grid(self):
        np.testing.assert_array_equal(log_grid(1, 1.0, 10.0), [1.0])
        grid = log_grid(3, 1e-2, 1.0)
        np.testing.assert_allclose(grid, [1e-2, 1e-1, 1.0])


@pytest.mark.unit
class TestTextFormats:
    """Test cases for the text forms of configurations and measures."""

    def test_configuration_text(self, orthogonal_pair):
        text = dump_configuration(orthogonal_pair)
        assert text.splitlines()[0] == "3 2"
        assert load_configuration(text) == orthogonal_pair

    def test_measure_text(self, two_shell_measure):
        assert load_measure(dump_measure(two_shell_measure)) == two_shell_measure

    def test_malformed_configuration(self):
        with pytest.raises(DomainError):
            load_configuration("3 2\n1.0 0.0 0.0\n")
        with pytest.raises(DomainError):
            load_configuration("three two\n")

    def test_malformed_measure(self):
        with pytest.raises(DomainError):
            load_measure("2\n1.0 1.0\n")


@pytest.mark.unit
class TestRandomizedInvariants:
    """Metric and monotonicity properties on random inputs."""

    def test_triangle_inequality(self, rng):
        for _ in range(20):
            config = random_configuration(12, 3, rng)
            d = pairwise_distances(config)
            # d[i, k] <= d[i, j] + d[j, k] for every triple
            slack = d[:, :, None] + d[None, :, :] - d[:, None, :]
            assert slack.min() >= -1e-12

    def test_scaled_potential_non_decreasing(self, rng):
        radii = np.geomspace(1e-3, 1e3, 300)
        for _ in range(10):
            measure = random_measure(15, rng)
            scaled = np.array([newton_potential(measure, r) * r for r in radii])
            assert np.all(np.diff(scaled) >= -1e-12)
            assert scaled[-1] == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("kind", ["q_minimax", "beta_ratio"])
    def test_normalization_leaves_functionals_unchanged(self, rng, kind):
        evaluate = getattr(functionals, kind)
        for _ in range(10):
            config = random_configuration(7, 3, rng, radius=float(rng.uniform(0.1, 50.0)))
            normalized = normalize_scale(config)
            assert normalized.radii.sum() == pytest.approx(7.0, rel=1e-12)
            assert evaluate(normalized) == pytest.approx(evaluate(config), rel=1e-12)
