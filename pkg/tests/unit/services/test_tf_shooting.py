"""Unit tests for the universal screening function."""

import numpy as np
import pytest

from ionlab.exceptions import DomainError
from ionlab.services.tf_atom import PHYSICAL_GAMMA, solve_tf
from ionlab.services.tf_shooting import shooting_deviation, solve_neutral_tf_shooting


@pytest.fixture(scope="module")
def screening():
    """Converged screening function on [X_START, 10]."""
    return solve_neutral_tf_shooting()


@pytest.mark.unit
class TestShooting:
    """Test cases for solve_neutral_tf_shooting."""

    def test_initial_slope(self, screening):
        assert screening.slope == pytest.approx(-1.588071, abs=1e-5)

    def test_boundary_behaviour(self, screening):
        assert screening.chi(1e-6) == pytest.approx(1.0, abs=1e-5)
        values = screening.chi(np.geomspace(1e-3, 10.0, 50))
        assert np.all(values > 0)
        assert np.all(np.diff(values) < 0)

    def test_known_values(self, screening):
        assert screening.chi(1.0) == pytest.approx(0.424, abs=1e-3)
        assert screening.chi(10.0) == pytest.approx(0.0243, abs=5e-4)

    def test_outside_table(self, screening):
        with pytest.raises(DomainError):
            screening.chi(20.0)


@pytest.mark.unit
@pytest.mark.slow
class TestShootingDeviation:
    """The fixed-point neutral atom reproduces the screening function."""

    @pytest.mark.parametrize("Z,gamma", [(1.0, PHYSICAL_GAMMA), (20.0, 1.0)])
    def test_neutral_profiles_agree(self, screening, Z, gamma):
        sol = solve_tf(Z, Z, gamma)
        assert shooting_deviation(sol, screening) <= 1e-3
