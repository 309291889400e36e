"""Unit tests for the bound-table command."""

import pytest

from ionlab.commands.bound_table import cmd_bound_table, crossover
from ionlab.exceptions import ConfigurationError


@pytest.mark.unit
class TestBoundTable:
    """Test cases for cmd_bound_table."""

    def test_rows(self):
        report = cmd_bound_table([6, 1, 5])
        rows = {row["Z"]: row for row in report.records}

        assert [row["Z"] for row in report.records] == [1, 5, 6]
        assert rows[1]["theorem_bound"] == pytest.approx(4.22)
        assert rows[1]["lieb_bound"] == 3
        assert rows[1]["smaller"] == "lieb"
        assert rows[5]["theorem_bound"] == pytest.approx(11.23, abs=5e-3)
        assert rows[5]["smaller"] == "lieb"
        assert rows[6]["theorem_bound"] == pytest.approx(12.77, abs=5e-3)
        assert rows[6]["smaller"] == "theorem"
        assert rows[6]["theorem_ratio"] == pytest.approx(rows[6]["theorem_bound"] / 6)

    def test_crossover_at_six(self):
        report = cmd_bound_table(list(range(1, 21)))

        assert report.verdicts["crossover_Z"] == 6
        assert report.verdicts["crossover_at_6"] == "PASS"
        assert report.verdicts["asymptotic_ratio"] == {"theorem": 1.22, "lieb": 2.0}
        assert report.exit_code == 0
        assert report.fit is None

    def test_ratio_tends_to_linear_constant(self):
        report = cmd_bound_table([1e9])
        assert report.records[0]["theorem_ratio"] == pytest.approx(1.22, abs=1e-5)

    def test_crossover_helper(self):
        rows = [{"Z": 1, "smaller": "lieb"}, {"Z": 2, "smaller": "theorem"}, {"Z": 3, "smaller": "theorem"}]
        assert crossover(rows) == 2
        assert crossover([{"Z": 1, "smaller": "lieb"}]) is None

    def test_invalid_charges(self):
        with pytest.raises(ConfigurationError):
            cmd_bound_table([0, 3])

    def test_seed_is_echoed(self):
        assert cmd_bound_table([5, 6], seed=3).seed == 3
        assert cmd_bound_table([5, 6]).seed is None
