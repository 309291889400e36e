"""End-to-end integration tests for the ionlab command line."""

import csv
import json

import pytest

from ionlab.main import main


def _report(out_dir, command):
    return json.loads((out_dir / f"{command}.json").read_text())


@pytest.mark.integration
class TestEndToEndIntegration:
    """End-to-end integration tests."""

    def test_bound_table_default_sweep(self, out_dir):
        """Default Z list crosses over at Z = 6 and writes both formats."""
        assert main(["bound-table", "--out", str(out_dir)]) == 0

        report = _report(out_dir, "bound-table")
        assert report["verdicts"]["crossover_Z"] == 6
        assert report["verdicts"]["crossover_at_6"] == "PASS"
        with open(out_dir / "bound-table.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert [int(row["Z"]) for row in rows][-3:] == [30, 50, 100]

    def test_nu_table_two_points(self, out_dir):
        """nu(2, 3) = 3/2 through the full pipeline."""
        code = main(["nu-table", "--N", "2", "--dims", "3", "--restarts", "2", "--seed", "11",
                     "--jobs", "1", "--out", str(out_dir)])

        assert code == 0
        report = _report(out_dir, "nu-table")
        assert report["seed"] == 11
        assert report["records"][0]["nu"] == pytest.approx(1.5, abs=1e-4)

    def test_nu_table_is_reproducible(self, tmp_path):
        """Same seed, same numbers."""
        values = []
        for name in ("first", "second"):
            out_dir = tmp_path / name
            main(["nu-table", "--N", "3", "--dims", "2", "--restarts", "2", "--seed", "5", "--jobs", "1",
                  "--out", str(out_dir), "--format", "json"])
            values.append(_report(out_dir, "nu-table")["records"][0]["nu"])
        assert values[0] == values[1]

    def test_check_theorem_suites(self, out_dir):
        """Theorem-backed suites pass on a small sample."""
        code = main(["check", "--suite", "sigal", "--suite", "triangle", "--samples", "300", "--seed", "9",
                     "--out", str(out_dir)])

        assert code == 0
        assert _report(out_dir, "check")["verdicts"] == {"sigal": "PASS", "triangle": "PASS"}
        assert not (out_dir / "counterexamples").exists()

    def test_tf_positive_ion(self, out_dir):
        """A positive ion on a coarse grid writes its profile and passes both checks."""
        code = main(["tf", "--Z", "2", "--ratios", "0.5", "--gamma", "1,physical", "--grid-points", "600",
                     "--jobs", "1", "--out", str(out_dir)])

        assert code == 0
        report = _report(out_dir, "tf")
        assert report["verdicts"]["ionization_bound"] == "PASS"
        assert report["verdicts"]["moment_lattice"] == "PASS"
        assert len(list((out_dir / "tf").glob("*.csv"))) == 2

    @pytest.mark.parametrize("argv", [
        ["nu-table", "--dims", "4"],
        ["bound-table", "--unknown-flag"],
        ["check", "--samples", "-1"],
    ])
    def test_bad_arguments(self, argv, out_dir):
        """Malformed command lines exit with code 3 and write nothing."""
        assert main(argv + ["--out", str(out_dir)]) == 3
        assert not out_dir.exists()


@pytest.mark.integration
@pytest.mark.slow
class TestAcceptanceSweeps:
    """Full-size sweeps at the default resolution."""

    def test_beta_sweep(self, out_dir):
        code = main(["beta", "--N", "8,16,32,64", "--grid-points", "200", "--jobs", "0", "--out", str(out_dir)])

        assert code == 0
        report = _report(out_dir, "beta")
        verdicts = report["verdicts"]
        assert report["fit"]["beta_est"] >= 0.80
        assert abs(report["fit"]["beta_est"] - verdicts["beta_rad"]) <= 0.05
        for name in ("sandwich", "below_radial", "cross_method", "beta_floor"):
            assert verdicts[name] == "PASS"

    def test_tf_acceptance(self, out_dir):
        code = main(["tf", "--Z", "1,5,10,20", "--gamma", "1,physical", "--ratios", "0.5,1.0,2.0",
                     "--jobs", "0", "--out", str(out_dir)])

        assert code == 0
        verdicts = _report(out_dir, "tf")["verdicts"]
        assert verdicts["ionization_bound"] == "PASS"
        assert verdicts["moment_lattice"] == "PASS"
        assert verdicts["neutral_binding"] == "PASS"
        assert verdicts["shooting_agreement"] == "PASS"
        assert len(list((out_dir / "tf").glob("*.json"))) == 4 * 2 * 3
