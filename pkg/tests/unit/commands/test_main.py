"""Unit tests for the command-line entry point."""

import json

import pytest

from ionlab.main import ArgumentError, build_parser, main, parse_gammas, parse_range
from ionlab.services.tf_atom import PHYSICAL_GAMMA


@pytest.mark.unit
class TestParsing:
    """Test cases for list parsing and the parser."""

    def test_parse_range(self):
        assert parse_range("2-5,8") == [2, 3, 4, 5, 8]
        assert parse_range("0.5, 1", float) == [0.5, 1.0]

    @pytest.mark.parametrize("text", ["", "a-b", "2-"])
    def test_parse_range_errors(self, text):
        with pytest.raises(ArgumentError):
            parse_range(text)

    def test_parse_gammas(self):
        assert parse_gammas("1,physical") == [1.0, PHYSICAL_GAMMA]

    def test_parser_defaults(self):
        args = build_parser().parse_args(["nu-table", "--N", "2-4", "--half-line"])
        assert args.command == "nu-table"
        assert args.half_line
        assert args.seed is None

    def test_unknown_flag(self):
        with pytest.raises(ArgumentError):
            build_parser().parse_args(["beta", "--bogus"])


@pytest.mark.unit
class TestMain:
    """Test cases for main()."""

    def test_bound_table(self, out_dir):
        code = main(["bound-table", "--Z", "1-8", "--out", str(out_dir)])

        assert code == 0
        report = json.loads((out_dir / "bound-table.json").read_text())
        assert report["verdicts"]["crossover_Z"] == 6
        assert (out_dir / "bound-table.csv").exists()

    def test_format_json_only(self, out_dir):
        assert main(["bound-table", "--Z", "5,6", "--out", str(out_dir), "--format", "json"]) == 0
        assert not (out_dir / "bound-table.csv").exists()

    @pytest.mark.parametrize("argv", [
        ["nu-table", "--N", "1", "--dims", "3"],
        ["nu-table", "--dims", "4"],
        ["check", "--suite", "bogus"],
        ["beta", "--restarts", "0"],
        ["tf", "--Z", "x"],
        ["frobnicate"],
    ])
    def test_bad_arguments_exit_three(self, argv):
        assert main(argv) == 3

    def test_config_file(self, tmp_path, out_dir):
        config = tmp_path / "lab.conf"
        config.write_text(f"out_dir = {out_dir}\noutput_format = csv\n")

        assert main(["bound-table", "--Z", "6", "--config", str(config)]) == 0
        assert (out_dir / "bound-table.csv").exists()
        assert not (out_dir / "bound-table.json").exists()

    def test_check_command(self, out_dir):
        code = main(["check", "--suite", "triangle", "--samples", "1000", "--seed", "3", "--out", str(out_dir)])

        assert code == 0
        report = json.loads((out_dir / "check.json").read_text())
        assert report["seed"] == 3
        assert report["verdicts"] == {"triangle": "PASS"}

    def test_seed_echoed_without_randomness(self, out_dir):
        assert main(["bound-table", "--Z", "6", "--seed", "42", "--out", str(out_dir)]) == 0
        assert json.loads((out_dir / "bound-table.json").read_text())["seed"] == 42

    def test_reports_reproduce(self, tmp_path):
        reports = []
        for name in ("first", "second"):
            out = tmp_path / name
            assert main(["bound-table", "--Z", "1-8", "--seed", "9", "--out", str(out), "--format", "json"]) == 0
            report = json.loads((out / "bound-table.json").read_text())
            report.pop("wall_time")
            reports.append(report)

        assert "created_at" not in reports[0]
        assert reports[0] == reports[1]
