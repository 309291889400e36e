"""Command-line entry point of the ionization laboratory."""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from ionlab import __version__
from ionlab.commands.beta import cmd_beta
from ionlab.commands.bound_table import cmd_bound_table
from ionlab.commands.check import cmd_check
from ionlab.commands.nu_table import cmd_nu_table
from ionlab.commands.runner import EXIT_BAD_ARGUMENTS, search_options
from ionlab.commands.tf import cmd_tf
from ionlab.config import Settings, resolve_settings
from ionlab.exceptions import IonLabError
from ionlab.models import ExperimentReport, GridSpec
from ionlab.services.report_writer import write_report
from ionlab.services.tf_atom import PHYSICAL_GAMMA
from ionlab.utils.logging_config import setup_logging

logger = logging.getLogger(__name__)

DEFAULT_NU_N = "2-30"
DEFAULT_BETA_N = "2,3,4,5,6,8,10,12,16,20,24,32"
DEFAULT_BOUND_Z = "1-20,30,50,100"


class ArgumentError(IonLabError):
    """Malformed command-line value."""

    exit_code = EXIT_BAD_ARGUMENTS


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting, so bad flags map to exit code 3."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ArgumentError(message)


def parse_range(text: str, cast: type = int) -> List[Any]:
    """Parse "2-10,12,16" style lists; ranges are only valid for integers."""
    values: List[Any] = []
    try:
        for part in filter(None, (piece.strip() for piece in text.split(","))):
            if cast is int and "-" in part:
                low, high = part.split("-", 1)
                values.extend(range(int(low), int(high) + 1))
            else:
                values.append(cast(part))
    except ValueError as e:
        raise ArgumentError(f"cannot parse {text!r}: {e}") from e
    if not values:
        raise ArgumentError(f"empty list {text!r}")
    return values


def parse_gammas(text: str) -> List[float]:
    """Gamma list where "physical" stands for (3 pi^2)^(2/3)."""
    return [PHYSICAL_GAMMA if part.strip() == "physical" else parse_range(part, float)[0]
            for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, help="Master seed (u64)")
    common.add_argument("--jobs", type=int, help="Worker processes (0 = one per processor)")
    common.add_argument("--out", dest="out_dir", help="Output directory")
    common.add_argument("--format", dest="output_format", choices=("json", "csv", "both"))
    common.add_argument("--restarts", type=int, help="Restarts per global search")
    common.add_argument("--tol", type=float, help="Convergence tolerance")
    common.add_argument("--config", help="Flat key = value config file")
    common.add_argument("--log-level", dest="log_level", choices=("DEBUG", "INFO", "WARNING", "ERROR"))

    parser = _Parser(prog="ionlab", description="Numerical laboratory for the classical ionization problem")
    parser.add_argument("--version", action="version", version=f"ionlab {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    nu = commands.add_parser("nu-table", parents=[common], help="nu(N, d) = N - inf Q")
    nu.add_argument("--N", dest="n_values", default=DEFAULT_NU_N)
    nu.add_argument("--dims", default="1,2,3")
    nu.add_argument("--half-line", action="store_true", help="Add the half-line convention in d = 1")
    nu.add_argument("--epsilon", action="store_true", help="Also bisect eps*(N, d)")

    beta = commands.add_parser("beta", parents=[common], help="beta estimates from configurations and radial measures")
    beta.add_argument("--N", dest="n_values", default=DEFAULT_BETA_N)
    beta.add_argument("--grid-points", type=int, help="Radial grid size of the measure relaxation")

    tf = commands.add_parser("tf", parents=[common], help="Thomas-Fermi atoms and the moment inequality")
    tf.add_argument("--Z", dest="z_values", default="1,10,50")
    tf.add_argument("--N-target", dest="n_targets", help="Absolute electron numbers")
    tf.add_argument("--ratios", default="1.0,0.5", help="Electron numbers as multiples of Z")
    tf.add_argument("--gamma", default="physical")
    tf.add_argument("--grid-points", type=int)
    tf.add_argument("--mixing", choices=("newton", "linear"))
    tf.add_argument("--alpha", type=float, help="Damping of the linear mixing")

    check = commands.add_parser("check", parents=[common], help="Randomized property suites")
    check.add_argument("--suite", action="append", dest="suites", help="Suite name or all (repeatable)")
    check.add_argument("--samples", type=int)

    bounds = commands.add_parser("bound-table", parents=[common], help="1.22 Z + 3 Z^(1/3) against 2Z + 1")
    bounds.add_argument("--Z", dest="z_values", default=DEFAULT_BOUND_Z)
    return parser


def _settings_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    names = ("seed", "jobs", "out_dir", "output_format", "restarts", "tol", "log_level", "alpha", "mixing",
             "grid_points")
    overrides = {name: getattr(args, name, None) for name in names}
    if args.command == "tf":
        overrides["tf_alpha"] = overrides.pop("alpha")
        overrides["tf_mixing"] = overrides.pop("mixing")
        overrides["tf_grid_points"] = overrides.pop("grid_points")
    else:
        overrides.pop("alpha")
        overrides.pop("mixing")
        overrides["measure_grid_points"] = overrides.pop("grid_points")
    return overrides


def run_command(args: argparse.Namespace, settings: Settings) -> ExperimentReport:
    """Dispatch a parsed command line to its command function."""
    opts = search_options(settings)
    if args.command == "nu-table":
        return cmd_nu_table(parse_range(args.n_values), parse_range(args.dims), args.half_line, opts,
                            jobs=settings.jobs, epsilon=args.epsilon)
    if args.command == "beta":
        grid = GridSpec(points=settings.measure_grid_points, r_min=settings.measure_r_min, r_max=settings.measure_r_max)
        return cmd_beta(parse_range(args.n_values), grid, opts, jobs=settings.jobs)
    if args.command == "tf":
        return cmd_tf(
            parse_range(args.z_values, float),
            parse_gammas(args.gamma),
            GridSpec(points=settings.tf_grid_points),
            n_targets=parse_range(args.n_targets, float) if args.n_targets else None,
            ratios=parse_range(args.ratios, float),
            mixing=settings.tf_mixing,
            alpha=settings.tf_alpha,
            max_iterations=settings.tf_max_iterations,
            tol=settings.tf_tol,
            out_dir=settings.out_dir,
            jobs=settings.jobs,
            seed=settings.seed,
        )
    if args.command == "check":
        return cmd_check(args.suites or ["all"], args.samples, settings.seed, out_dir=settings.out_dir)
    return cmd_bound_table(parse_range(args.z_values), seed=settings.seed)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and write its report.

    Returns:
        Process exit code: 0 success, 1 property violation, 2 convergence failure, 3 bad arguments
    """
    try:
        args = build_parser().parse_args(argv)
        settings = resolve_settings(_settings_overrides(args), args.config)
    except IonLabError as e:
        print(f"ionlab: {e}", file=sys.stderr)
        return e.exit_code

    setup_logging(log_level=settings.log_level, include_metrics=settings.log_level == "DEBUG")
    try:
        report = run_command(args, settings)
        write_report(report, settings.out_dir, settings.output_format)
    except ValidationError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_BAD_ARGUMENTS
    except IonLabError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code

    for name, verdict in report.verdicts.items():
        logger.info(f"{name}: {verdict}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
