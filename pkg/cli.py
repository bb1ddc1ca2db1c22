# cli.py

"""
Command-line front end.

  outage      outage probability versus SNR for one scheme
  constraint  probability that the relay's decode constraint holds
  dmt         analytic tradeoff curves (breakpoints and sampled points)
  diversity   finite-SNR diversity from an outage CSV

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass

import pandas as pd

import app_config
import experiments
from channel import Geometry
from dmt_analytic import curve_by_name
from sim_errors import ConfigError, RelaySimError, TrialError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

SUBCOMMAND_OUTAGE = "outage"
SUBCOMMAND_CONSTRAINT = "constraint"
SUBCOMMAND_DMT = "dmt"
SUBCOMMAND_DIVERSITY = "diversity"

OUTAGE_SCHEME_CHOICES = ("direct", "successive", "dblast", "stc", "mimo22", "lower_bound")
CONSTRAINT_SCHEME_CHOICES = ("successive", "dblast", "stc")


@dataclass(frozen=True)
class Command:
    subcommand: str
    config: experiments.SimConfig | None = None
    curves: tuple[str, ...] = ()
    step: float = app_config.DEFAULT_CURVE_STEP
    input_path: str | None = None
    output: str | None = None
    verbose: bool = False
    log_file: str | None = None


# ---------------------------------------------------------------------------
# Flag value parsers
# ---------------------------------------------------------------------------

def _snr_range(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:stop:step in dB, got '{text}'")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric SNR range '{text}'")
    try:
        return experiments.snr_grid(start, stop, step)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e))


def _number(kind, minimum=None, strict=False):
    def parse(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value '{text}'")
        if kind is float and value != value:
            raise argparse.ArgumentTypeError("NaN is not allowed")
        if minimum is not None and (value <= minimum if strict else value < minimum):
            bound = ">" if strict else ">="
            raise argparse.ArgumentTypeError(f"value must be {bound} {minimum}, got {text}")
        return value
    return parse


def _seed(text: str) -> int:
    value = _number(int, 0)(text)
    if value > app_config.MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits, got {text}")
    return value


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None,
                        help="Output CSV path; '-' or omitted writes to standard output.")
    common.add_argument("--verbose", action="store_true", help="Log per-chunk progress.")
    common.add_argument("--log-file", nargs="?", const="", default=None, metavar="PATH",
                        help="Also log to PATH (default location when PATH is omitted).")
    return common


def _simulation_flags(parser: argparse.ArgumentParser, scheme_choices: tuple[str, ...]) -> None:
    parser.add_argument("--scheme", required=True, choices=scheme_choices, help="Transmission scheme.")
    parser.add_argument("--snr", required=True, type=_snr_range, metavar="A:B:S",
                        help="SNR grid in dB: start:stop:step, ascending, stop included.")
    parser.add_argument("--L", type=_number(int, 1), default=app_config.DEFAULT_L,
                        help=f"Codewords per frame (count). Default {app_config.DEFAULT_L}.")
    parser.add_argument("--trials", type=_number(int, 1), default=app_config.DEFAULT_TRIALS,
                        help=f"Channel draws per SNR point (count). Default {app_config.DEFAULT_TRIALS}.")
    parser.add_argument("--seed", type=_seed, default=app_config.DEFAULT_SEED,
                        help="Master seed, unsigned 64-bit integer.")
    parser.add_argument("--rtilde", type=_number(float, 0, strict=True), default=app_config.DEFAULT_RTILDE,
                        help=f"Source-relay distance (linear, destination at unit distance). "
                             f"Default {app_config.DEFAULT_RTILDE}.")
    parser.add_argument("--pathloss", type=_number(float, 0, strict=True), default=app_config.DEFAULT_PATHLOSS,
                        help=f"Path-loss exponent (linear). Default {app_config.DEFAULT_PATHLOSS:g}.")
    parser.add_argument("--constraint-form", choices=app_config.CONSTRAINT_FORMS,
                        default=app_config.CONSTRAINT_EXACT,
                        help="Successive-relaying decode threshold: exact or small-distance approximation.")
    parser.add_argument("--workers", type=_number(int, 0), default=1,
                        help="Parallel worker processes (count); 0 uses every core.")


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="relaysim",
        description="Outage and tradeoff simulations for a half-duplex two-antenna relay network.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    outage = sub.add_parser(SUBCOMMAND_OUTAGE, parents=[common], help="Outage probability versus SNR.")
    _simulation_flags(outage, OUTAGE_SCHEME_CHOICES)
    rate = outage.add_mutually_exclusive_group(required=True)
    rate.add_argument("--mux", type=_number(float, 0), metavar="r",
                      help="Multiplexing gain; rate is r*log2(1+g*eta) bits/slot.")
    rate.add_argument("--rate", type=_number(float, 0), metavar="R", help="Fixed rate in bits/slot.")
    outage.add_argument("--g", type=_number(float, 0, strict=True), default=app_config.DEFAULT_G,
                        help=f"Array gain for --mux (linear). Default {app_config.DEFAULT_G:g}.")
    outage.add_argument("--relay", choices=app_config.RELAY_MODES, default=app_config.RELAY_PERFECT,
                        help="perfect: relay always decodes; constrained: a violated decode "
                             "constraint counts as outage.")

    constraint = sub.add_parser(SUBCOMMAND_CONSTRAINT, parents=[common],
                                help="Probability that the relay decode constraint holds.")
    _simulation_flags(constraint, CONSTRAINT_SCHEME_CHOICES)

    dmt = sub.add_parser(SUBCOMMAND_DMT, parents=[common], help="Analytic tradeoff curves.")
    dmt.add_argument("--curve", action="append", default=None, metavar="NAME",
                     help="mimo:NTxNR, stc, upper, direct or lower_bound_transform; repeatable. "
                          "Default: mimo:2x2, stc, upper, lower_bound_transform.")
    dmt.add_argument("--step", type=_number(float, 0, strict=True), default=app_config.DEFAULT_CURVE_STEP,
                     help="Multiplexing-gain spacing of sampled points (unitless).")

    diversity = sub.add_parser(SUBCOMMAND_DIVERSITY, parents=[common],
                               help="Finite-SNR diversity from an outage CSV.")
    diversity.add_argument("--in", dest="input_path", required=True, metavar="PATH",
                           help="Outage CSV written by the outage subcommand.")
    return parser


def _config_from_args(args: argparse.Namespace) -> experiments.SimConfig:
    rate_mode = None
    if getattr(args, "mux", None) is not None:
        rate_mode = experiments.MultiplexingRate(args.mux, args.g)
    elif getattr(args, "rate", None) is not None:
        rate_mode = experiments.FixedRate(args.rate)
    return experiments.SimConfig(
        snr_db=args.snr,
        scheme=args.scheme,
        rate_mode=rate_mode,
        L=args.L,
        trials=args.trials,
        master_seed=args.seed,
        geometry=Geometry(args.rtilde, args.pathloss),
        relay_mode=getattr(args, "relay", app_config.RELAY_PERFECT),
        constraint_form=args.constraint_form,
        workers=args.workers,
    )


def parse_args(argv: list[str] | None = None) -> Command:
    """Parses and validates argv; usage problems exit with status 2."""
    parser = build_parser()
    args = parser.parse_args(argv)

    log_file = args.log_file
    if log_file == "":
        log_file = app_config.get_default_log_path()
    output = None if args.out in (None, "-") else args.out

    try:
        if args.subcommand in (SUBCOMMAND_OUTAGE, SUBCOMMAND_CONSTRAINT):
            return Command(args.subcommand, config=_config_from_args(args),
                           output=output, verbose=args.verbose, log_file=log_file)
        if args.subcommand == SUBCOMMAND_DMT:
            names = tuple(args.curve or app_config.DMT_CURVE_NAMES)
            for name in names:
                curve_by_name(name)
            return Command(args.subcommand, curves=names, step=args.step,
                           output=output, verbose=args.verbose, log_file=log_file)
        return Command(args.subcommand, input_path=args.input_path,
                       output=output, verbose=args.verbose, log_file=log_file)
    except ConfigError as e:
        parser.error(str(e))


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def dmt_frame(names: tuple[str, ...], step: float) -> pd.DataFrame:
    rows = []
    for name in names:
        curve = curve_by_name(name)
        rows.extend({"curve": curve.name, "kind": "breakpoint", "r": r, "d": d} for r, d in curve.breakpoints)
        rows.extend({"curve": curve.name, "kind": "sample", "r": r, "d": d} for r, d in curve.sample(step))
    return pd.DataFrame(rows, columns=list(app_config.DMT_CSV_COLUMNS))


def _progress_logger():
    last_decile = -1

    def report(done: int, total: int):
        nonlocal last_decile
        decile = (10 * done) // total
        if decile != last_decile:
            last_decile = decile
            logger.info("Progress: %d/%d trials.", done, total)
    return report


def execute(cmd: Command) -> int:
    try:
        if cmd.subcommand == SUBCOMMAND_OUTAGE:
            experiments.run(cmd.config, cmd.output, experiments.ESTIMATOR_OUTAGE, _progress_logger())
        elif cmd.subcommand == SUBCOMMAND_CONSTRAINT:
            experiments.run(cmd.config, cmd.output, experiments.ESTIMATOR_CONSTRAINT, _progress_logger())
        elif cmd.subcommand == SUBCOMMAND_DMT:
            experiments.write_csv(dmt_frame(cmd.curves, cmd.step), cmd.output)
        elif cmd.subcommand == SUBCOMMAND_DIVERSITY:
            curves = experiments.read_curves(cmd.input_path)
            experiments.write_csv(experiments.diversity_frame(curves), cmd.output)
        else:
            raise ConfigError(f"Unknown subcommand '{cmd.subcommand}'.")
    except TrialError as e:
        logger.error("Numerical failure at %s", e)
        print(f"relaysim: numerical failure at {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RelaySimError, OSError) as e:
        logger.error("%s failed: %s", cmd.subcommand, e)
        print(f"relaysim: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    cmd = parse_args(argv)
    app_config.configure_logging(cmd.verbose, cmd.log_file)
    return execute(cmd)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

if __name__ == "__main__":
    sys.exit(main())
