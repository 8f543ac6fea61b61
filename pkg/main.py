#!/usr/bin/env python3
"""bvkit - Main Entry Point

Command-line front end for the bounded-variation toolkit: variation and
minimal-modulus computations on piecewise-linear input, the Hoelder
counterexample generator and the prescribed-modulus construction. Results
are printed or written as CSV/JSON for external plotting.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from bvkit.analysis.construction import build
from bvkit.analysis.counterexample import (
    DEFAULT_GAMMAS,
    CounterexampleSpec,
    build_counterexample,
    counterexample_report,
)
from bvkit.analysis.modulus import is_modulus_for, minimal_modulus_values
from bvkit.analysis.variation import total_variation, variation_function
from bvkit.config.settings import Settings
from bvkit.errors import ArgumentError, BVKitError
from bvkit.models.modulus_spec import ModulusSpec
from bvkit.models.piecewise import PiecewiseLinear
from bvkit.utils.artifact_writer import ArtifactWriter
from bvkit.utils.formatters import dumps_json, format_float, format_points_csv

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2


def parse_gammas(text: str) -> List[float]:
    """Parse a comma-separated list of exponents.

    Raises:
        ArgumentError: If an entry is not a number
    """
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentError(f"Invalid --gammas list {text!r}: {e}")


def load_modulus(text: str, flag: str) -> ModulusSpec:
    """Read a modulus from inline JSON or from a JSON file path."""
    source = text.strip()
    if not source.startswith("{"):
        path = Path(source)
        if not path.exists():
            raise ArgumentError(f"{flag}: neither inline JSON nor an existing file: {text!r}")
        source = path.read_text()
    return ModulusSpec.from_json(source)


def create_parser() -> argparse.ArgumentParser:
    """Create command-line argument parser.

    Returns:
        Configured ArgumentParser instance
    """
    parser = argparse.ArgumentParser(
        description="Bounded variation, moduli of continuity and their constructions",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s variation --input f.csv --at 0.5
  %(prog)s modulus --input f.csv --grid-n 256 --out mod/
  %(prog)s counterexample --alpha 0.5 --terms 200 --out ce/
  %(prog)s construct --omega '{"kind":"power","L":1,"alpha":0.5}' \\
      --omega-prime '{"kind":"power","L":1,"alpha":0.5}' --sup-norm 1 --out run/
  %(prog)s verify --omega '{"kind":"power","L":1,"alpha":0.5}' --input run/f.csv
        """
    )

    parser.add_argument(
        "command",
        choices=["variation", "modulus", "counterexample", "construct", "verify"],
        help="Computation to run"
    )

    # Inputs
    parser.add_argument(
        "--input",
        type=str,
        help="Piecewise-linear function as .csv (x,y) or .json"
    )

    parser.add_argument(
        "--omega",
        type=str,
        help="Modulus of continuity as JSON or a path to a JSON file"
    )

    parser.add_argument(
        "--omega-prime",
        type=str,
        help="Modulus shaping the variation function (construct)"
    )

    parser.add_argument(
        "--sup-norm",
        type=float,
        help="Upper bound of omega-prime on [0, 1] (construct)"
    )

    parser.add_argument(
        "--at",
        type=float,
        help="Right end of the variation interval (variation; default: domain end)"
    )

    # Counterexample parameters
    parser.add_argument(
        "--alpha",
        type=float,
        help="Hoelder exponent in (0, 1) (counterexample)"
    )

    parser.add_argument(
        "--beta",
        type=float,
        help="Node decay exponent in (0, 1/alpha - 1] (default: 1/alpha - 1)"
    )

    parser.add_argument(
        "--terms",
        type=int,
        default=100,
        help="Number of peaks N kept (default: 100)"
    )

    parser.add_argument(
        "--gammas",
        type=str,
        help="Comma-separated exponents for blowup witnesses (default: 0.25,0.5,0.75,0.9)"
    )

    parser.add_argument(
        "--blowup-threshold",
        type=float,
        default=3.0,
        help="Ratio the blowup witness must reach (default: 3.0)"
    )

    # Tolerances
    parser.add_argument(
        "--grid-n",
        type=int,
        help="Grid density for sup approximations"
    )

    parser.add_argument(
        "--stop-x",
        type=float,
        help="Anchor truncation threshold"
    )

    parser.add_argument(
        "--eq-tol",
        type=float,
        help="Absolute comparison tolerance"
    )

    # Output options
    parser.add_argument(
        "--out",
        type=str,
        help="Output directory (default from configuration: bvkit_output)"
    )

    parser.add_argument(
        "--format",
        choices=["csv", "json"],
        help="Format for piecewise-linear outputs"
    )

    # Configuration
    parser.add_argument(
        "--config",
        type=str,
        help="Path to JSON configuration file"
    )

    parser.add_argument(
        "--save-config",
        type=str,
        help="Save current configuration to specified file"
    )

    parser.add_argument(
        "--progress",
        action="store_true",
        help="Show a progress bar during construction"
    )

    parser.add_argument(
        "--debug",
        action="store_true",
        help="Enable debug logging"
    )

    return parser


def apply_overrides(settings: Settings, args: argparse.Namespace):
    """Override settings from command line."""
    if args.grid_n is not None:
        settings.tolerance.grid_n = args.grid_n
    if args.stop_x is not None:
        settings.tolerance.stop_x = args.stop_x
    if args.eq_tol is not None:
        settings.tolerance.eq_tol = args.eq_tol
    if args.out:
        settings.output.output_dir = args.out
    if args.format:
        settings.output.function_format = args.format
    if args.progress:
        settings.output.show_progress = True


def _require(args: argparse.Namespace, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise ArgumentError(f"--{name.replace('_', '-')} is required for {args.command}")
    return value


def _writer(settings: Settings) -> ArtifactWriter:
    return ArtifactWriter(settings.output.output_dir, settings.output.function_format)


def run_variation(args: argparse.Namespace, settings: Settings) -> int:
    """Print var(f; a, at); with --out also write the variation function."""
    f = PiecewiseLinear.load(_require(args, "input"))
    value = total_variation(f, None, args.at, settings.tolerance.eq_tol)
    print(format_float(value))

    if args.out:
        _writer(settings).write_function("varfn", variation_function(f).profile)
    return EXIT_OK


def run_modulus(args: argparse.Namespace, settings: Settings) -> int:
    """Minimal modulus of f on grid_n + 1 uniform offsets."""
    f = PiecewiseLinear.load(_require(args, "input"))
    offsets = [f.length * k / settings.tolerance.grid_n for k in range(settings.tolerance.grid_n + 1)]
    values = minimal_modulus_values(f, offsets)
    rows = list(zip(offsets, values.tolist()))

    if args.out:
        table = {"kind": "tabulated", "table": [[h, w] for h, w in rows]}
        _writer(settings).write_json("modulus.json", table)
    else:
        sys.stdout.write(format_points_csv(rows, header=("h", "omega")))
    return EXIT_OK


def run_counterexample(args: argparse.Namespace, settings: Settings) -> int:
    """Write the counterexample, its variation function and a JSON report."""
    alpha = _require(args, "alpha")
    spec = CounterexampleSpec(alpha=alpha, beta=args.beta, n_terms=args.terms)
    gammas = parse_gammas(args.gammas) if args.gammas else list(DEFAULT_GAMMAS)

    logger.info("=" * 60)
    logger.info(f"Building counterexample: alpha={spec.alpha}, beta={spec.beta}, N={spec.n_terms}")
    logger.info("=" * 60)

    ce = build_counterexample(spec)
    report = counterexample_report(ce, gammas, args.blowup_threshold)

    writer = _writer(settings)
    writer.write_function("f", ce.f)
    writer.write_function("varfn", variation_function(ce.f).profile)
    writer.write_json("report.json", report)

    logger.info(f"✅ Counterexample written to {writer.out_dir}")
    return EXIT_OK


def run_construct(args: argparse.Namespace, settings: Settings) -> int:
    """Build f for (omega, omega-prime); exit 1 if a verifier fails."""
    w = load_modulus(_require(args, "omega"), "--omega")
    w_prime = load_modulus(_require(args, "omega_prime"), "--omega-prime")

    logger.info("=" * 60)
    logger.info("Constructing function with prescribed modulus and variation...")
    logger.info("=" * 60)

    result = build(w, w_prime, args.sup_norm, settings.tolerance, progress=settings.output.show_progress)
    diagnostics = result.diagnostics.to_dict()

    writer = _writer(settings)
    writer.write_json("anchors.json", result.to_dict())
    writer.write_function("f", result.f)
    writer.write_function("V", result.V.table)
    writer.write_json("diagnostics.json", diagnostics)

    if not result.diagnostics.ok:
        writer.write_json("failure.json", {"command": "construct", "diagnostics": diagnostics})
        logger.error("❌ Construction failed verification, see failure.json")
        return EXIT_VERIFICATION_FAILED

    logger.info("=" * 60)
    logger.info(f"✅ Construction verified: {len(result.anchors.midpoints)} anchors "
                f"({result.anchors.terminated.value})")
    logger.info(f"   Truncation variation error: {result.diagnostics.truncation_var_error!r}")
    logger.info("=" * 60)
    return EXIT_OK


def run_verify(args: argparse.Namespace, settings: Settings) -> int:
    """Check that --omega is a modulus of continuity for --input."""
    w = load_modulus(_require(args, "omega"), "--omega")
    f = PiecewiseLinear.load(_require(args, "input"))

    check = is_modulus_for(w, f, settings.tolerance.grid_n, settings.tolerance.eq_tol)
    report = {"command": "verify", **check.to_dict()}
    sys.stdout.write(dumps_json(report))

    if not check.ok:
        if args.out:
            _writer(settings).write_json("failure.json", report)
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


COMMANDS = {
    "variation": run_variation,
    "modulus": run_modulus,
    "counterexample": run_counterexample,
    "construct": run_construct,
    "verify": run_verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command.

    Args:
        argv: Arguments without the program name (default: sys.argv[1:])

    Returns:
        Exit code (0 success, 1 verification failure, 2 usage error)
    """
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    # Set logging level
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        # Load configuration
        settings = Settings(config_file=args.config)
        apply_overrides(settings, args)

        errors = settings.validate()
        if errors:
            for error in errors:
                logger.error(f"Invalid configuration: {error}")
            return EXIT_USAGE

        # Save configuration if requested
        if args.save_config:
            settings.save_to_file(args.save_config)
            logger.info(f"Configuration saved to {args.save_config}")

        return COMMANDS[args.command](args, settings)

    except (BVKitError, ValueError, FileNotFoundError) as e:
        logger.error(f"{args.command}: {e}", exc_info=args.debug)
        return EXIT_USAGE


def main() -> int:
    """Main entry point for bvkit.

    Returns:
        Exit code (0 for success, non-zero for error)
    """
    return run()


if __name__ == "__main__":
    sys.exit(main())
