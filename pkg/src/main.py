"""Main entry point for Wiener-Hopf factorization runs."""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path

from .commands import COMMANDS, density, factor, invert, roots, validate
from .config import load_config, setup_output_directory
from .errors import DomainError, WienerHopfError
from .output import VALID_FORMATS

RUNNERS = {
    "roots": roots.run,
    "factor": factor.run,
    "density": density.run,
    "invert": invert.run,
    "validate": validate.run,
}


def setup_logging(output_dir: str | None = None, verbose: bool = False) -> None:
    """Configure logging to console and optionally to file.

    Args:
        output_dir: If provided, also log to file in this directory
        verbose: Console level DEBUG instead of INFO
    """
    # Create formatter
    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    if output_dir is None:
        # Console handler
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)
        return

    # File handler
    log_path = Path(output_dir) / "run.log"
    file_handler = logging.FileHandler(log_path)
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)
    root_logger.setLevel(logging.DEBUG)
    root_logger.addHandler(file_handler)


def print_summary(results: dict) -> None:
    """Print run summary to console."""
    print("\n" + "=" * 60)
    print(f"{results.get('command', 'run').upper()} SUMMARY")
    print("=" * 60)

    print(f"\nRun ID: {results['run_id']}")
    print(f"Output Directory: {results['output_dir']}")

    print("\nResults:")
    for key, value in results.items():
        if key in ("command", "run_id", "output_dir", "files"):
            continue
        if isinstance(value, float):
            print(f"  {key}: {value:.10g}")
        else:
            print(f"  {key}: {value}")

    if results.get("files"):
        print("\nFiles:")
        for path in results["files"]:
            print(f"  - {path}")

    print("\n" + "=" * 60)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Wiener-Hopf factorization and supremum distributions for meromorphic Levy processes"
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--model-file",
        type=str,
        default=None,
        help="Path to YAML run config",
    )
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config key (repeatable)",
    )
    common.add_argument(
        "--out",
        type=str,
        default="outputs",
        help="Base output directory (default: outputs)",
    )
    common.add_argument(
        "--format",
        choices=VALID_FORMATS,
        default="csv",
        help="Result format (default: csv)",
    )
    common.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Worker threads for Monte Carlo blocks",
    )
    common.add_argument(
        "--overwrite",
        action="store_true",
        help="Allow writing into an existing output directory",
    )
    common.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        help="Enable verbose (debug) logging",
    )

    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=RUNNERS[name].__doc__.splitlines()[0])
        if name == "roots":
            p.add_argument("--complex-q", action="store_true", help="Continue roots along q + iu up to u_max")
        if name == "validate":
            p.add_argument("--mc", action="store_true", help="Add Monte Carlo checks (sech only)")
            p.add_argument("--inject-fault", action="store_true", help="Shift zeta_1 by 1e-3 before checking")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Main entry point.

    Exit codes: 0 success, 1 validation failed, 2 usage or config error,
    3 numerical failure, 130 interrupted.
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    # Initial logging setup (console only)
    setup_logging(verbose=args.verbose)
    logger = logging.getLogger(__name__)

    overrides = list(args.overrides)
    if getattr(args, "complex_q", False):
        overrides.append("complex_q=true")
    if getattr(args, "inject_fault", False):
        overrides.append("inject_fault=true")

    try:
        # Load config
        logger.info(f"Loading config from {args.model_file or '(overrides only)'}")
        config = load_config(args.model_file, overrides)
        logger.info(f"Config loaded: {config['run_id']} ({config['family']})")

        output_dir = setup_output_directory(config, base_path=args.out, overwrite=args.overwrite)
        setup_logging(output_dir)

        start_time = datetime.now()
        logger.info(f"Starting '{args.command}' at {start_time}")

        kwargs = {"mc": args.mc} if args.command == "validate" else {}
        results = RUNNERS[args.command](config, output_dir, args.format, args.threads, **kwargs)

        logger.info(f"'{args.command}' completed in {datetime.now() - start_time}")

        results["run_id"] = config["run_id"]
        results["output_dir"] = output_dir
        print_summary(results)

        if args.command == "validate" and not results["passed"]:
            logger.error("Validation failed")
            return 1
        return 0

    except FileNotFoundError as e:
        logger.error(f"File not found: {e}")
        return 2
    except FileExistsError as e:
        logger.error(f"Output directory already exists: {e}")
        return 2
    except DomainError as e:
        logger.error(f"Invalid input: {e}")
        return 2
    except ValueError as e:
        logger.error(f"Configuration error: {e}")
        return 2
    except WienerHopfError as e:
        logger.error(f"Numerical failure ({type(e).__name__}): {e}")
        return 3
    except KeyboardInterrupt:
        logger.warning("Run interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
