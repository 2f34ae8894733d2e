"""
Command-line front end.

Subcommands:
    run            Run an experiment config, writing metrics.jsonl, resolved_config.json and results.db
    verify-lemmas  Monte-Carlo checks of the vote, rounding and QSGD properties
    partition      Split an IDX dataset into per-client IDX pairs plus manifest.csv
    opcount        Float vs. binary forward-pass operation and energy counts

Exit codes: 0 success, 1 verification failure, 2 usage/config error, 3 IO/format error.
Failures print one line ``<area>: <reason>`` on standard error.

Run with: python -m src.main run config/fedvote_synthetic.toml --output runs/blobs
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from src.data.idx_format import load_idx
from src.data.partition import PartitionKind, PartitionSpec, export_partition
from src.errors import ConfigurationError, IdxFormatError, InvalidArgumentError, PayloadFormatError
from src.federation.config import load_config
from src.federation.rng import StreamPurpose, stream
from src.federation.simulator import model_op_counts, run_to_directory
from src.verification.lemmas import DEFAULT_TRIALS, format_report, run_lemma_suites

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class CommandError(Exception):
    """Carries an exit code and the one-line reason printed on standard error."""

    def __init__(self, exit_code: int, area: str, reason: str):
        self.exit_code = exit_code
        self.area = area
        self.reason = reason
        super().__init__(f"{area}: {reason}")


def _load(config_path: str, args: argparse.Namespace):
    try:
        config = load_config(config_path)
    except FileNotFoundError:
        raise CommandError(EXIT_USAGE, "config", f"not found: {config_path}")
    except ConfigurationError as e:
        raise CommandError(EXIT_USAGE, "config", "; ".join(e.violations))
    try:
        return config.with_overrides(seed=args.seed, threads=args.threads, output_dir=args.output).validate()
    except ConfigurationError as e:
        raise CommandError(EXIT_USAGE, "config", "; ".join(e.violations))


# =============================================================================
# Commands
# =============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    config = _load(args.config, args)
    try:
        series = run_to_directory(config)
    except ConfigurationError as e:
        raise CommandError(EXIT_USAGE, "config", "; ".join(e.violations))
    except InvalidArgumentError as e:
        raise CommandError(EXIT_USAGE, "config", str(e))
    except (IdxFormatError, PayloadFormatError) as e:
        raise CommandError(EXIT_IO, "format", str(e))
    except OSError as e:
        raise CommandError(EXIT_IO, "io", str(e))
    if series:
        last = series[-1]
        quantized = ""
        if last.test_accuracy_quantized is not None:
            quantized = f" (quantized {last.test_accuracy_quantized:.4f})"
        print(f"{config.name}: {len(series)} rounds, test accuracy {last.test_accuracy:.4f}"
              f"{quantized}, output {config.output_dir}")
    else:
        print(f"{config.name}: 0 rounds, output {config.output_dir}")
    return EXIT_OK


def cmd_verify_lemmas(args: argparse.Namespace) -> int:
    try:
        reports = run_lemma_suites(trials=args.trials, seed=args.seed or 0, scaling=args.scaling)
    except InvalidArgumentError as e:
        raise CommandError(EXIT_USAGE, "usage", str(e))
    print(format_report(reports, verbose=args.verbose))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFICATION_FAILED


def cmd_partition(args: argparse.Namespace) -> int:
    try:
        kind = PartitionKind(args.kind)
        spec = PartitionSpec(kind, args.clients, args.alpha)
    except (ValueError, InvalidArgumentError) as e:
        raise CommandError(EXIT_USAGE, "usage", str(e))
    out_dir = Path(args.output or "partition")
    try:
        dataset = load_idx(args.images, args.labels, args.class_count)
        manifest = export_partition(dataset, spec, stream(args.seed or 0, StreamPurpose.PARTITION), out_dir)
    except FileNotFoundError as e:
        raise CommandError(EXIT_IO, "io", f"not found: {e.filename or e}")
    except IdxFormatError as e:
        raise CommandError(EXIT_IO, "format", str(e))
    except InvalidArgumentError as e:
        raise CommandError(EXIT_USAGE, "usage", str(e))
    except OSError as e:
        raise CommandError(EXIT_IO, "io", str(e))
    print(manifest.to_string())
    return EXIT_OK


def cmd_opcount(args: argparse.Namespace) -> int:
    config = _load(args.config, args)
    try:
        table = model_op_counts(config, batch_size=args.batch_size)
    except ConfigurationError as e:
        raise CommandError(EXIT_USAGE, "config", "; ".join(e.violations))
    except InvalidArgumentError as e:
        raise CommandError(EXIT_USAGE, "usage", str(e))
    except IdxFormatError as e:
        raise CommandError(EXIT_IO, "format", str(e))
    except OSError as e:
        raise CommandError(EXIT_IO, "io", str(e))
    print(table.to_string())
    return EXIT_OK


# =============================================================================
# Argument parsing
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedvote", description="Federated learning by weighted voting simulator")
    parser.add_argument("--seed", type=int, default=None, help="Master seed (overrides the config)")
    parser.add_argument("--threads", type=int, default=None, help="Local-training worker threads")
    parser.add_argument("--output", default=None, help="Output directory (overrides the config)")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Logging level")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="Run an experiment")
    run_parser.add_argument("config", help="Experiment TOML (or resolved JSON) file")
    run_parser.set_defaults(handler=cmd_run)

    verify = sub.add_parser("verify-lemmas", help="Monte-Carlo verification suites")
    verify.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Trials per check (>= 10000)")
    verify.add_argument("--scaling", action="store_true", help="Also run the dimension-scaling suite")
    verify.add_argument("--verbose", action="store_true", help="Print every check, not just failures")
    verify.set_defaults(handler=cmd_verify_lemmas)

    part = sub.add_parser("partition", help="Write per-client IDX shards and a manifest")
    part.add_argument("images", help="IDX image file")
    part.add_argument("labels", help="IDX label file")
    part.add_argument("--kind", default=PartitionKind.IID.value, choices=[k.value for k in PartitionKind])
    part.add_argument("--clients", type=int, required=True, help="Number of clients")
    part.add_argument("--alpha", type=float, default=0.5, help="Dirichlet concentration")
    part.add_argument("--class-count", type=int, default=None, help="Number of classes (default: max label + 1)")
    part.set_defaults(handler=cmd_partition)

    opcount = sub.add_parser("opcount", help="Forward-pass operation and energy counts")
    opcount.add_argument("config", help="Experiment TOML (or resolved JSON) file")
    opcount.add_argument("--batch-size", type=int, default=1, help="Samples per forward pass")
    opcount.set_defaults(handler=cmd_opcount)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if args.threads is not None and args.threads < 1:
        print("usage: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args)
    except CommandError as e:
        print(f"{e.area}: {e.reason}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed")
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_VERIFICATION_FAILED


if __name__ == "__main__":
    sys.exit(main())
