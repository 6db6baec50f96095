"""Compile a CNN into a direct-hardware-mapped VHDL design, or inspect it."""

import argparse
import json
import logging
import sys
from pathlib import Path

from src.config import DEFAULT_BITS, DEFAULT_FMAX_HZ, DEFAULT_OUTPUT_DIR, DEFAULT_SEED
from src.errors import CnnDhmError
from src.logger import setup_logger
from src.pipeline import (
    RunConfig,
    parse_frac,
    run_compile,
    run_estimate,
    run_graph,
    run_simulate,
    run_stats,
)

logger = setup_logger()

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INTERNAL = 2

HANDLERS = {
    "compile": run_compile,
    "simulate": run_simulate,
    "stats": run_stats,
    "estimate": run_estimate,
    "graph": run_graph,
}


class UsageError(CnnDhmError):
    pass


class CliParser(argparse.ArgumentParser):
    """Reports usage errors as exceptions so they map to exit code 1."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().strip()}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("topology", help="Network topology file (.prototxt subset)")
    common.add_argument("weights", help="Weights container (.hdw)")
    common.add_argument(
        "-b", "--bits",
        type=int,
        default=DEFAULT_BITS,
        help=f"Fixed-point word size for weights and data, 2..32 (default: {DEFAULT_BITS})",
    )
    common.add_argument(
        "--frac",
        action="append",
        metavar="LAYER=W:D",
        help="Override fractional bits of a layer's weights (W) and output data (D); "
             "either may be empty; use 'input' for the input image (can be repeated)",
    )
    common.add_argument(
        "--no-nef",
        action="store_true",
        help="Give every neuron its own neighborhood extractors instead of sharing them",
    )
    common.add_argument(
        "--no-specialize",
        action="store_true",
        help="Keep every constant multiplier generic (no shift/wire/zero rewriting)",
    )
    common.add_argument(
        "--calibrate",
        metavar="IMAGE",
        help="Choose data formats from a float forward pass over this image (.pgm, or .raw with its .json header)",
    )
    common.add_argument("--json", action="store_true", help="Print machine-readable JSON on stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    parser = CliParser(
        description="CNN to FPGA compiler using direct hardware mapping",
    )
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    compile_cmd = commands.add_parser("compile", parents=[common], help="Emit the VHDL project")
    compile_cmd.add_argument(
        "-o", "--output",
        default=DEFAULT_OUTPUT_DIR,
        help=f"Output directory (default: {DEFAULT_OUTPUT_DIR})",
    )
    compile_cmd.add_argument(
        "--dry-run",
        action="store_true",
        help="Print the manifest without writing any file",
    )
    compile_cmd.add_argument(
        "--with-library",
        action="store_true",
        help="Copy the leaf VHDL entity library into OUTPUT/lib",
    )

    simulate_cmd = commands.add_parser(
        "simulate", parents=[common], help="Simulate the actor graph against the golden model",
    )
    simulate_cmd.add_argument("--image", help="Input image (.pgm, or .raw with its .json header)")
    simulate_cmd.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"Seed of the random image used when --image is absent (default: {DEFAULT_SEED})",
    )
    simulate_cmd.add_argument("--dump", metavar="DIR", help="Write every layer's feature maps as raw files")
    simulate_cmd.add_argument(
        "--golden-only",
        action="store_true",
        help="Only evaluate the golden model (networks with fully connected layers)",
    )

    commands.add_parser("stats", parents=[common], help="Multiplier class statistics of the kernels")

    estimate_cmd = commands.add_parser("estimate", parents=[common], help="Resource and throughput estimate")
    estimate_cmd.add_argument(
        "--fmax",
        type=float,
        default=DEFAULT_FMAX_HZ,
        help="Clock frequency in Hz for the throughput column (default: 0, unknown)",
    )
    estimate_cmd.add_argument(
        "--compare",
        action="store_true",
        help="Also estimate the unspecialized graph and report the reduction",
    )

    graph_cmd = commands.add_parser("graph", parents=[common], help="Dump the actor graph as DOT")
    graph_cmd.add_argument("-o", "--output", help="DOT file to write (default: stdout)")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    config = RunConfig(
        command=command,
        topology=Path(args.topology),
        weights=Path(args.weights),
        bits=args.bits,
        frac=parse_frac(args.frac),
        nef=not args.no_nef,
        specialize=not args.no_specialize,
        json_output=args.json,
        calibrate=Path(args.calibrate) if args.calibrate else None,
    )
    if command == "compile":
        config.output_dir = Path(args.output)
        config.dry_run = args.dry_run
        config.include_library = args.with_library
    elif command == "simulate":
        config.image = Path(args.image) if args.image else None
        config.seed = args.seed
        config.dump_dir = Path(args.dump) if args.dump else None
        config.golden_only = args.golden_only
    elif command == "estimate":
        config.fmax_hz = args.fmax
        config.compare_unspecialized = args.compare
    elif command == "graph":
        config.graph_output = Path(args.output) if args.output else None
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logger.setLevel(logging.DEBUG)
        config = make_config(args)
        result = HANDLERS[config.command](config)
    except CnnDhmError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as e:
        logger.exception(f"internal error: {e}")
        return EXIT_INTERNAL

    if config.json_output:
        print(json.dumps(result.data, indent=2, sort_keys=True))
    else:
        print(result.text)
    return EXIT_OK if result.ok else EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
