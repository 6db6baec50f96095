"""Stage orchestration shared by every CLI command."""

from .runner import (
    COMMANDS,
    CommandResult,
    RunConfig,
    build_graph,
    load_model,
    parse_frac,
    quantize,
    run_compile,
    run_estimate,
    run_graph,
    run_simulate,
    run_stats,
)

__all__ = [
    "COMMANDS",
    "CommandResult",
    "RunConfig",
    "build_graph",
    "load_model",
    "parse_frac",
    "quantize",
    "run_compile",
    "run_estimate",
    "run_graph",
    "run_simulate",
    "run_stats",
]
