"""Bit-exact stream simulation and the fixed-point golden model."""

from .base import DeadlockError, SimulationError
from .compare import DiffReport, compare
from .golden import golden_inference
from .line_buffer import LineBuffer, warmup_tokens
from .runtime import ActorRuntime, make_runtime
from .simulator import (
    ReverseScheduler,
    RoundRobinScheduler,
    Scheduler,
    SimulationResult,
    expected_firings,
    simulate,
)
from .streams import (
    FeatureMaps,
    PixelStream,
    image_from_real,
    load_image,
    load_real_image,
    random_image,
    read_pgm,
    read_raw,
    write_pgm,
    write_raw,
)

__all__ = [
    "ActorRuntime",
    "DeadlockError",
    "DiffReport",
    "FeatureMaps",
    "LineBuffer",
    "PixelStream",
    "ReverseScheduler",
    "RoundRobinScheduler",
    "Scheduler",
    "SimulationError",
    "SimulationResult",
    "compare",
    "expected_firings",
    "golden_inference",
    "image_from_real",
    "load_image",
    "load_real_image",
    "make_runtime",
    "random_image",
    "read_pgm",
    "read_raw",
    "simulate",
    "warmup_tokens",
    "write_pgm",
    "write_raw",
]
