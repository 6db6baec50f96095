"""Shape propagation and model validation."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .base import (
    Activation,
    CnnModel,
    Conv,
    FullyConnected,
    LayerKind,
    ModelError,
    Pool,
)

Shape = tuple[int, int, int]


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    layer: str
    message: str

    def __str__(self) -> str:
        where = f"[{self.layer}] " if self.layer else ""
        return f"{self.severity.value}: {where}{self.message}"


def output_shape(kind: LayerKind, shape: Shape) -> Shape:
    """Shape produced by one layer from its (C, H, W) input.

    Windows are valid-only: a conv or pool layer emits one value per fully
    overlapping window of the (padded) input.
    """
    channels, height, width = shape
    if isinstance(kind, Conv):
        out_h = (height + 2 * kind.pad - kind.kernel) // kind.stride + 1
        out_w = (width + 2 * kind.pad - kind.kernel) // kind.stride + 1
        return kind.num_output, out_h, out_w
    if isinstance(kind, Pool):
        out_h = (height - kind.kernel) // kind.stride + 1
        out_w = (width - kind.kernel) // kind.stride + 1
        return channels, out_h, out_w
    if isinstance(kind, Activation):
        return shape
    if isinstance(kind, FullyConnected):
        return kind.num_output, 1, 1
    raise ModelError(f"unsupported layer kind: {type(kind).__name__}")


def propagate_shapes(model: CnnModel) -> list[tuple[Shape, Shape]]:
    """(input, output) shape of every layer; dimensions are not checked."""
    shapes = []
    current = tuple(model.input_shape)
    for spec in model.layers:
        out = output_shape(spec.kind, current)
        shapes.append((current, out))
        current = out
    return shapes


def layer_shapes(model: CnnModel) -> dict[str, tuple[Shape, Shape]]:
    """Like propagate_shapes, keyed by layer name; raises on any underflow."""
    result = {}
    for spec, (shape_in, shape_out) in zip(model.layers, propagate_shapes(model)):
        if min(shape_out) < 1:
            raise ModelError(
                f"layer '{spec.name}': spatial underflow, {shape_in} -> {shape_out}"
            )
        result[spec.name] = (shape_in, shape_out)
    return result


def expected_weight_shape(kind: LayerKind, shape_in: Shape) -> tuple[int, ...] | None:
    if isinstance(kind, Conv):
        return kind.num_output, kind.channels, kind.kernel, kind.kernel
    if isinstance(kind, FullyConnected):
        channels, height, width = shape_in
        return kind.num_output, channels * height * width
    return None


def _check_kind(name: str, kind: LayerKind) -> list[str]:
    problems = []
    positive = {}
    if isinstance(kind, Conv):
        positive = {"num_output": kind.num_output, "channels": kind.channels,
                    "kernel_size": kind.kernel, "stride": kind.stride}
        if kind.pad < 0:
            problems.append(f"pad must be >= 0, got {kind.pad}")
    elif isinstance(kind, Pool):
        positive = {"kernel_size": kind.kernel, "stride": kind.stride}
    elif isinstance(kind, FullyConnected):
        positive = {"num_output": kind.num_output, "channels": kind.channels}
    for key, value in positive.items():
        if value < 1:
            problems.append(f"{key} must be >= 1, got {value}")
    return problems


def validate_model(model: CnnModel) -> list[Diagnostic]:
    """Check every model and layer invariant; an empty list means valid."""
    diagnostics: list[Diagnostic] = []

    def error(layer: str, message: str) -> None:
        diagnostics.append(Diagnostic(Severity.ERROR, layer, message))

    if len(model.input_shape) != 3 or min(model.input_shape) < 1:
        error("", f"input shape must be three positive dimensions, got {model.input_shape}")
        return diagnostics
    if not model.layers:
        error("", "empty network")
        return diagnostics

    seen: set[str] = set()
    current = tuple(model.input_shape)
    for spec in model.layers:
        name = spec.name
        if not name:
            error(name, "layer name is empty")
        elif name in seen:
            error(name, "duplicate layer name")
        seen.add(name)

        kind_problems = _check_kind(name, spec.kind)
        for problem in kind_problems:
            error(name, problem)
        if kind_problems:
            return diagnostics

        if isinstance(spec.kind, (Conv, FullyConnected)) and spec.kind.channels != current[0]:
            error(
                name,
                f"channel mismatch: layer expects {spec.kind.channels} input channels, "
                f"previous layer produces {current[0]}",
            )

        out = output_shape(spec.kind, current)
        if min(out[1:]) < 1:
            error(name, f"spatial underflow: input {current[1]}x{current[2]} -> {out[1]}x{out[2]}")
            return diagnostics

        expected = expected_weight_shape(spec.kind, current)
        if spec.weights is not None and expected is not None:
            if spec.weights.size != int(np.prod(expected)):
                error(name, f"weights hold {spec.weights.size} values, expected {int(np.prod(expected))}")
            elif not np.all(np.isfinite(spec.weights)):
                error(name, "weights contain non-finite values")
        if spec.biases is not None:
            if not spec.has_bias:
                diagnostics.append(Diagnostic(Severity.WARNING, name, "biases given for a layer without bias term"))
            elif spec.biases.size != spec.kind.num_output:
                error(name, f"biases hold {spec.biases.size} values, expected {spec.kind.num_output}")
            elif not np.all(np.isfinite(spec.biases)):
                error(name, "biases contain non-finite values")
        current = out

    return diagnostics


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)
