"""Whole-model quantization: per-layer weight and data formats."""

from dataclasses import dataclass, field

import numpy as np

from src.config import MAX_BITS, MIN_BITS
from src.logger import setup_logger
from src.model.base import Activation, CnnModel, Conv, FullyConnected, Pool
from src.model.reference import float_inference
from src.model.validate import Severity, layer_shapes, validate_model
from .fixed_point import (
    FixedPointFormat,
    QuantizationError,
    accumulator_bits,
    choose_format,
    count_saturations,
    dequantize,
    quantize_array,
)

logger = setup_logger()

INPUT_KEY = "input"


@dataclass(frozen=True)
class LayerFormats:
    """Formats of one layer.

    ``weights`` is None for pooling and activation layers, whose output
    format is always their input format.
    """

    input: FixedPointFormat
    output: FixedPointFormat
    weights: FixedPointFormat | None = None
    accumulator_bits: int | None = None

    @property
    def acc_frac(self) -> int:
        if self.weights is None:
            return self.input.frac_bits
        return self.weights.frac_bits + self.input.frac_bits

    def to_dict(self) -> dict:
        data = {"input": self.input.to_dict(), "output": self.output.to_dict()}
        if self.weights is not None:
            data["weights"] = self.weights.to_dict()
            data["accumulator_bits"] = self.accumulator_bits
        return data


@dataclass(frozen=True, eq=False)
class QuantizedModel:
    """A model whose parameters are raw fixed-point integers.

    ``model`` keeps shapes only; the float tensors are dropped. Biases are
    stored in the weight format; ``bias_in_accumulator`` lifts them into the
    accumulator scale.
    """

    model: CnnModel
    total_bits: int
    input_format: FixedPointFormat
    formats: dict[str, LayerFormats]
    int_weights: dict[str, np.ndarray] = field(default_factory=dict)
    int_biases: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.model.name

    @property
    def output_format(self) -> FixedPointFormat:
        return self.formats[self.model.layers[-1].name].output

    def bias_in_accumulator(self, layer: str) -> np.ndarray:
        spec = self.model.layer(layer)
        biases = self.int_biases.get(layer)
        if biases is None:
            return np.zeros(spec.kind.num_output, dtype=np.int64)
        return biases << self.formats[layer].input.frac_bits

    def dequantized_weights(self, layer: str) -> np.ndarray:
        return dequantize(self.int_weights[layer], self.formats[layer].weights)

    def dequantized_biases(self, layer: str) -> np.ndarray | None:
        biases = self.int_biases.get(layer)
        return None if biases is None else dequantize(biases, self.formats[layer].weights)


def _override(frac_override: dict | None, key: str, which: str) -> int | None:
    if not frac_override or key not in frac_override:
        return None
    return frac_override[key].get(which)


def _data_format(total_bits, key, frac_override, calibration) -> FixedPointFormat:
    frac = _override(frac_override, key, "data")
    if frac is not None:
        return FixedPointFormat(total_bits, frac)
    if calibration is not None:
        return choose_format(calibration, total_bits)
    return FixedPointFormat(total_bits, total_bits - 1)


def quantize_model(
    model: CnnModel,
    total_bits: int,
    frac_override: dict[str, dict[str, int]] | None = None,
    calibration_image: np.ndarray | None = None,
) -> QuantizedModel:
    """Quantize every weight and bias and fix every data format.

    Args:
        model: Fully weighted, valid model
        total_bits: Word size for weights and data
        frac_override: Optional map from layer name (or ``"input"``) to
            ``{"weights": f, "data": f}``; either key may be omitted
        calibration_image: Optional real-valued (C, H, W) image; when given,
            data formats are chosen from a float forward pass instead of
            defaulting to total_bits - 1 fractional bits

    Returns:
        QuantizedModel with formats recorded per layer

    Raises:
        QuantizationError: bad width, missing weights, an override on a
            layer without its own format, or values that cannot be
            represented
    """
    if not MIN_BITS <= total_bits <= MAX_BITS:
        raise QuantizationError(f"bits must be in [{MIN_BITS}, {MAX_BITS}], got {total_bits}")
    problems = [d for d in validate_model(model) if d.severity is Severity.ERROR]
    if problems:
        raise QuantizationError(f"model is not valid: {problems[0]}")
    if not model.has_weights:
        raise QuantizationError("model has no weights; load a weights container first")

    names = {spec.name for spec in model.layers} | {INPUT_KEY}
    for key in frac_override or {}:
        if key not in names:
            raise QuantizationError(f"frac override names unknown layer '{key}'")

    calibration = None
    if calibration_image is not None:
        calibration = float_inference(model, calibration_image)

    input_format = _data_format(
        total_bits, INPUT_KEY, frac_override,
        None if calibration_image is None else np.asarray(calibration_image),
    )
    shapes = layer_shapes(model)

    formats: dict[str, LayerFormats] = {}
    int_weights: dict[str, np.ndarray] = {}
    int_biases: dict[str, np.ndarray] = {}
    current = input_format
    for index, spec in enumerate(model.layers):
        kind = spec.kind
        if isinstance(kind, (Pool, Activation)):
            if _override(frac_override, spec.name, "data") is not None \
                    or _override(frac_override, spec.name, "weights") is not None:
                raise QuantizationError(
                    f"layer '{spec.name}' takes the format of its input; override the producing layer instead"
                )
            formats[spec.name] = LayerFormats(input=current, output=current)
            continue

        params = spec.weights.reshape(-1)
        if spec.biases is not None and spec.has_bias:
            params = np.concatenate([params, spec.biases.reshape(-1)])
        weight_frac = _override(frac_override, spec.name, "weights")
        weight_format = (
            FixedPointFormat(total_bits, weight_frac) if weight_frac is not None
            else choose_format(params, total_bits)
        )
        saturated = count_saturations(params, weight_format)
        if saturated:
            logger.warning(f"{spec.name}: {saturated} parameter(s) saturate at {weight_format}")

        output = _data_format(
            total_bits, spec.name, frac_override,
            None if calibration is None else calibration[index],
        )
        if isinstance(kind, Conv):
            fan_in = kind.channels * kind.kernel * kind.kernel
        else:
            fan_in = int(np.prod(shapes[spec.name][0]))
        formats[spec.name] = LayerFormats(
            input=current,
            output=output,
            weights=weight_format,
            accumulator_bits=accumulator_bits(total_bits, fan_in),
        )
        int_weights[spec.name] = quantize_array(spec.weights, weight_format)
        if spec.has_bias:
            int_biases[spec.name] = quantize_array(spec.biases, weight_format)
        logger.debug(
            f"{spec.name}: weights {weight_format}, data {current} -> {output}, "
            f"accumulator {formats[spec.name].accumulator_bits} bits"
        )
        current = output

    return QuantizedModel(
        model=model.without_weights(),
        total_bits=total_bits,
        input_format=input_format,
        formats=formats,
        int_weights=int_weights,
        int_biases=int_biases,
    )
