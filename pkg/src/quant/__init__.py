"""Fixed-point quantization of weights, biases and pixel data."""

from .activation import activate, tanh_lut
from .fixed_point import (
    FixedPointFormat,
    QuantizationError,
    accumulator_bits,
    choose_format,
    count_saturations,
    dequantize,
    divide_round,
    quantize_array,
    quantize_value,
    rescale,
    round_half_away,
    saturate,
    shift_round,
)
from .quantizer import INPUT_KEY, LayerFormats, QuantizedModel, quantize_model

__all__ = [
    "FixedPointFormat",
    "INPUT_KEY",
    "LayerFormats",
    "QuantizationError",
    "QuantizedModel",
    "accumulator_bits",
    "activate",
    "choose_format",
    "count_saturations",
    "dequantize",
    "divide_round",
    "quantize_array",
    "quantize_model",
    "quantize_value",
    "rescale",
    "round_half_away",
    "saturate",
    "shift_round",
    "tanh_lut",
]
