"""Integer activation functions shared by the golden model and the simulator."""

import math
from functools import lru_cache

from src.config import MAX_LUT_BITS
from src.model.base import ActivationFn
from .fixed_point import FixedPointFormat, QuantizationError, dequantize, quantize_value


def tanh_raw(raw: int, fmt: FixedPointFormat) -> int:
    return quantize_value(math.tanh(dequantize(raw, fmt)), fmt)


@lru_cache(maxsize=64)
def tanh_lut(fmt: FixedPointFormat) -> tuple[int, ...]:
    """tanh over every raw value of fmt, indexed by raw - fmt.min_raw."""
    if fmt.total_bits > MAX_LUT_BITS:
        raise QuantizationError(
            f"a tanh table for {fmt.total_bits}-bit data would need 2^{fmt.total_bits} entries "
            f"(limit {MAX_LUT_BITS} bits)"
        )
    return tuple(tanh_raw(raw, fmt) for raw in range(fmt.min_raw, fmt.max_raw + 1))


def activate(fn: ActivationFn | None, raw: int, fmt: FixedPointFormat) -> int:
    """Apply an activation to a raw value already expressed in fmt.

    ``None`` is the identity. Wide formats evaluate tanh directly, which
    gives the same value the table would hold.
    """
    if fn is None:
        return raw
    if fn is ActivationFn.RELU:
        return max(0, raw)
    if fn is ActivationFn.TANH:
        if fmt.total_bits > MAX_LUT_BITS:
            return tanh_raw(raw, fmt)
        return tanh_lut(fmt)[raw - fmt.min_raw]
    raise ValueError(f"unknown activation {fn!r}")
