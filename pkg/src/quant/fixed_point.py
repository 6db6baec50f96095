"""Signed two's-complement fixed-point arithmetic.

All rounding is half-away-from-zero and all narrowing saturates; nothing
in the compiler ever wraps.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.config import MAX_BITS, MIN_BITS
from src.errors import CnnDhmError


class QuantizationError(CnnDhmError):
    """Raised when values cannot be represented at the requested width."""


@dataclass(frozen=True)
class FixedPointFormat:
    """Q(total_bits, frac_bits): raw integer r stands for r * 2**-frac_bits."""

    total_bits: int
    frac_bits: int

    def __post_init__(self):
        if not MIN_BITS <= self.total_bits <= MAX_BITS:
            raise QuantizationError(f"total_bits must be in [{MIN_BITS}, {MAX_BITS}], got {self.total_bits}")
        if not 0 <= self.frac_bits <= self.total_bits - 1:
            raise QuantizationError(
                f"frac_bits must be in [0, {self.total_bits - 1}], got {self.frac_bits}"
            )

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def max_raw(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def resolution(self) -> float:
        return 2.0 ** -self.frac_bits

    def contains(self, raw: int) -> bool:
        return self.min_raw <= raw <= self.max_raw

    def __str__(self) -> str:
        return f"Q{self.total_bits}.{self.frac_bits}"

    def to_dict(self) -> dict:
        return {"total_bits": self.total_bits, "frac_bits": self.frac_bits}


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def saturate(raw: int, fmt: FixedPointFormat) -> int:
    return max(fmt.min_raw, min(fmt.max_raw, raw))


def quantize_value(x: float, fmt: FixedPointFormat) -> int:
    """Round x to the nearest raw value of fmt, clamping at the range ends."""
    if not math.isfinite(x):
        raise QuantizationError(f"cannot quantize non-finite value {x}")
    return saturate(round_half_away(math.ldexp(x, fmt.frac_bits)), fmt)


def _round_array(values: np.ndarray, frac_bits: int) -> np.ndarray:
    scaled = np.ldexp(np.asarray(values, dtype=np.float64), frac_bits)
    return np.sign(scaled) * np.floor(np.abs(scaled) + 0.5)


def quantize_array(values: np.ndarray, fmt: FixedPointFormat) -> np.ndarray:
    """Vectorised quantize_value; returns int64 raw values."""
    rounded = _round_array(values, fmt.frac_bits)
    return np.clip(rounded, fmt.min_raw, fmt.max_raw).astype(np.int64)


def count_saturations(values: np.ndarray, fmt: FixedPointFormat) -> int:
    rounded = _round_array(values, fmt.frac_bits)
    return int(np.count_nonzero((rounded < fmt.min_raw) | (rounded > fmt.max_raw)))


def dequantize(raw, fmt: FixedPointFormat):
    """Real value of a raw integer or integer array."""
    if isinstance(raw, np.ndarray):
        return np.ldexp(raw.astype(np.float64), -fmt.frac_bits)
    return math.ldexp(raw, -fmt.frac_bits)


def choose_format(values: np.ndarray, total_bits: int) -> FixedPointFormat:
    """Pick the finest format under which no element saturates.

    Scans frac_bits from total_bits - 1 down to 0 and returns the first
    format that quantizes every element in range.

    Raises:
        QuantizationError: empty or non-finite input, or a magnitude that
            saturates even with zero fractional bits
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise QuantizationError("cannot choose a format for an empty tensor")
    if not np.all(np.isfinite(values)):
        raise QuantizationError("cannot choose a format for non-finite values")
    for frac_bits in range(total_bits - 1, -1, -1):
        fmt = FixedPointFormat(total_bits, frac_bits)
        if count_saturations(values, fmt) == 0:
            return fmt
    peak = float(np.max(np.abs(values)))
    raise QuantizationError(
        f"max |x| = {peak} does not fit in {total_bits} bits even with 0 fractional bits"
    )


def shift_round(value: int, shift: int) -> int:
    """value * 2**-shift, rounded half away from zero (left shift when shift < 0)."""
    if shift <= 0:
        return value << -shift
    magnitude = (abs(value) + (1 << (shift - 1))) >> shift
    return magnitude if value >= 0 else -magnitude


def rescale(acc: int, from_frac: int, to_fmt: FixedPointFormat) -> int:
    """Requantize an accumulator at from_frac into to_fmt."""
    return saturate(shift_round(acc, from_frac - to_fmt.frac_bits), to_fmt)


def divide_round(total: int, divisor: int) -> int:
    """Integer division rounded half away from zero."""
    if divisor <= 0:
        raise QuantizationError(f"divisor must be positive, got {divisor}")
    magnitude = (2 * abs(total) + divisor) // (2 * divisor)
    return magnitude if total >= 0 else -magnitude


def accumulator_bits(total_bits: int, fan_in: int) -> int:
    """Width at which a sum of fan_in products of two total_bits words cannot overflow."""
    return 2 * total_bits + (max(fan_in, 1) - 1).bit_length()
