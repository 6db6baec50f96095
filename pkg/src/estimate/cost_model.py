"""Calibrated linear logic-element model of the mapped entities.

Every coefficient is read from a JSON calibration file so that another
FPGA family can be described without touching code. Costs are in ALM
equivalents; ``b`` below is the data word size in bits.
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

from src.config import CALIBRATION_FILE
from src.errors import CnnDhmError
from src.model.base import ActivationFn
from src.specialize.stats import ClassCounts


class EstimateError(CnnDhmError):
    """Raised for inconsistent estimator inputs or a broken calibration file."""


@dataclass(frozen=True)
class Calibration:
    generic_mult_per_bit2: float
    shift_per_bit: float
    adder_input_per_bit: float
    register_per_bit: float
    extractor_per_bit: float
    comparator_per_bit: float
    relu_per_bit: float
    tanh_lut_per_entry: float
    dsp_per_multiplier: float
    family: str = ""

    def generic_mult(self, bits: int) -> float:
        return self.generic_mult_per_bit2 * bits * bits

    def shift(self, bits: int) -> float:
        return self.shift_per_bit * bits

    def adder_tree(self, inputs: int, bits: int) -> float:
        """Adder inputs plus the engine output register."""
        return self.adder_input_per_bit * bits * inputs + self.register_per_bit * bits

    def neuron_sum(self, arity: int, bits: int) -> float:
        # +1 for the bias input
        return self.adder_input_per_bit * bits * (arity + 1)

    def activation(self, fn: ActivationFn | None, bits: int) -> float:
        if fn is ActivationFn.TANH:
            return self.tanh_lut_per_entry * (1 << bits)
        return self.relu_per_bit * bits

    def extractor(self, kernel: int, bits: int) -> float:
        return self.extractor_per_bit * kernel * kernel * bits

    def pool(self, kernel: int, bits: int) -> float:
        window = kernel * kernel
        return self.comparator_per_bit * bits * (window - 1) + self.extractor_per_bit * bits * window


@lru_cache(maxsize=8)
def load_calibration(path: str = CALIBRATION_FILE) -> Calibration:
    """Read calibration coefficients from JSON.

    Raises:
        EstimateError: unreadable file or missing coefficient
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        coefficients = {name: float(entry["value"]) for name, entry in data["coefficients"].items()}
        return Calibration(family=data.get("family", ""), **coefficients)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise EstimateError(f"cannot load calibration from {path}: {e}") from e


def estimate_conv_engine(
    kernel: int,
    bits: int,
    classes: ClassCounts,
    calibration: Calibration | None = None,
) -> float:
    """ALM estimate of one K*K convolution engine with constant coefficients.

    Args:
        kernel: Kernel size K
        bits: Data/weight word size
        classes: Multiplier-class histogram of the K*K weights
        calibration: Coefficients (default: the configured calibration file)

    Returns:
        Estimated ALMs: generic multipliers, shifts, one adder input per
        non-zero weight and the output register

    Raises:
        EstimateError: histogram does not total K*K
    """
    if classes.total != kernel * kernel:
        raise EstimateError(f"histogram totals {classes.total}, expected {kernel * kernel} for K={kernel}")
    cal = calibration or load_calibration()
    nonzero = classes.total - classes.zero
    return (
        classes.generic * cal.generic_mult(bits)
        + classes.pow2 * cal.shift(bits)
        + cal.adder_tree(nonzero, bits)
    )
