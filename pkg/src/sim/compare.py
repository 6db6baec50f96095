"""Element-wise comparison of two feature-map tensors."""

from dataclasses import dataclass

import numpy as np

from .streams import FeatureMaps


@dataclass(frozen=True)
class DiffReport:
    """Outcome of comparing an actual against an expected tensor.

    A shape mismatch is reported through ``shape_match`` rather than raised;
    ``first_mismatch`` is the (n, row, col) of the first differing element
    in raster order.
    """

    exact: bool
    shape_match: bool
    actual_shape: tuple[int, ...]
    expected_shape: tuple[int, ...]
    mismatches: int = 0
    max_abs_diff: int = 0
    first_mismatch: tuple[int, ...] | None = None
    format_match: bool = True

    def to_dict(self) -> dict:
        return {
            "exact": self.exact,
            "shape_match": self.shape_match,
            "format_match": self.format_match,
            "actual_shape": list(self.actual_shape),
            "expected_shape": list(self.expected_shape),
            "mismatches": self.mismatches,
            "max_abs_diff": self.max_abs_diff,
            "first_mismatch": None if self.first_mismatch is None else list(self.first_mismatch),
        }

    def summary(self) -> str:
        if self.exact:
            return "exact match"
        if not self.shape_match:
            return f"shape mismatch: {self.actual_shape} vs {self.expected_shape}"
        if not self.format_match and self.mismatches == 0:
            return "values match but formats differ"
        return (
            f"{self.mismatches} mismatches, max |diff| {self.max_abs_diff}, "
            f"first at {self.first_mismatch}"
        )


def compare(actual: FeatureMaps, expected: FeatureMaps) -> DiffReport:
    a, b = np.asarray(actual.data), np.asarray(expected.data)
    format_match = actual.fmt == expected.fmt
    if a.shape != b.shape:
        return DiffReport(
            exact=False, shape_match=False, format_match=format_match,
            actual_shape=a.shape, expected_shape=b.shape,
        )
    diff = np.abs(a.astype(np.int64) - b.astype(np.int64))
    wrong = np.argwhere(diff != 0)
    first = tuple(int(i) for i in wrong[0]) if len(wrong) else None
    return DiffReport(
        exact=len(wrong) == 0 and format_match,
        shape_match=True,
        format_match=format_match,
        actual_shape=a.shape,
        expected_shape=b.shape,
        mismatches=len(wrong),
        max_abs_diff=int(diff.max()) if diff.size else 0,
        first_mismatch=first,
    )
