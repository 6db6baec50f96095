"""Cost tiers of constant-coefficient multiplications."""

from dataclasses import dataclass
from enum import Enum


class MultKind(str, Enum):
    """Multiplier classes, cheapest first."""

    ZERO = "zero"
    ONE = "one"
    POWER_OF_TWO = "pow2"
    GENERIC = "generic"

    @property
    def rank(self) -> int:
        return list(MultKind).index(self)


@dataclass(frozen=True)
class MultClass:
    kind: MultKind
    shift: int = 0
    negative: bool = False

    @property
    def is_generic(self) -> bool:
        return self.kind is MultKind.GENERIC

    def __str__(self) -> str:
        if self.kind is MultKind.POWER_OF_TWO:
            return f"pow2({'-' if self.negative else ''}2^{self.shift})"
        return self.kind.value


ZERO = MultClass(MultKind.ZERO)
ONE = MultClass(MultKind.ONE)
GENERIC = MultClass(MultKind.GENERIC)


def classify_weight(w: int) -> MultClass:
    """Zero, One, PowerOfTwo (+-2^k, including -1 as a bare negation) or Generic."""
    w = int(w)
    if w == 0:
        return ZERO
    if w == 1:
        return ONE
    magnitude = abs(w)
    if magnitude & (magnitude - 1) == 0:
        return MultClass(MultKind.POWER_OF_TWO, shift=magnitude.bit_length() - 1, negative=w < 0)
    return GENERIC
