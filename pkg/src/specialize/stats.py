"""Kernel statistics: how many conv weights fall into each multiplier class."""

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from src.model.base import Conv
from src.quant.quantizer import QuantizedModel
from .classify import MultKind, classify_weight

_KINDS = [kind.value for kind in MultKind]


@dataclass
class ClassCounts:
    zero: int = 0
    one: int = 0
    pow2: int = 0
    generic: int = 0

    @property
    def total(self) -> int:
        return self.zero + self.one + self.pow2 + self.generic

    @property
    def special(self) -> int:
        """Multiplications that are removed, wired or shifted."""
        return self.zero + self.one + self.pow2

    def fractions(self) -> dict[str, Fraction]:
        """Exact share of each class; all zero for an empty count."""
        total = self.total
        return {kind: Fraction(getattr(self, kind), total) if total else Fraction(0) for kind in _KINDS}

    def add(self, other: "ClassCounts") -> None:
        for kind in _KINDS:
            setattr(self, kind, getattr(self, kind) + getattr(other, kind))


@dataclass
class KernelView:
    """Per-kernel view: K*K kernels holding at least one element of a class."""

    kernels: int = 0
    with_zero: int = 0
    with_one: int = 0
    with_pow2: int = 0

    def add(self, other: "KernelView") -> None:
        self.kernels += other.kernels
        self.with_zero += other.with_zero
        self.with_one += other.with_one
        self.with_pow2 += other.with_pow2


@dataclass
class LayerStats:
    counts: ClassCounts = field(default_factory=ClassCounts)
    kernels: KernelView = field(default_factory=KernelView)

    def to_dict(self) -> dict:
        fractions = self.counts.fractions()
        special = Fraction(self.counts.special, self.counts.total) if self.counts.total else Fraction(0)
        return {
            "counts": {kind: getattr(self.counts, kind) for kind in _KINDS},
            "total": self.counts.total,
            "fractions": {kind: float(value) for kind, value in fractions.items()},
            "exact_fractions": {kind: str(value) for kind, value in fractions.items()},
            "special_fraction": float(special),
            "kernels": {
                "total": self.kernels.kernels,
                "with_zero": self.kernels.with_zero,
                "with_one": self.kernels.with_one,
                "with_pow2": self.kernels.with_pow2,
            },
        }


@dataclass
class KernelStats:
    total: LayerStats = field(default_factory=LayerStats)
    per_layer: dict[str, LayerStats] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total": self.total.to_dict(),
            "layers": {name: stats.to_dict() for name, stats in self.per_layer.items()},
        }


def count_classes(values) -> ClassCounts:
    counts = ClassCounts()
    for value in np.asarray(values).reshape(-1):
        kind = classify_weight(int(value)).kind.value
        setattr(counts, kind, getattr(counts, kind) + 1)
    return counts


def _kernel_view(weights: np.ndarray) -> KernelView:
    view = KernelView()
    for kernel in weights.reshape(-1, weights.shape[-2] * weights.shape[-1]):
        kinds = {classify_weight(int(w)).kind for w in kernel}
        view.kernels += 1
        view.with_zero += MultKind.ZERO in kinds
        view.with_one += MultKind.ONE in kinds
        view.with_pow2 += MultKind.POWER_OF_TWO in kinds
    return view


def kernel_statistics(qm: QuantizedModel) -> KernelStats:
    """Exact multiplier-class counts over every conv weight, per layer and total."""
    stats = KernelStats()
    for spec in qm.model.layers:
        if not isinstance(spec.kind, Conv):
            continue
        weights = qm.int_weights[spec.name]
        layer = LayerStats(counts=count_classes(weights), kernels=_kernel_view(weights))
        stats.per_layer[spec.name] = layer
        stats.total.counts.add(layer.counts)
        stats.total.kernels.add(layer.kernels)
    return stats


def stats_to_json(stats: KernelStats) -> str:
    return json.dumps(stats.to_dict(), indent=2, sort_keys=True)


def format_stats_table(stats: KernelStats) -> str:
    header = f"{'layer':<16}{'weights':>10}{'zero':>9}{'one':>9}{'pow2':>9}{'generic':>9}{'special':>9}"
    lines = [header, "-" * len(header)]
    rows = list(stats.per_layer.items()) + [("TOTAL", stats.total)]
    for name, layer in rows:
        fractions = layer.counts.fractions()
        special = layer.counts.special / layer.counts.total if layer.counts.total else 0.0
        lines.append(
            f"{name:<16}{layer.counts.total:>10}"
            + "".join(f"{float(fractions[kind]):>9.1%}" for kind in _KINDS)
            + f"{special:>9.1%}"
        )
    return "\n".join(lines)
