"""Constant-multiplier classification, graph specialization and kernel statistics."""

from .classify import GENERIC, ONE, ZERO, MultClass, MultKind, classify_weight
from .rewrite import specialize
from .stats import (
    ClassCounts,
    KernelStats,
    KernelView,
    LayerStats,
    count_classes,
    format_stats_table,
    kernel_statistics,
    stats_to_json,
)

__all__ = [
    "ClassCounts",
    "GENERIC",
    "KernelStats",
    "KernelView",
    "LayerStats",
    "MultClass",
    "MultKind",
    "ONE",
    "ZERO",
    "classify_weight",
    "count_classes",
    "format_stats_table",
    "kernel_statistics",
    "specialize",
    "stats_to_json",
]
