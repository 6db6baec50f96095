"""Resource, memory and throughput estimation without synthesis."""

from .cost_model import Calibration, EstimateError, estimate_conv_engine, load_calibration
from .report import (
    LayerResources,
    ResourceReport,
    estimate_network,
    format_report_table,
    layer_ops,
    ops_per_pixel,
    report_from_json,
    report_to_json,
    throughput,
    throughput_gops,
)

__all__ = [
    "Calibration",
    "EstimateError",
    "LayerResources",
    "ResourceReport",
    "estimate_conv_engine",
    "estimate_network",
    "format_report_table",
    "layer_ops",
    "load_calibration",
    "ops_per_pixel",
    "report_from_json",
    "report_to_json",
    "throughput",
    "throughput_gops",
]
