"""Network description: topology parsing, weights container and validation."""

from .base import (
    Activation,
    ActivationFn,
    CnnModel,
    Conv,
    FullyConnected,
    LayerKind,
    LayerSpec,
    ModelError,
    Pool,
    PoolMode,
    TopologySyntaxError,
    WeightsError,
)
from .reference import float_inference
from .topology import parse_topology, serialize_topology
from .validate import Diagnostic, Severity, has_errors, layer_shapes, output_shape, validate_model
from .weights import load_weights, write_weights

__all__ = [
    "Activation",
    "ActivationFn",
    "CnnModel",
    "Conv",
    "Diagnostic",
    "FullyConnected",
    "LayerKind",
    "LayerSpec",
    "ModelError",
    "Pool",
    "PoolMode",
    "Severity",
    "TopologySyntaxError",
    "WeightsError",
    "float_inference",
    "has_errors",
    "layer_shapes",
    "load_weights",
    "output_shape",
    "parse_topology",
    "serialize_topology",
    "validate_model",
    "write_weights",
]
