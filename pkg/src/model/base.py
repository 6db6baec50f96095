"""Domain types of the network description: the compiler's IR."""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from src.errors import CnnDhmError


class ModelError(CnnDhmError):
    """Raised when a topology or weights file cannot be turned into a valid model."""


class TopologySyntaxError(ModelError):
    """Raised on malformed topology text; carries the 1-based position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class WeightsError(ModelError):
    """Raised when the weights container does not match the model."""


class PoolMode(str, Enum):
    MAX = "max"
    AVG = "avg"


class ActivationFn(str, Enum):
    RELU = "relu"
    TANH = "tanh"


@dataclass(frozen=True)
class Conv:
    num_output: int
    channels: int
    kernel: int
    stride: int = 1
    pad: int = 0
    bias: bool = True


@dataclass(frozen=True)
class Pool:
    kernel: int
    stride: int
    mode: PoolMode = PoolMode.MAX


@dataclass(frozen=True)
class Activation:
    fn: ActivationFn


@dataclass(frozen=True)
class FullyConnected:
    num_output: int
    channels: int
    bias: bool = True


LayerKind = Conv | Pool | Activation | FullyConnected


@dataclass(frozen=True)
class LayerSpec:
    """One layer of the network.

    Float parameters are excluded from equality: two specs compare equal when
    their names and shapes agree, which is what the topology round trip needs.
    """

    name: str
    kind: LayerKind
    weights: np.ndarray | None = field(default=None, compare=False, repr=False)
    biases: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def is_parameterized(self) -> bool:
        return isinstance(self.kind, (Conv, FullyConnected))

    @property
    def has_bias(self) -> bool:
        return self.is_parameterized and self.kind.bias

    def with_params(self, weights: np.ndarray, biases: np.ndarray | None) -> "LayerSpec":
        return replace(self, weights=weights, biases=biases)


@dataclass(frozen=True)
class CnnModel:
    """Ordered layer list plus the (channels, height, width) input shape."""

    name: str
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]

    def layer(self, name: str) -> LayerSpec:
        for spec in self.layers:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def index_of(self, name: str) -> int:
        for i, spec in enumerate(self.layers):
            if spec.name == name:
                return i
        raise KeyError(name)

    @property
    def conv_layers(self) -> list[LayerSpec]:
        return [spec for spec in self.layers if isinstance(spec.kind, Conv)]

    @property
    def parameterized_layers(self) -> list[LayerSpec]:
        return [spec for spec in self.layers if spec.is_parameterized]

    @property
    def has_weights(self) -> bool:
        return all(
            spec.weights is not None and (spec.biases is not None or not spec.has_bias)
            for spec in self.parameterized_layers
        )

    def without_weights(self) -> "CnnModel":
        return replace(
            self,
            layers=tuple(replace(spec, weights=None, biases=None) for spec in self.layers),
        )

    def replace_layers(self, layers) -> "CnnModel":
        return replace(self, layers=tuple(layers))
