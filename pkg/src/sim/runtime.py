"""Firing rules of each actor kind.

A runtime consumes one token per input port and returns its emissions,
each a tuple with one value per output port.
"""

from abc import ABC, abstractmethod

from src.graph.actors import (
    ActivationUnit,
    Actor,
    AdderTree,
    Constant,
    Mult,
    NeighborhoodExtractor,
    NeuronSum,
    PoolUnit,
    Shift,
    Sink,
    Source,
    Wire,
)
from src.model.base import PoolMode
from src.quant.activation import activate
from src.quant.fixed_point import divide_round, rescale
from .base import SimulationError
from .line_buffer import LineBuffer

Emission = tuple[int, ...]


class ActorRuntime(ABC):
    def __init__(self, actor: Actor):
        self.actor = actor
        self.firings = 0

    def fire(self, inputs: tuple[int, ...]) -> list[Emission]:
        self.firings += 1
        return self.compute(inputs)

    @abstractmethod
    def compute(self, inputs: tuple[int, ...]) -> list[Emission]:
        ...


class SourceRuntime(ActorRuntime):
    """Forwards externally injected pixels."""

    def compute(self, inputs):
        return [inputs]


class SinkRuntime(ActorRuntime):
    def __init__(self, actor: Sink):
        super().__init__(actor)
        self.tokens: list[int] = []

    def compute(self, inputs):
        self.tokens.append(inputs[0])
        return []


class WindowRuntime(ActorRuntime):
    """Shared behaviour of extractor and pooling: windows over a line buffer.

    ``first_window`` is the 0-based input token index that completed the
    first window of the current frame.
    """

    def __init__(self, actor: Actor, buffer: LineBuffer):
        super().__init__(actor)
        self.buffer = buffer
        self.first_window: int | None = None

    def compute(self, inputs):
        windows = self.buffer.push(inputs[0])
        if windows and self.first_window is None:
            self.first_window = self.firings - 1
        return [self.reduce(window) for window in windows]

    def reduce(self, window: tuple[int, ...]) -> Emission:
        return window


class ExtractorRuntime(WindowRuntime):
    def __init__(self, actor: NeighborhoodExtractor):
        super().__init__(actor, LineBuffer(
            actor.kernel, actor.image_width, actor.image_height, actor.stride, actor.pad,
        ))


class PoolRuntime(WindowRuntime):
    def __init__(self, actor: PoolUnit):
        super().__init__(actor, LineBuffer(actor.kernel, actor.image_width, actor.image_height, actor.stride))
        self.mode = actor.mode

    def reduce(self, window):
        if self.mode is PoolMode.MAX:
            return (max(window),)
        return (divide_round(sum(window), len(window)),)


class MultRuntime(ActorRuntime):
    def compute(self, inputs):
        return [(inputs[0] * self.actor.weight,)]


class ShiftRuntime(ActorRuntime):
    def compute(self, inputs):
        value = inputs[0] << self.actor.shift
        return [(-value if self.actor.negative else value,)]


class WireRuntime(ActorRuntime):
    def compute(self, inputs):
        return [inputs]


class ConstantRuntime(ActorRuntime):
    def compute(self, inputs):
        return [(self.actor.value,)]


class SumRuntime(ActorRuntime):
    """Adder tree and neuron sum; the tree's bias is zero."""

    def compute(self, inputs):
        return [(sum(inputs) + getattr(self.actor, "bias", 0),)]


class ActivationRuntime(ActorRuntime):
    def compute(self, inputs):
        actor = self.actor
        value = rescale(inputs[0], actor.acc_frac, actor.out_format)
        return [(activate(actor.fn, value, actor.out_format),)]


_RUNTIMES = {
    Source: SourceRuntime,
    Sink: SinkRuntime,
    NeighborhoodExtractor: ExtractorRuntime,
    PoolUnit: PoolRuntime,
    Mult: MultRuntime,
    Shift: ShiftRuntime,
    Wire: WireRuntime,
    Constant: ConstantRuntime,
    AdderTree: SumRuntime,
    NeuronSum: SumRuntime,
    ActivationUnit: ActivationRuntime,
}


def make_runtime(actor: Actor) -> ActorRuntime:
    try:
        runtime_class = _RUNTIMES[type(actor)]
    except KeyError:
        raise SimulationError(f"no firing rule for actor '{actor.id}' ({type(actor).__name__})") from None
    return runtime_class(actor)
