"""Entity census and buffer-memory models of an actor graph."""

from dataclasses import asdict, dataclass, field, fields
from enum import Enum

from .actor_graph import ActorGraph
from .actors import Mult, NeighborhoodExtractor


@dataclass
class LayerCensus:
    multipliers: int = 0
    generic_multipliers: int = 0
    shifts: int = 0
    wires: int = 0
    constants: int = 0
    adder_trees: int = 0
    neuron_sums: int = 0
    activations: int = 0
    neighborhood_extractors: int = 0
    pool_units: int = 0

    @property
    def adders(self) -> int:
        return self.adder_trees + self.neuron_sums

    def add(self, other: "LayerCensus") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def to_dict(self) -> dict:
        return {**asdict(self), "adders": self.adders}


@dataclass
class EntityCensus:
    total: LayerCensus = field(default_factory=LayerCensus)
    per_layer: dict[str, LayerCensus] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "total": self.total.to_dict(),
            "layers": {name: census.to_dict() for name, census in self.per_layer.items()},
        }


def count_entities(graph: ActorGraph) -> EntityCensus:
    """Count hardware entities by kind, per layer and in total."""
    census = EntityCensus()
    for layer in graph.layers:
        census.per_layer[layer] = LayerCensus()
    for actor in graph.actors:
        if actor.census_field is None:
            continue
        layer = census.per_layer.setdefault(actor.layer, LayerCensus())
        setattr(layer, actor.census_field, getattr(layer, actor.census_field) + 1)
        if isinstance(actor, Mult) and actor.mult_class.is_generic:
            layer.generic_multipliers += 1
    for layer in census.per_layer.values():
        census.total.add(layer)
    return census


class MemoryMode(str, Enum):
    """How extractor buffer memory is counted.

    WINDOW_ONLY counts one K*K window register file per extractor.
    ARCHITECTURAL counts the K-1 full-width line buffers plus the window.
    """

    WINDOW_ONLY = "window"
    ARCHITECTURAL = "architectural"


def buffer_words(kernel: int, width: int, mode: MemoryMode) -> int:
    """Words buffered by a kernel x kernel window sliding over rows of the given width."""
    window = kernel * kernel
    if mode is MemoryMode.WINDOW_ONLY:
        return window
    return (kernel - 1) * width + window


def extractor_words(actor: NeighborhoodExtractor, mode: MemoryMode) -> int:
    return buffer_words(actor.kernel, actor.padded_width, mode)


def memory_footprint(graph: ActorGraph, mode: MemoryMode, word_bits: int) -> dict[str, int]:
    """Extractor buffer bits per layer (layers without extractors map to 0)."""
    footprint = {layer: 0 for layer in graph.layers}
    for actor in graph.actors:
        if isinstance(actor, NeighborhoodExtractor):
            footprint[actor.layer] = footprint.get(actor.layer, 0) + extractor_words(actor, mode) * word_bits
    return footprint
