"""Direct Hardware Mapping actor graph: construction, census, memory models."""

from .actor_graph import ActorGraph
from .actors import (
    ActivationUnit,
    Actor,
    AdderTree,
    Channel,
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
from .base import GraphError, UnsupportedLayerError
from .builder import build_actor_graph
from .census import EntityCensus, LayerCensus, MemoryMode, buffer_words, count_entities, memory_footprint
from .dot import to_dot

__all__ = [
    "ActivationUnit",
    "Actor",
    "ActorGraph",
    "AdderTree",
    "Channel",
    "Constant",
    "EntityCensus",
    "GraphError",
    "LayerCensus",
    "MemoryMode",
    "Mult",
    "NeighborhoodExtractor",
    "NeuronSum",
    "PoolUnit",
    "Shift",
    "Sink",
    "Source",
    "UnsupportedLayerError",
    "Wire",
    "buffer_words",
    "build_actor_graph",
    "count_entities",
    "memory_footprint",
    "to_dot",
]
