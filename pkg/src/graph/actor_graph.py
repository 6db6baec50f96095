"""Immutable actor graph plus structural checks."""

from collections import defaultdict
from dataclasses import dataclass, replace
from functools import cached_property

import networkx as nx

from src.quant.fixed_point import FixedPointFormat
from .actors import Actor, Channel, Sink, Source
from .base import GraphError


@dataclass(frozen=True)
class ActorGraph:
    """Actors and channels of one mapped network.

    ``layers`` lists the hardware layers in stream order; an activation
    fused into its convolution does not appear separately.
    """

    name: str
    actors: tuple[Actor, ...] = ()
    channels: tuple[Channel, ...] = ()
    layers: tuple[str, ...] = ()
    input_shape: tuple[int, int, int] = (0, 0, 0)
    output_shape: tuple[int, int, int] = (0, 0, 0)
    input_format: FixedPointFormat | None = None
    output_format: FixedPointFormat | None = None
    nef: bool = True
    specialized: bool = False

    @cached_property
    def by_id(self) -> dict[str, Actor]:
        return {actor.id: actor for actor in self.actors}

    @cached_property
    def inputs_of(self) -> dict[str, list[Channel]]:
        """Incoming channels per actor, ordered by destination port."""
        result = defaultdict(list)
        for channel in self.channels:
            result[channel.dst].append(channel)
        return {key: sorted(value, key=lambda c: c.dst_port) for key, value in result.items()}

    @cached_property
    def outputs_of(self) -> dict[str, list[Channel]]:
        result = defaultdict(list)
        for channel in self.channels:
            result[channel.src].append(channel)
        return {key: sorted(value, key=lambda c: (c.src_port, c.dst, c.dst_port))
                for key, value in result.items()}

    @property
    def sources(self) -> list[Source]:
        return sorted((a for a in self.actors if isinstance(a, Source)), key=lambda a: a.channel)

    @property
    def sinks(self) -> list[Sink]:
        return sorted((a for a in self.actors if isinstance(a, Sink)), key=lambda a: a.channel)

    def actors_of_layer(self, layer: str) -> list[Actor]:
        return [actor for actor in self.actors if actor.layer == layer]

    def to_networkx(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph(name=self.name)
        for actor in self.actors:
            graph.add_node(actor.id, kind=type(actor).__name__, layer=actor.layer)
        for channel in self.channels:
            graph.add_edge(channel.src, channel.dst, src_port=channel.src_port, dst_port=channel.dst_port)
        return graph

    def topological_order(self) -> list[Actor]:
        """Actors in a deterministic topological order (ties broken by id)."""
        try:
            order = list(nx.lexicographical_topological_sort(self.to_networkx()))
        except nx.NetworkXUnfeasible as e:
            raise GraphError(f"graph '{self.name}' contains a cycle") from e
        return [self.by_id[actor_id] for actor_id in order]

    def validate(self) -> None:
        """Check ids, port arities and acyclicity.

        Raises:
            GraphError: the first structural problem found
        """
        if len(self.by_id) != len(self.actors):
            seen = set()
            for actor in self.actors:
                if actor.id in seen:
                    raise GraphError(f"duplicate actor id '{actor.id}'")
                seen.add(actor.id)

        for channel in self.channels:
            for end in (channel.src, channel.dst):
                if end not in self.by_id:
                    raise GraphError(f"channel {channel} references unknown actor '{end}'")
            producer = self.by_id[channel.src]
            if not 0 <= channel.src_port < producer.output_arity:
                raise GraphError(
                    f"actor '{producer.id}' has {producer.output_arity} output port(s), "
                    f"channel uses port {channel.src_port}"
                )

        for actor in self.actors:
            ports = [c.dst_port for c in self.inputs_of.get(actor.id, [])]
            if ports != list(range(actor.input_arity)):
                raise GraphError(
                    f"actor '{actor.id}' expects input ports 0..{actor.input_arity - 1}, "
                    f"connected ports are {ports}"
                )

        if not nx.is_directed_acyclic_graph(self.to_networkx()):
            raise GraphError(f"graph '{self.name}' contains a cycle")

    def with_contents(self, actors, channels, **changes) -> "ActorGraph":
        return replace(self, actors=tuple(actors), channels=tuple(channels), **changes)
