"""Token-driven execution of an actor graph.

Every channel is an unbounded FIFO. For each input pixel the sources
emit one token, then the scheduler sweeps the actors, firing each one
whose input ports all hold a token, until a full sweep fires nothing.
"""

from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from src.graph.actor_graph import ActorGraph
from src.graph.actors import Actor, Channel, NeighborhoodExtractor, PoolUnit, Source
from src.logger import setup_logger
from .base import DeadlockError, SimulationError
from .runtime import ExtractorRuntime, WindowRuntime, make_runtime
from .streams import FeatureMaps, PixelStream

logger = setup_logger()


class Scheduler(ABC):
    """Decides the order in which a sweep visits the actors."""

    name = ""

    @abstractmethod
    def order(self, graph: ActorGraph) -> list[Actor]:
        ...


class RoundRobinScheduler(Scheduler):
    name = "round-robin"

    def order(self, graph):
        return graph.topological_order()


class ReverseScheduler(Scheduler):
    """Visits consumers before producers, so most tokens wait a sweep."""

    name = "reverse"

    def order(self, graph):
        return list(reversed(graph.topological_order()))


def channel_label(channel: Channel) -> str:
    return f"{channel.src}:{channel.src_port}->{channel.dst}:{channel.dst_port}"


@dataclass
class SimulationResult:
    """Outcome of one simulated frame.

    Attributes:
        output: Feature maps reassembled from the sink streams
        firings: Firings per actor id
        high_water: Peak token count per channel, keyed by channel label
        warmup: Tokens each extractor consumed before its first window
    """

    output: FeatureMaps
    firings: dict[str, int] = field(default_factory=dict)
    high_water: dict[str, int] = field(default_factory=dict)
    warmup: dict[str, int] = field(default_factory=dict)

    @property
    def max_occupancy(self) -> int:
        return max(self.high_water.values(), default=0)


def expected_firings(graph: ActorGraph) -> dict[str, int]:
    """Firings per actor for one frame, derived from the static graph.

    Sources fire once per pixel, extractors and pool units once per input
    token, and every other actor once per token its producer emits.

    Returns:
        Map from actor id to firing count, comparable with
        SimulationResult.firings
    """
    _, height, width = graph.input_shape
    produced: dict[str, int] = {}
    firings: dict[str, int] = {}
    for actor in graph.topological_order():
        if isinstance(actor, Source):
            count = height * width
        else:
            count = produced[graph.inputs_of[actor.id][0].src]
        firings[actor.id] = count
        if isinstance(actor, (NeighborhoodExtractor, PoolUnit)):
            produced[actor.id] = actor.windows
        else:
            produced[actor.id] = count
    return firings


class _Execution:
    def __init__(self, graph: ActorGraph, scheduler: Scheduler):
        self.graph = graph
        self.order = [actor.id for actor in scheduler.order(graph)]
        self.position = {actor_id: i for i, actor_id in enumerate(self.order)}
        self.runtimes = {actor.id: make_runtime(actor) for actor in graph.actors}
        self.queues = {channel: deque() for channel in graph.channels}
        self.high_water = {channel: 0 for channel in graph.channels}
        self.inputs = {actor.id: [self.queues[c] for c in graph.inputs_of.get(actor.id, [])]
                       for actor in graph.actors}
        self.fanout = {actor.id: [(c.src_port, self.queues[c], c) for c in graph.outputs_of.get(actor.id, [])]
                       for actor in graph.actors}
        self.pending: set[str] = set()

    def emit(self, actor_id: str, emissions) -> None:
        for emission in emissions:
            for port, queue, channel in self.fanout[actor_id]:
                queue.append(emission[port])
                self.pending.add(channel.dst)
                if len(queue) > self.high_water[channel]:
                    self.high_water[channel] = len(queue)

    def inject(self, actor_id: str, value: int) -> None:
        self.emit(actor_id, self.runtimes[actor_id].fire((value,)))

    def sweep(self) -> None:
        """Visit actors holding tokens in scheduler order, one firing per visit, until none can fire."""
        while self.pending:
            visit = sorted(self.pending, key=self.position.__getitem__)
            self.pending = set()
            for actor_id in visit:
                queues = self.inputs[actor_id]
                if all(queues):
                    values = tuple(queue.popleft() for queue in queues)
                    self.emit(actor_id, self.runtimes[actor_id].fire(values))
                    if all(queues):
                        self.pending.add(actor_id)

    def check_quiescent(self) -> None:
        for actor_id in self.order:
            queues = self.inputs[actor_id]
            pending = [port for port, queue in enumerate(queues) if queue]
            if pending:
                starved = [port for port, queue in enumerate(queues) if not queue]
                raise DeadlockError(
                    actor_id,
                    f"tokens pending on ports {pending} but none on ports {starved}",
                )


def simulate(graph: ActorGraph, image: PixelStream, scheduler: Scheduler | None = None) -> SimulationResult:
    """Stream one frame through the graph and reassemble the sink streams.

    Args:
        graph: Actor graph of conv/pool/activation layers
        image: Input frame in the graph's input format
        scheduler: Sweep order; round-robin topological by default

    Returns:
        SimulationResult with the output feature maps and execution counters

    Raises:
        SimulationError: image shape or format does not match the graph
        DeadlockError: tokens remain that can never be consumed
    """
    scheduler = scheduler or RoundRobinScheduler()
    if image.shape != tuple(graph.input_shape):
        raise SimulationError(f"image shape {image.shape} does not match graph input {tuple(graph.input_shape)}")
    if graph.input_format is not None and image.fmt != graph.input_format:
        raise SimulationError(f"image is in {image.fmt}, graph input expects {graph.input_format}")

    execution = _Execution(graph, scheduler)
    sources = [source.id for source in graph.sources]
    for token in image.tokens():
        for source_id, value in zip(sources, token):
            execution.inject(source_id, value)
        execution.sweep()
    execution.check_quiescent()

    firings = {actor_id: runtime.firings for actor_id, runtime in execution.runtimes.items()}
    expected = expected_firings(graph)
    wrong = {key: (firings[key], count) for key, count in expected.items() if firings[key] != count}
    if wrong:
        actor_id, (actual, count) = sorted(wrong.items())[0]
        raise SimulationError(
            f"{len(wrong)} actors fired an unexpected number of times; "
            f"'{actor_id}' fired {actual}, expected {count}"
        )

    channels, rows, cols = graph.output_shape
    data = np.zeros((channels, rows, cols), dtype=np.int64)
    for sink in graph.sinks:
        tokens = execution.runtimes[sink.id].tokens
        if len(tokens) != rows * cols:
            raise SimulationError(f"sink '{sink.id}' received {len(tokens)} tokens, expected {rows * cols}")
        data[sink.channel] = np.array(tokens, dtype=np.int64).reshape(rows, cols)

    high_water = {channel_label(c): level for c, level in execution.high_water.items()}
    warmup = {
        actor_id: runtime.first_window
        for actor_id, runtime in execution.runtimes.items()
        if isinstance(runtime, WindowRuntime) and runtime.first_window is not None
    }
    result = SimulationResult(
        output=FeatureMaps(data, graph.output_format),
        firings=firings,
        high_water=high_water,
        warmup=warmup,
    )
    logger.debug(
        f"simulated '{graph.name}' with {scheduler.name} scheduling: "
        f"{sum(firings.values())} firings, max channel occupancy {result.max_occupancy}"
    )
    extractors = [a for a in warmup if isinstance(execution.runtimes[a], ExtractorRuntime)]
    if extractors:
        logger.debug(f"first extractor window after token {warmup[extractors[0]]} ({extractors[0]})")
    return result
