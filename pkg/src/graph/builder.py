"""Build the Direct Hardware Mapping actor graph from a quantized model.

Every multiplication of every convolution becomes its own Mult actor. With
neighborhood extraction factorization (NEF) the C window extractors of a
layer are shared by all N neurons; without it each (neuron, channel) pair
owns one.
"""

from src.logger import setup_logger
from src.model.base import Activation, Conv, FullyConnected, Pool
from src.model.validate import layer_shapes
from src.quant.quantizer import QuantizedModel
from .actor_graph import ActorGraph
from .actors import (
    ActivationUnit,
    AdderTree,
    Channel,
    Mult,
    NeighborhoodExtractor,
    NeuronSum,
    PoolUnit,
    Sink,
    Source,
)
from .base import UnsupportedLayerError

logger = setup_logger()

Port = tuple[str, int]


class _GraphBuilder:
    def __init__(self, qm: QuantizedModel, nef: bool):
        self.qm = qm
        self.nef = nef
        self.actors = []
        self.channels = []
        self.shapes = layer_shapes(qm.model)

    def add(self, actor):
        self.actors.append(actor)
        return actor

    def connect(self, src: Port, dst: str, dst_port: int = 0) -> None:
        self.channels.append(Channel(src[0], src[1], dst, dst_port))

    def conv(self, spec, kind: Conv, streams: list[Port], fused) -> list[Port]:
        name = spec.name
        (channels, height, width), _ = self.shapes[name]
        formats = self.qm.formats[name]
        weights = self.qm.int_weights[name]
        biases = self.qm.bias_in_accumulator(name)
        k = kind.kernel

        def extractor(actor_id: str, c: int) -> str:
            self.add(NeighborhoodExtractor(
                actor_id, name, channel=c, kernel=k, image_width=width, image_height=height,
                stride=kind.stride, pad=kind.pad,
            ))
            self.connect(streams[c], actor_id)
            return actor_id

        shared = [extractor(f"{name}/ne{c}", c) for c in range(channels)] if self.nef else None

        outputs = []
        for n in range(kind.num_output):
            sum_id = f"{name}/n{n}/sum"
            for c in range(channels):
                prefix = f"{name}/n{n}/c{c}"
                ne_id = shared[c] if self.nef else extractor(f"{prefix}/ne", c)
                tree_id = f"{prefix}/tree"
                self.add(AdderTree(tree_id, name, arity=k * k))
                for p in range(k):
                    for q in range(k):
                        tap = p * k + q
                        mult_id = f"{prefix}/m{tap}"
                        self.add(Mult(
                            mult_id, name, weight=int(weights[n, c, p, q]),
                            index=((n * channels + c) * k + p) * k + q,
                        ))
                        self.connect((ne_id, tap), mult_id)
                        self.connect((mult_id, 0), tree_id, tap)
                self.connect((tree_id, 0), sum_id, c)
            self.add(NeuronSum(sum_id, name, arity=channels, bias=int(biases[n]), neuron=n))
            act_id = f"{name}/n{n}/act"
            self.add(ActivationUnit(
                act_id, name, fn=fused, acc_frac=formats.acc_frac, out_format=formats.output,
            ))
            self.connect((sum_id, 0), act_id)
            outputs.append((act_id, 0))
        return outputs

    def pool(self, spec, kind: Pool, streams: list[Port]) -> list[Port]:
        (_, height, width), _ = self.shapes[spec.name]
        outputs = []
        for c, stream in enumerate(streams):
            actor_id = f"{spec.name}/p{c}"
            self.add(PoolUnit(
                actor_id, spec.name, channel=c, kernel=kind.kernel, stride=kind.stride,
                mode=kind.mode, image_width=width, image_height=height,
            ))
            self.connect(stream, actor_id)
            outputs.append((actor_id, 0))
        return outputs

    def activation(self, spec, kind: Activation, streams: list[Port]) -> list[Port]:
        fmt = self.qm.formats[spec.name].output
        outputs = []
        for c, stream in enumerate(streams):
            actor_id = f"{spec.name}/a{c}"
            self.add(ActivationUnit(actor_id, spec.name, fn=kind.fn, acc_frac=fmt.frac_bits, out_format=fmt))
            self.connect(stream, actor_id)
            outputs.append((actor_id, 0))
        return outputs

    def build(self) -> ActorGraph:
        model = self.qm.model
        channels, _, _ = model.input_shape
        streams: list[Port] = []
        for c in range(channels):
            source_id = f"input/c{c}"
            self.add(Source(source_id, "input", channel=c))
            streams.append((source_id, 0))

        layers = []
        skip = None
        for index, spec in enumerate(model.layers):
            if spec.name == skip:
                continue
            kind = spec.kind
            if isinstance(kind, FullyConnected):
                raise UnsupportedLayerError(
                    f"layer '{spec.name}' is fully connected and has no hardware mapping; "
                    f"use golden-model-only mode (simulate --golden-only) for networks with FC layers"
                )
            if isinstance(kind, Conv):
                following = model.layers[index + 1] if index + 1 < len(model.layers) else None
                fused = None
                if following is not None and isinstance(following.kind, Activation):
                    fused = following.kind.fn
                    skip = following.name
                streams = self.conv(spec, kind, streams, fused)
            elif isinstance(kind, Pool):
                streams = self.pool(spec, kind, streams)
            elif isinstance(kind, Activation):
                streams = self.activation(spec, kind, streams)
            layers.append(spec.name)

        for n, stream in enumerate(streams):
            sink_id = f"output/f{n}"
            self.add(Sink(sink_id, "output", channel=n))
            self.connect(stream, sink_id)

        last = model.layers[-1].name
        return ActorGraph(
            name=model.name,
            actors=tuple(self.actors),
            channels=tuple(self.channels),
            layers=tuple(layers),
            input_shape=tuple(model.input_shape),
            output_shape=self.shapes[last][1],
            input_format=self.qm.input_format,
            output_format=self.qm.formats[last].output,
            nef=self.nef,
        )


def build_actor_graph(qm: QuantizedModel, nef: bool = True) -> ActorGraph:
    """Map a quantized conv/pool/activation network onto actors.

    A conv layer with N outputs over C channels becomes C extractors (N*C
    without sharing), one constant multiplier per weight, an adder tree per
    (n, c) pair and a neuron sum plus activation per output. An activation
    layer right after a conv is fused into it; pool and standalone
    activation layers become one actor per channel.

    Args:
        qm: Quantized model
        nef: Share one neighborhood extractor per input channel (default);
            False gives every neuron its own extractors

    Returns:
        Validated ActorGraph with one Source per input channel and one
        Sink per output channel

    Raises:
        UnsupportedLayerError: the model contains a fully connected layer
    """
    graph = _GraphBuilder(qm, nef).build()
    graph.validate()
    logger.debug(
        f"built graph '{graph.name}': {len(graph.actors)} actors, "
        f"{len(graph.channels)} channels, nef={nef}"
    )
    return graph
