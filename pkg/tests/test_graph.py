"""Tests for actor-graph construction, census, memory models and DOT output."""

import numpy as np
import pytest

from src.graph import (
    ActivationUnit,
    ActorGraph,
    AdderTree,
    Channel,
    GraphError,
    MemoryMode,
    Mult,
    NeighborhoodExtractor,
    NeuronSum,
    Sink,
    Source,
    UnsupportedLayerError,
    build_actor_graph,
    count_entities,
    memory_footprint,
    to_dot,
)
from src.model.base import ActivationFn
from src.quant import FixedPointFormat
from tests.model_factory import act, conv, fc, make_model, pool, quantized, single_conv_model


def zero_weights(name, shape):
    return np.zeros(shape)


class TestBuildActorGraph:
    def test_dummy_layer_census(self):
        # N=5, C=3, K=3: 135 multipliers, 15 trees + 5 neuron sums, 5 activations
        qm = quantized(single_conv_model(5, 3, 3), rng=np.random.default_rng(0))
        census = count_entities(build_actor_graph(qm)).total
        assert census.multipliers == 135
        assert census.adder_trees == 15
        assert census.neuron_sums == 5
        assert census.adders == 20
        assert census.activations == 5
        assert census.neighborhood_extractors == 3

    def test_lenet_second_layer_multipliers(self):
        qm = quantized(single_conv_model(16, 6, 5, height=14, width=14), rng=np.random.default_rng(0))
        assert count_entities(build_actor_graph(qm)).total.multipliers == 2400

    def test_without_nef_every_engine_has_an_extractor(self):
        qm = quantized(single_conv_model(5, 3, 3), rng=np.random.default_rng(0))
        graph = build_actor_graph(qm, nef=False)
        assert count_entities(graph).total.neighborhood_extractors == 15
        assert graph.nef is False

    def test_mult_indices_follow_weight_layout(self):
        qm = quantized(single_conv_model(2, 2, 3), rng=np.random.default_rng(1))
        graph = build_actor_graph(qm)
        flat = qm.int_weights["conv1"].reshape(-1)
        for actor in graph.actors:
            if isinstance(actor, Mult):
                assert actor.weight == flat[actor.index]
        assert graph.by_id["conv1/n1/c0/m4"].index == ((1 * 2 + 0) * 3 + 1) * 3 + 1

    def test_activation_fused_into_conv(self):
        model = make_model((1, 8, 8), [conv("c1", 2, 1, 3), act("r1", ActivationFn.TANH), pool("p1")])
        graph = build_actor_graph(quantized(model))
        assert graph.layers == ("c1", "p1")
        acts = [a for a in graph.actors if isinstance(a, ActivationUnit)]
        assert len(acts) == 2
        assert all(a.fn is ActivationFn.TANH and a.layer == "c1" for a in acts)

    def test_standalone_activation(self):
        model = make_model((2, 6, 6), [act("r0"), conv("c1", 1, 2, 1)])
        graph = build_actor_graph(quantized(model))
        assert graph.layers == ("r0", "c1")
        assert [a.id for a in graph.actors_of_layer("r0")] == ["r0/a0", "r0/a1"]

    def test_sources_sinks_and_shapes(self):
        model = make_model((3, 10, 10), [conv("c1", 4, 3, 3), pool("p1")])
        graph = build_actor_graph(quantized(model))
        assert [s.id for s in graph.sources] == ["input/c0", "input/c1", "input/c2"]
        assert [s.id for s in graph.sinks] == ["output/f0", "output/f1", "output/f2", "output/f3"]
        assert graph.output_shape == (4, 4, 4)
        assert count_entities(graph).total.pool_units == 4

    def test_fully_connected_rejected(self):
        model = make_model((1, 4, 4), [conv("c1", 1, 1, 3), fc("f1", 2, 1)])
        with pytest.raises(UnsupportedLayerError, match="golden-only"):
            build_actor_graph(quantized(model))

    def test_topological_order_is_deterministic(self):
        qm = quantized(single_conv_model(2, 2, 3), rng=np.random.default_rng(2))
        first = [a.id for a in build_actor_graph(qm).topological_order()]
        second = [a.id for a in build_actor_graph(qm).topological_order()]
        assert first == second
        assert first.index("input/c0") < first.index("conv1/ne0") < first.index("conv1/n0/c0/m0")


class TestGraphValidate:
    def base(self):
        actors = [
            Source("s", "input"),
            NeighborhoodExtractor("ne", "l", kernel=1, image_width=2, image_height=2),
            AdderTree("t", "l", arity=1),
            NeuronSum("sum", "l", arity=1),
            Sink("out", "output"),
        ]
        channels = [
            Channel("s", 0, "ne", 0),
            Channel("ne", 0, "t", 0),
            Channel("t", 0, "sum", 0),
            Channel("sum", 0, "out", 0),
        ]
        return ActorGraph("g", tuple(actors), tuple(channels), layers=("l",))

    def test_valid(self):
        self.base().validate()

    def test_unknown_endpoint(self):
        graph = self.base()
        broken = graph.with_contents(graph.actors, graph.channels + (Channel("t", 0, "ghost", 0),))
        with pytest.raises(GraphError, match="unknown actor 'ghost'"):
            broken.validate()

    def test_unconnected_input_port(self):
        graph = self.base()
        broken = graph.with_contents(graph.actors, graph.channels[:-1])
        with pytest.raises(GraphError, match="'out' expects input ports"):
            broken.validate()

    def test_output_port_range(self):
        graph = self.base()
        channels = list(graph.channels)
        channels[1] = Channel("ne", 1, "t", 0)
        with pytest.raises(GraphError, match="output port"):
            graph.with_contents(graph.actors, channels).validate()

    def test_duplicate_id(self):
        graph = self.base()
        with pytest.raises(GraphError, match="duplicate actor id"):
            graph.with_contents(graph.actors + (Sink("out", "output"),), graph.channels).validate()

    def test_cycle(self):
        actors = [AdderTree("a", "l", arity=1), AdderTree("b", "l", arity=1)]
        channels = [Channel("a", 0, "b", 0), Channel("b", 0, "a", 0)]
        with pytest.raises(GraphError, match="cycle"):
            ActorGraph("g", tuple(actors), tuple(channels)).validate()


class TestMemoryFootprint:
    def alexnet_conv1(self, nef):
        model = single_conv_model(96, 3, 11, height=227, width=227, stride=4, name="alexnet")
        return build_actor_graph(quantized(model, fill=zero_weights, bias_fill=0.0), nef=nef)

    def test_alexnet_conv1_window_only(self):
        without = memory_footprint(self.alexnet_conv1(False), MemoryMode.WINDOW_ONLY, 8)["conv1"]
        shared = memory_footprint(self.alexnet_conv1(True), MemoryMode.WINDOW_ONLY, 8)["conv1"]
        assert without // 8 == 34848
        assert shared // 8 == 363
        assert without == 96 * shared

    def test_architectural_mode_counts_line_buffers(self):
        model = single_conv_model(2, 1, 3, height=8, width=8)
        graph = build_actor_graph(quantized(model))
        assert memory_footprint(graph, MemoryMode.ARCHITECTURAL, 8)["conv1"] == (2 * 8 + 9) * 8

    def test_nef_ratio_equals_neuron_count(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n, c = int(rng.integers(1, 5)), int(rng.integers(1, 4))
            k = int(rng.choice([1, 3, 5]))
            size = int(rng.integers(k, k + 6))
            qm = quantized(single_conv_model(n, c, k, height=size, width=size), fill=zero_weights, bias_fill=0.0)
            mode = MemoryMode.WINDOW_ONLY if rng.random() < 0.5 else MemoryMode.ARCHITECTURAL
            without = memory_footprint(build_actor_graph(qm, nef=False), mode, 8)["conv1"]
            shared = memory_footprint(build_actor_graph(qm, nef=True), mode, 8)["conv1"]
            assert without == n * shared


class TestDot:
    def test_dot_lists_every_actor_and_channel(self):
        qm = quantized(single_conv_model(1, 1, 3, height=5, width=5), rng=np.random.default_rng(0))
        graph = build_actor_graph(qm)
        dot = to_dot(graph)
        assert dot.startswith('digraph "single"')
        for actor in graph.actors:
            assert f'"{actor.id}"' in dot
        assert dot.count("->") == len(graph.channels)
        assert 'subgraph "cluster_conv1"' in dot
