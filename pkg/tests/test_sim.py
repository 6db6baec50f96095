"""Tests for the line buffer, the golden model and the stream simulator."""

import numpy as np
import pytest

from src.graph import (
    ActorGraph,
    AdderTree,
    Channel,
    NeighborhoodExtractor,
    Sink,
    Source,
    build_actor_graph,
)
from src.model.base import PoolMode
from src.quant import FixedPointFormat
from src.sim import (
    DeadlockError,
    FeatureMaps,
    LineBuffer,
    PixelStream,
    ReverseScheduler,
    RoundRobinScheduler,
    SimulationError,
    compare,
    expected_firings,
    golden_inference,
    load_image,
    load_real_image,
    random_image,
    read_pgm,
    read_raw,
    simulate,
    warmup_tokens,
    write_raw,
)
from src.specialize import specialize
from tests.model_factory import (
    conv,
    fc,
    image_for,
    make_model,
    pool,
    quantized,
    random_model,
    single_conv_model,
)


def random_corpus(seed, count=100):
    """Seeded (quantized model, image, nef) triples at 5 or 8 bits."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        model = random_model(rng)
        qm = quantized(model, bits=int(rng.choice([5, 8])), rng=rng)
        image = image_for(qm, seed=int(rng.integers(1 << 30)))
        yield qm, image, bool(rng.integers(0, 2))


def first_window_index(buffer, count):
    for index in range(count):
        if buffer.push(index):
            return index
    return None


def numpy_conv(qm, layer, x):
    """Independent requantized convolution: int64 windows, half-away rounding, saturation."""
    kind = qm.model.layer(layer).kind
    formats = qm.formats[layer]
    weights = qm.int_weights[layer].astype(np.int64)
    k, s, pad = kind.kernel, kind.stride, kind.pad
    padded = np.pad(x.astype(np.int64), ((0, 0), (pad, pad), (pad, pad)))
    rows = (padded.shape[1] - k) // s + 1
    cols = (padded.shape[2] - k) // s + 1
    acc = np.zeros((kind.num_output, rows, cols), dtype=np.int64)
    for i in range(rows):
        for j in range(cols):
            window = padded[:, i * s:i * s + k, j * s:j * s + k]
            acc[:, i, j] = np.einsum("nchw,chw->n", weights, window)
    acc += qm.bias_in_accumulator(layer).astype(np.int64)[:, None, None]
    shift = formats.acc_frac - formats.output.frac_bits
    if shift > 0:
        magnitude = (np.abs(acc) + (1 << (shift - 1))) >> shift
        acc = np.where(acc < 0, -magnitude, magnitude)
    else:
        acc = acc << -shift
    return np.clip(acc, formats.output.min_raw, formats.output.max_raw)


class TestLineBuffer:
    def test_warmup_3x3_on_width_8(self):
        assert warmup_tokens(3, 8) == 18
        assert first_window_index(LineBuffer(3, 8, 8), 64) == 18

    @pytest.mark.parametrize("kernel", [1, 3, 5, 7])
    def test_warmup_formula(self, kernel):
        assert first_window_index(LineBuffer(kernel, 9, 9), 81) == warmup_tokens(kernel, 9)

    def test_windows_match_slices(self):
        image = np.arange(30).reshape(5, 6)
        buffer = LineBuffer(3, 6, 5)
        windows = [w for v in image.reshape(-1) for w in buffer.push(int(v))]
        expected = [tuple(image[i:i + 3, j:j + 3].reshape(-1)) for i in range(3) for j in range(4)]
        assert windows == expected

    def test_padding_injects_zeros(self):
        image = np.arange(1, 17).reshape(4, 4)
        buffer = LineBuffer(3, 4, 4, pad=1)
        windows = [w for v in image.reshape(-1) for w in buffer.push(int(v))]
        assert len(windows) == 16
        assert windows[0] == (0, 0, 0, 0, 1, 2, 0, 5, 6)
        assert windows[-1] == (11, 12, 0, 15, 16, 0, 0, 0, 0)

    def test_stride(self):
        buffer = LineBuffer(3, 7, 7, stride=2)
        windows = [w for v in range(49) for w in buffer.push(v)]
        assert len(windows) == 9
        assert windows[1][0] == 2

    def test_resets_between_frames(self):
        buffer = LineBuffer(2, 3, 3)
        first = [w for v in range(9) for w in buffer.push(v)]
        second = [w for v in range(9) for w in buffer.push(v)]
        assert first == second

    def test_window_must_fit(self):
        with pytest.raises(SimulationError):
            LineBuffer(5, 3, 3)


class TestGoldenModel:
    def test_half_weight_pointwise_conv(self):
        model = single_conv_model(1, 1, 1, height=4, width=4, bias=False)
        qm = quantized(model, fill=lambda n, s: np.full(s, 0.5))
        image = image_for(qm, seed=3)
        out = golden_inference(qm, image)["conv1"].data
        x = image.data
        expected = np.where(x < 0, -((-x + 1) >> 1), (x + 1) >> 1)
        np.testing.assert_array_equal(out, expected)

    def test_max_pool_of_constant_image(self):
        model = make_model((2, 6, 6), [pool("p1")])
        qm = quantized(model)
        image = PixelStream(np.full((2, 6, 6), -17, dtype=np.int64), qm.input_format)
        out = golden_inference(qm, image)["p1"]
        assert out.shape == (2, 3, 3)
        assert (out.data == -17).all()

    def test_average_pool_rounds_half_away(self):
        model = make_model((1, 2, 2), [pool("p1", mode=PoolMode.AVG)])
        qm = quantized(model)
        image = PixelStream(np.array([[[1, 2], [3, 4]]]), qm.input_format)
        assert golden_inference(qm, image)["p1"].data.tolist() == [[[3]]]
        image = PixelStream(np.array([[[-1, -2], [-3, -4]]]), qm.input_format)
        assert golden_inference(qm, image)["p1"].data.tolist() == [[[-3]]]

    def test_matches_numpy_convolution(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n, c = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            k = int(rng.choice([1, 3, 5]))
            pad = int(rng.integers(0, k // 2 + 1))
            stride = int(rng.choice([1, 2]))
            size = int(rng.integers(k, k + 5))
            bits = int(rng.choice([5, 8, 12]))
            model = single_conv_model(n, c, k, height=size, width=size, stride=stride, pad=pad)
            qm = quantized(model, bits=bits, rng=rng)
            image = image_for(qm, seed=int(rng.integers(1 << 30)))
            out = golden_inference(qm, image)["conv1"].data
            np.testing.assert_array_equal(out, numpy_conv(qm, "conv1", image.data))

    def test_fully_connected_shape(self):
        model = make_model((1, 4, 4), [conv("c1", 2, 1, 3), fc("f1", 3, 2)])
        qm = quantized(model, rng=np.random.default_rng(4))
        out = golden_inference(qm, image_for(qm))
        assert out["f1"].shape == (3, 1, 1)
        assert list(out) == ["c1", "f1"]

    def test_rejects_wrong_image(self):
        qm = quantized(single_conv_model(1, 1, 3), rng=np.random.default_rng(0))
        with pytest.raises(SimulationError, match="shape"):
            golden_inference(qm, random_image((1, 5, 5), qm.input_format, 0))
        with pytest.raises(SimulationError, match="expects"):
            golden_inference(qm, random_image((1, 8, 8), FixedPointFormat(8, 3), 0))


class TestSimulate:
    def test_random_models_match_golden(self):
        for qm, image, nef in random_corpus(1234):
            last = qm.model.layers[-1].name
            expected = golden_inference(qm, image)[last]
            result = simulate(build_actor_graph(qm, nef=nef), image)
            report = compare(result.output, expected)
            assert report.exact, report.summary()

    def test_specialized_graph_is_bit_identical(self):
        for qm, image, nef in random_corpus(77):
            graph = build_actor_graph(qm, nef=nef)
            plain = simulate(graph, image).output.data
            special = simulate(specialize(graph), image).output.data
            np.testing.assert_array_equal(plain, special)

    def test_all_zero_kernels_emit_bias_only(self):
        model = single_conv_model(2, 2, 3, height=6, width=6)
        qm = quantized(model, fill=lambda n, s: np.zeros(s), bias_fill=0.25)
        image = image_for(qm, seed=5)
        result = simulate(specialize(build_actor_graph(qm)), image)
        golden = golden_inference(qm, image)["conv1"]
        assert compare(result.output, golden).exact
        assert (result.output.data == result.output.data[0, 0, 0]).all()

    def test_schedulers_agree(self):
        qm = quantized(single_conv_model(2, 2, 3, pad=1), rng=np.random.default_rng(6))
        graph = build_actor_graph(qm)
        image = image_for(qm, seed=2)
        forward = simulate(graph, image, RoundRobinScheduler())
        backward = simulate(graph, image, ReverseScheduler())
        np.testing.assert_array_equal(forward.output.data, backward.output.data)
        assert forward.firings == backward.firings

    def test_firings_and_warmup(self):
        qm = quantized(single_conv_model(2, 1, 3), rng=np.random.default_rng(6))
        graph = build_actor_graph(qm)
        result = simulate(graph, image_for(qm))
        assert result.firings == expected_firings(graph)
        assert result.firings["input/c0"] == 64
        assert result.firings["conv1/n0/c0/m0"] == 36
        assert result.firings["output/f1"] == 36
        assert result.warmup["conv1/ne0"] == 18
        assert result.max_occupancy >= 1

    def test_wrong_image_shape(self):
        qm = quantized(single_conv_model(1, 1, 3), rng=np.random.default_rng(0))
        with pytest.raises(SimulationError, match="does not match"):
            simulate(build_actor_graph(qm), random_image((1, 9, 9), qm.input_format, 0))

    def test_deadlock_names_the_actor(self):
        actors = (
            Source("s", "input"),
            NeighborhoodExtractor("ne", "l", kernel=3, image_width=3, image_height=3),
            AdderTree("t", "l", arity=2),
            Sink("out", "output"),
        )
        channels = (
            Channel("s", 0, "ne", 0),
            Channel("s", 0, "t", 0),
            Channel("ne", 0, "t", 1),
            Channel("t", 0, "out", 0),
        )
        graph = ActorGraph("stalled", actors, channels, layers=("l",), input_shape=(1, 3, 3),
                           output_shape=(1, 1, 1))
        image = PixelStream(np.ones((1, 3, 3), dtype=np.int64), FixedPointFormat(8, 7))
        with pytest.raises(DeadlockError, match="deadlock at actor 't'") as info:
            simulate(graph, image)
        assert info.value.actor == "t"


class TestCompare:
    fmt = FixedPointFormat(8, 7)

    def maps(self, data):
        return FeatureMaps(np.array(data, dtype=np.int64), self.fmt)

    def test_exact(self):
        report = compare(self.maps([[[1, 2]]]), self.maps([[[1, 2]]]))
        assert report.exact
        assert report.summary() == "exact match"

    def test_mismatch(self):
        report = compare(self.maps([[[1, 2], [3, 9]]]), self.maps([[[1, 2], [3, 4]]]))
        assert not report.exact
        assert report.mismatches == 1
        assert report.max_abs_diff == 5
        assert report.first_mismatch == (0, 1, 1)
        assert report.to_dict()["first_mismatch"] == [0, 1, 1]

    def test_shape_mismatch_is_reported(self):
        report = compare(self.maps([[[1, 2]]]), self.maps([[[1], [2]]]))
        assert not report.shape_match
        assert report.summary().startswith("shape mismatch")

    def test_format_mismatch(self):
        other = FeatureMaps(np.array([[[1]]]), FixedPointFormat(8, 3))
        report = compare(self.maps([[[1]]]), other)
        assert not report.exact
        assert not report.format_match


class TestStreams:
    def test_raw_round_trip(self, tmp_path):
        fmt = FixedPointFormat(8, 5)
        image = random_image((2, 3, 4), fmt, seed=9)
        raw, header = write_raw(image.data, fmt, tmp_path / "img")
        assert raw.suffix == ".raw" and header.suffix == ".json"
        data, read_fmt = read_raw(raw)
        assert read_fmt == fmt
        np.testing.assert_array_equal(data, image.data)
        assert raw.stat().st_size == 2 * 3 * 4 * 4

    def test_load_image_checks_format(self, tmp_path):
        fmt = FixedPointFormat(8, 5)
        write_raw(random_image((1, 3, 3), fmt, seed=1).data, fmt, tmp_path / "img")
        assert load_image(tmp_path / "img.raw", fmt).shape == (1, 3, 3)
        with pytest.raises(SimulationError, match="stored in"):
            load_image(tmp_path / "img.raw", FixedPointFormat(8, 7))

    def test_real_image_from_raw_and_pgm(self, tmp_path):
        fmt = FixedPointFormat(8, 4)
        write_raw(np.array([[16, -8], [0, 3]]), fmt, tmp_path / "img")
        np.testing.assert_array_equal(load_real_image(tmp_path / "img.raw"), [[[1.0, -0.5], [0.0, 0.1875]]])
        path = tmp_path / "img.pgm"
        path.write_text("P2\n2 1\n4\n1 4\n", encoding="ascii")
        np.testing.assert_array_equal(load_real_image(path), [[[0.25, 1.0]]])

    def test_truncated_raw(self, tmp_path):
        fmt = FixedPointFormat(8, 5)
        raw, _ = write_raw(np.zeros((1, 2, 2), dtype=np.int64), fmt, tmp_path / "img")
        raw.write_bytes(raw.read_bytes()[:-4])
        with pytest.raises(SimulationError, match="header declares"):
            read_raw(raw)

    def test_ascii_pgm_with_comment(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_text("P2\n# made by hand\n2 2\n255\n0 255\n255 0\n", encoding="ascii")
        image = read_pgm(path, FixedPointFormat(8, 7))
        assert image.data.tolist() == [[[0, 127], [127, 0]]]

    def test_binary_pgm(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 1\n255\n" + bytes([0, 128]))
        assert read_pgm(path, FixedPointFormat(8, 7)).data.tolist() == [[[0, 64]]]

    def test_truncated_pgm(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([1]))
        with pytest.raises(SimulationError, match="truncated"):
            read_pgm(path, FixedPointFormat(8, 7))

    def test_stream_range_is_checked(self):
        with pytest.raises(SimulationError, match="outside"):
            PixelStream(np.array([[[200]]]), FixedPointFormat(8, 7))

    def test_random_image_is_seeded(self):
        fmt = FixedPointFormat(6, 2)
        first = random_image((1, 4, 4), fmt, seed=3).data
        np.testing.assert_array_equal(first, random_image((1, 4, 4), fmt, seed=3).data)
        assert first.min() >= fmt.min_raw and first.max() <= fmt.max_raw

    def test_tokens_are_raster_ordered(self):
        stream = PixelStream(np.arange(12).reshape(2, 2, 3), FixedPointFormat(8, 0))
        assert len(stream) == 6
        assert list(stream.tokens())[:2] == [(0, 6), (1, 7)]
