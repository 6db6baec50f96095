"""Tests for the .hdw weights container."""

import numpy as np
import pytest

from src.model import WeightsError, load_weights, parse_topology, write_weights
from src.model.weights import MAGIC, read_manifest
from tests.model_factory import conv, make_model, pool, with_weights


def lenet_conv1():
    return make_model((1, 28, 28), [conv("conv1", 20, 1, 5), pool("pool1")], name="lenet")


def container(records: list[tuple[str, str, np.ndarray]]) -> bytes:
    lines = [MAGIC]
    data = b""
    for layer, param, values in records:
        values = np.asarray(values, dtype="<f4")
        lines.append(f"{layer} {param} {','.join(str(d) for d in values.shape)} {len(data)}")
        data += values.tobytes()
    return ("\n".join(lines) + "\nEND\n").encode() + data


class TestLoadWeights:
    def test_accepts_exact_count(self):
        model = lenet_conv1()
        blob = container([("conv1", "weights", np.ones(500)), ("conv1", "biases", np.zeros(20))])
        loaded = load_weights(blob, model)
        assert loaded.layer("conv1").weights.shape == (20, 1, 5, 5)
        assert loaded.layer("conv1").biases.shape == (20,)
        assert loaded.has_weights

    def test_rejects_off_by_one(self):
        blob = container([("conv1", "weights", np.ones(499)), ("conv1", "biases", np.zeros(20))])
        with pytest.raises(WeightsError, match="holds 499 values, expected 500"):
            load_weights(blob, lenet_conv1())

    def test_rejects_nan_with_index(self):
        values = np.ones(500)
        values[123] = np.nan
        blob = container([("conv1", "weights", values), ("conv1", "biases", np.zeros(20))])
        with pytest.raises(WeightsError) as info:
            load_weights(blob, lenet_conv1())
        assert "conv1" in str(info.value)
        assert "flat index 123" in str(info.value)

    def test_rejects_infinite_bias(self):
        biases = np.zeros(20)
        biases[0] = np.inf
        blob = container([("conv1", "weights", np.ones(500)), ("conv1", "biases", biases)])
        with pytest.raises(WeightsError, match="non-finite"):
            load_weights(blob, lenet_conv1())

    def test_missing_record(self):
        blob = container([("conv1", "weights", np.ones(500))])
        with pytest.raises(WeightsError, match="missing biases record for layer 'conv1'"):
            load_weights(blob, lenet_conv1())

    def test_no_bias_layer_needs_no_bias_record(self):
        model = make_model((1, 8, 8), [conv("c", 2, 1, 3, bias=False)])
        loaded = load_weights(container([("c", "weights", np.ones(18))]), model)
        assert loaded.layer("c").biases is None
        assert loaded.has_weights

    def test_truncated_data(self):
        blob = container([("conv1", "weights", np.ones(500)), ("conv1", "biases", np.zeros(20))])
        with pytest.raises(WeightsError, match="truncated"):
            load_weights(blob[:-8], lenet_conv1())

    def test_bad_magic(self):
        with pytest.raises(WeightsError, match="not a weights container"):
            load_weights(b"NOPE\nEND\n", lenet_conv1())

    def test_unused_record_is_ignored(self):
        blob = container([
            ("conv1", "weights", np.ones(500)),
            ("conv1", "biases", np.zeros(20)),
            ("conv9", "weights", np.ones(3)),
        ])
        assert load_weights(blob, lenet_conv1()).has_weights


class TestWriteWeights:
    def test_written_container_loads_back(self):
        model = with_weights(lenet_conv1(), np.random.default_rng(3))
        loaded = load_weights(write_weights(model), model.without_weights())
        np.testing.assert_array_equal(loaded.layer("conv1").weights, model.layer("conv1").weights)
        np.testing.assert_array_equal(loaded.layer("conv1").biases, model.layer("conv1").biases)

    def test_manifest_lists_every_record(self):
        model = with_weights(lenet_conv1(), np.random.default_rng(3))
        records, data = read_manifest(write_weights(model))
        assert set(records) == {("conv1", "weights"), ("conv1", "biases")}
        assert records[("conv1", "weights")].dims == (20, 1, 5, 5)
        assert records[("conv1", "biases")].offset == 500 * 4
        assert len(data) == 520 * 4

    def test_fully_connected_layout(self):
        text = """
        input_shape { dim: 2 dim: 3 dim: 3 }
        layer { name: "f" type: "InnerProduct" inner_product_param { num_output: 4 } }
        """
        model = with_weights(parse_topology(text), np.random.default_rng(1))
        records, _ = read_manifest(write_weights(model))
        assert records[("f", "weights")].dims == (4, 18)

    def test_layer_name_with_spaces_round_trips(self):
        text = """
        input_shape { dim: 1 dim: 1 dim: 6 dim: 6 }
        layer { name: "conv 1" type: "Convolution" convolution_param { num_output: 1 kernel_size: 3 } }
        layer { name: "it's" type: "Convolution" convolution_param { num_output: 1 kernel_size: 3 } }
        """
        model = with_weights(parse_topology(text), np.random.default_rng(2))
        blob = write_weights(model)
        assert set(read_manifest(blob)[0]) == {
            ("conv 1", "weights"), ("conv 1", "biases"), ("it's", "weights"), ("it's", "biases"),
        }
        loaded = load_weights(blob, model.without_weights())
        np.testing.assert_array_equal(loaded.layer("conv 1").weights, model.layer("conv 1").weights)
        np.testing.assert_array_equal(loaded.layer("it's").biases, model.layer("it's").biases)

    def test_unbalanced_quote_in_header(self):
        blob = f"{MAGIC}\n'conv1 weights 1 0\nEND\n".encode() + np.zeros(1, dtype="<f4").tobytes()
        with pytest.raises(WeightsError, match="header line 2"):
            read_manifest(blob)
