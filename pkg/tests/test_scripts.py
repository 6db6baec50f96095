"""Tests for the weights helper scripts."""

from pathlib import Path

import numpy as np
import pytest

from scripts.npz_to_hdw import attach_parameters
from scripts.random_weights import synthetic_model
from src.errors import CnnDhmError
from src.model import load_weights, parse_topology, write_weights
from src.quant import quantize_model
from src.specialize import kernel_statistics

MODELS = Path(__file__).resolve().parent.parent / "models"


def lenet():
    return parse_topology((MODELS / "lenet5.prototxt").read_text(encoding="utf-8"))


class TestAttachParameters:
    def test_accepts_both_key_styles(self):
        model = lenet()
        archive = {
            "conv1/weights": np.ones((20, 1, 5, 5)),
            "conv1/biases": np.zeros(20),
            "conv2_w": np.ones(50 * 20 * 25),
            "conv2_b": np.ones(50),
        }
        filled = attach_parameters(model, archive)
        assert filled.has_weights
        assert filled.layer("conv2").weights.shape == (50, 20, 5, 5)

    def test_missing_bias_becomes_zeros(self):
        archive = {"conv1_w": np.ones((20, 1, 5, 5)), "conv2_w": np.ones((50, 20, 5, 5))}
        filled = attach_parameters(lenet(), archive)
        assert not filled.layer("conv1").biases.any()

    def test_wrong_size(self):
        archive = {"conv1_w": np.ones(10), "conv2_w": np.ones((50, 20, 5, 5))}
        with pytest.raises(CnnDhmError, match="expected shape"):
            attach_parameters(lenet(), archive)

    def test_missing_weights(self):
        with pytest.raises(CnnDhmError, match="no weights for layer 'conv1'"):
            attach_parameters(lenet(), {})


class TestSyntheticModel:
    def test_seeded_and_loadable(self):
        first = synthetic_model(lenet(), seed=4)
        second = synthetic_model(lenet(), seed=4)
        np.testing.assert_array_equal(first.layer("conv2").weights, second.layer("conv2").weights)
        loaded = load_weights(write_weights(first), lenet())
        np.testing.assert_array_equal(loaded.layer("conv1").weights, first.layer("conv1").weights)

    def test_zero_weights(self):
        qm = quantize_model(synthetic_model(lenet(), zeros=True), 5)
        assert kernel_statistics(qm).total.counts.fractions()["zero"] == 1
