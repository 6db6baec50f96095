"""Floating-point forward pass, used to calibrate data formats."""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .base import Activation, ActivationFn, CnnModel, Conv, FullyConnected, ModelError, Pool, PoolMode


def _conv(x: np.ndarray, kind: Conv, weights: np.ndarray, biases: np.ndarray | None) -> np.ndarray:
    if kind.pad:
        x = np.pad(x, ((0, 0), (kind.pad, kind.pad), (kind.pad, kind.pad)))
    windows = sliding_window_view(x, (kind.kernel, kind.kernel), axis=(1, 2))
    windows = windows[:, ::kind.stride, ::kind.stride]
    out = np.einsum("chwpq,ncpq->nhw", windows, weights, optimize=True)
    if biases is not None:
        out = out + biases[:, None, None]
    return out


def _pool(x: np.ndarray, kind: Pool) -> np.ndarray:
    windows = sliding_window_view(x, (kind.kernel, kind.kernel), axis=(1, 2))
    windows = windows[:, ::kind.stride, ::kind.stride]
    if kind.mode is PoolMode.MAX:
        return windows.max(axis=(3, 4))
    return windows.mean(axis=(3, 4))


def float_inference(model: CnnModel, image: np.ndarray) -> list[np.ndarray]:
    """Run the model in float64 and return every layer's output.

    Args:
        model: Weighted model
        image: Real-valued input of shape (C, H, W)

    Returns:
        One array per layer, in model order
    """
    x = np.asarray(image, dtype=np.float64)
    if x.shape != tuple(model.input_shape):
        raise ModelError(f"image shape {x.shape} does not match model input {model.input_shape}")
    outputs = []
    for spec in model.layers:
        kind = spec.kind
        if isinstance(kind, Conv):
            x = _conv(x, kind, spec.weights.astype(np.float64),
                      None if spec.biases is None else spec.biases.astype(np.float64))
        elif isinstance(kind, Pool):
            x = _pool(x, kind)
        elif isinstance(kind, Activation):
            x = np.maximum(x, 0.0) if kind.fn is ActivationFn.RELU else np.tanh(x)
        elif isinstance(kind, FullyConnected):
            flat = spec.weights.astype(np.float64) @ x.reshape(-1)
            if spec.biases is not None:
                flat = flat + spec.biases
            x = flat.reshape(-1, 1, 1)
        outputs.append(x)
    return outputs
