"""Fixed-point reference model evaluated with plain nested loops.

All arithmetic uses Python integers, so accumulators never overflow.
Each layer is applied on its own; an activation following a convolution
is a separate step here even though the hardware fuses the two.
"""

import numpy as np

from src.logger import setup_logger
from src.model.base import Activation, Conv, FullyConnected, Pool, PoolMode
from src.model.validate import layer_shapes
from src.quant.activation import activate
from src.quant.fixed_point import divide_round, rescale
from src.quant.quantizer import QuantizedModel
from .base import SimulationError
from .streams import FeatureMaps, PixelStream

logger = setup_logger()

Maps = list[list[list[int]]]


def _conv(x: Maps, kind: Conv, weights, biases, acc_frac, out_fmt, out_shape) -> Maps:
    n_out, rows, cols = out_shape
    channels, height, width = len(x), len(x[0]), len(x[0][0])
    k, s, pad = kind.kernel, kind.stride, kind.pad
    out = []
    for n in range(n_out):
        plane = []
        for i in range(rows):
            line = []
            for j in range(cols):
                acc = int(biases[n])
                for c in range(channels):
                    for p in range(k):
                        y = i * s + p - pad
                        if y < 0 or y >= height:
                            continue
                        for q in range(k):
                            xx = j * s + q - pad
                            if 0 <= xx < width:
                                acc += x[c][y][xx] * int(weights[n][c][p][q])
                line.append(rescale(acc, acc_frac, out_fmt))
            plane.append(line)
        out.append(plane)
    return out


def _pool(x: Maps, kind: Pool, out_shape) -> Maps:
    _, rows, cols = out_shape
    k, s = kind.kernel, kind.stride
    out = []
    for plane in x:
        pooled = []
        for i in range(rows):
            line = []
            for j in range(cols):
                window = [plane[i * s + p][j * s + q] for p in range(k) for q in range(k)]
                if kind.mode is PoolMode.MAX:
                    line.append(max(window))
                else:
                    line.append(divide_round(sum(window), k * k))
            pooled.append(line)
        out.append(pooled)
    return out


def _fully_connected(x: Maps, weights, biases, acc_frac, out_fmt) -> Maps:
    flat = [v for plane in x for line in plane for v in line]
    out = []
    for n, row in enumerate(weights):
        acc = int(biases[n]) + sum(v * int(w) for v, w in zip(flat, row))
        out.append([[rescale(acc, acc_frac, out_fmt)]])
    return out


def golden_inference(qm: QuantizedModel, image: PixelStream) -> dict[str, FeatureMaps]:
    """Evaluate every layer of a quantized model on one frame.

    Args:
        qm: Quantized model (conv, pool, activation and FC layers)
        image: Input frame in the model's input format

    Returns:
        Output feature maps per layer name, in layer order

    Raises:
        SimulationError: image shape or format does not match the model
    """
    model = qm.model
    if image.shape != tuple(model.input_shape):
        raise SimulationError(f"image shape {image.shape} does not match model input {tuple(model.input_shape)}")
    if image.fmt != qm.input_format:
        raise SimulationError(f"image is in {image.fmt}, model input expects {qm.input_format}")

    shapes = layer_shapes(model)
    x: Maps = image.data.tolist()
    results = {}
    for spec in model.layers:
        kind = spec.kind
        formats = qm.formats[spec.name]
        out_shape = shapes[spec.name][1]
        if isinstance(kind, Conv):
            x = _conv(x, kind, qm.int_weights[spec.name].tolist(), qm.bias_in_accumulator(spec.name).tolist(),
                      formats.acc_frac, formats.output, out_shape)
        elif isinstance(kind, Pool):
            x = _pool(x, kind, out_shape)
        elif isinstance(kind, Activation):
            x = [[[activate(kind.fn, v, formats.output) for v in line] for line in plane] for plane in x]
        elif isinstance(kind, FullyConnected):
            x = _fully_connected(x, qm.int_weights[spec.name].tolist(), qm.bias_in_accumulator(spec.name).tolist(),
                                 formats.acc_frac, formats.output)
        else:
            raise SimulationError(f"layer '{spec.name}' has unknown kind {type(kind).__name__}")
        results[spec.name] = FeatureMaps(np.array(x, dtype=np.int64), formats.output)
    logger.debug(f"golden model evaluated {len(results)} layers of '{model.name}'")
    return results
