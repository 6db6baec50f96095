"""Convert a NumPy .npz export of trained parameters into a .hdw container.

The archive must hold one array per parameter, keyed ``<layer>/weights``
and ``<layer>/biases`` (``<layer>_w`` / ``<layer>_b`` are accepted too).
Conv weights are [N][C][K][K]; fully connected weights [N][C*H*W].

Usage:
    python -m scripts.npz_to_hdw models/lenet5.prototxt lenet5.npz -o lenet5.hdw
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from src.errors import CnnDhmError
from src.logger import setup_logger
from src.model import layer_shapes, parse_topology, write_weights
from src.model.validate import expected_weight_shape

logger = setup_logger()

_SUFFIXES = {"weights": ("/weights", "_w"), "biases": ("/biases", "_b")}


def find_array(archive, layer: str, which: str) -> np.ndarray | None:
    for suffix in _SUFFIXES[which]:
        key = layer + suffix
        if key in archive:
            return np.asarray(archive[key], dtype=np.float32)
    return None


def attach_parameters(model, archive):
    """Return the model with every parameterized layer filled from the archive."""
    shapes = layer_shapes(model)
    layers = []
    for spec in model.layers:
        if not spec.is_parameterized:
            layers.append(spec)
            continue
        weights = find_array(archive, spec.name, "weights")
        if weights is None:
            raise CnnDhmError(f"archive has no weights for layer '{spec.name}'")
        shape = expected_weight_shape(spec.kind, shapes[spec.name][0])
        if weights.size != int(np.prod(shape)):
            raise CnnDhmError(
                f"layer '{spec.name}': archive holds {weights.size} weights, expected shape {shape}"
            )
        biases = find_array(archive, spec.name, "biases") if spec.has_bias else None
        if spec.has_bias and biases is None:
            logger.warning(f"layer '{spec.name}' declares a bias but the archive has none; using zeros")
            biases = np.zeros(spec.kind.num_output, dtype=np.float32)
        layers.append(spec.with_params(weights.reshape(shape), biases))
    return model.replace_layers(layers)


def main():
    parser = argparse.ArgumentParser(description="Convert .npz parameters into a .hdw weights container")
    parser.add_argument("topology", help="Topology file the parameters belong to")
    parser.add_argument("archive", help="Input .npz file")
    parser.add_argument("-o", "--output", required=True, help="Output .hdw file")
    args = parser.parse_args()

    try:
        model = parse_topology(Path(args.topology).read_text(encoding="utf-8"))
        with np.load(args.archive) as archive:
            model = attach_parameters(model, archive)
        Path(args.output).write_bytes(write_weights(model))
    except (CnnDhmError, OSError) as e:
        logger.error(str(e))
        sys.exit(1)
    logger.info(f"Wrote {len(model.parameterized_layers)} layer(s) to {args.output}")


if __name__ == "__main__":
    main()
