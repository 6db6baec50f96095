"""Write a synthetic .hdw weights container for a topology.

Useful to exercise compile/simulate/estimate on the reference topologies
without trained parameters.

Usage:
    python -m scripts.random_weights models/lenet5.prototxt -o lenet5.hdw --seed 1
    python -m scripts.random_weights models/lenet5.prototxt -o zeros.hdw --zeros
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


def synthetic_model(model, seed: int = 0, scale: float = 0.25, zeros: bool = False):
    """Fill every parameterized layer with N(0, scale) values (or zeros)."""
    rng = np.random.default_rng(seed)
    shapes = layer_shapes(model)
    layers = []
    for spec in model.layers:
        if not spec.is_parameterized:
            layers.append(spec)
            continue
        shape = expected_weight_shape(spec.kind, shapes[spec.name][0])
        if zeros:
            weights = np.zeros(shape, dtype=np.float32)
        else:
            weights = rng.normal(0.0, scale, size=shape).astype(np.float32)
        biases = None
        if spec.has_bias:
            biases = np.zeros(spec.kind.num_output, dtype=np.float32) if zeros \
                else rng.normal(0.0, scale, size=spec.kind.num_output).astype(np.float32)
        layers.append(spec.with_params(weights, biases))
    return model.replace_layers(layers)


def main():
    parser = argparse.ArgumentParser(description="Generate synthetic weights for a topology")
    parser.add_argument("topology", help="Topology file")
    parser.add_argument("-o", "--output", required=True, help="Output .hdw file")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("--scale", type=float, default=0.25, help="Standard deviation (default: 0.25)")
    parser.add_argument("--zeros", action="store_true", help="Write all-zero parameters")
    args = parser.parse_args()

    try:
        model = parse_topology(Path(args.topology).read_text(encoding="utf-8"))
        model = synthetic_model(model, seed=args.seed, scale=args.scale, zeros=args.zeros)
        Path(args.output).write_bytes(write_weights(model))
    except (CnnDhmError, OSError) as e:
        logger.error(str(e))
        sys.exit(1)
    logger.info(f"Wrote synthetic weights for '{model.name}' to {args.output}")


if __name__ == "__main__":
    main()
