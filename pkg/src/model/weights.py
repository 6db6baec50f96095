"""Reader and writer for the ``.hdw`` weights container.

Layout (see docs/format-weights.md)::

    HDW 1\\n
    <layer> <param> <d0,d1,...> <byte offset>\\n     one line per record
    END\\n
    <little-endian float32 data, row-major>

Offsets are relative to the first byte after the ``END`` line. Layer
names holding whitespace or quotes are shell-quoted.
"""

import shlex
from dataclasses import dataclass

import numpy as np

from src.logger import setup_logger
from .base import CnnModel, WeightsError
from .validate import expected_weight_shape, layer_shapes

logger = setup_logger()

MAGIC = "HDW 1"
_END = b"END\n"
_PARAMS = ("weights", "biases")
_DTYPE = np.dtype("<f4")


@dataclass(frozen=True)
class WeightRecord:
    layer: str
    param: str
    dims: tuple[int, ...]
    offset: int

    @property
    def count(self) -> int:
        return int(np.prod(self.dims))


def read_manifest(container: bytes) -> tuple[dict[tuple[str, str], WeightRecord], memoryview]:
    """Split a container into its record table and its data section."""
    end = container.find(b"\n" + _END)
    if not container.startswith(MAGIC.encode() + b"\n") or end < 0:
        raise WeightsError(f"not a weights container: expected '{MAGIC}' header and 'END' line")
    try:
        header = container[:end].decode("utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise WeightsError(f"weights header is not UTF-8: {e}") from e

    records = {}
    for number, line in enumerate(header[1:], start=2):
        try:
            parts = shlex.split(line)
        except ValueError as e:
            raise WeightsError(f"header line {number}: {e} in {line!r}") from None
        if not parts:
            continue
        if len(parts) != 4 or parts[1] not in _PARAMS:
            raise WeightsError(f"header line {number}: expected '<layer> weights|biases <dims> <offset>', got {line!r}")
        layer, param, dims_text, offset_text = parts
        try:
            dims = tuple(int(d) for d in dims_text.split(","))
            offset = int(offset_text)
        except ValueError:
            raise WeightsError(f"header line {number}: malformed dims or offset in {line!r}") from None
        if min(dims) < 0 or offset < 0 or offset % _DTYPE.itemsize:
            raise WeightsError(f"header line {number}: negative dims or misaligned offset in {line!r}")
        if (layer, param) in records:
            raise WeightsError(f"header line {number}: duplicate record for {layer} {param}")
        records[(layer, param)] = WeightRecord(layer, param, dims, offset)

    data = memoryview(container)[end + 1 + len(_END):]
    return records, data


def _read_array(record: WeightRecord, data: memoryview, expected_count: int) -> np.ndarray:
    if record.count != expected_count:
        raise WeightsError(
            f"layer '{record.layer}' {record.param}: container holds {record.count} values, "
            f"expected {expected_count}"
        )
    stop = record.offset + record.count * _DTYPE.itemsize
    if stop > len(data):
        raise WeightsError(
            f"layer '{record.layer}' {record.param}: data truncated "
            f"(needs bytes {record.offset}..{stop}, container has {len(data)})"
        )
    values = np.frombuffer(data[record.offset:stop], dtype=_DTYPE).astype(np.float32)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise WeightsError(
            f"layer '{record.layer}' {record.param}: non-finite value {values[bad[0]]} "
            f"at flat index {int(bad[0])}"
        )
    return values


def load_weights(container: bytes, model: CnnModel) -> CnnModel:
    """Attach float weights and biases from a container to a parsed model.

    Args:
        container: Raw bytes of a ``.hdw`` file
        model: Weightless model from parse_topology

    Returns:
        Copy of the model with every Conv/FC layer populated

    Raises:
        WeightsError: missing record, element-count mismatch, truncated data
            or a NaN/Inf value (the message names layer and flat index)
    """
    records, data = read_manifest(container)
    shapes = layer_shapes(model)
    layers = []
    used = set()
    for spec in model.layers:
        if not spec.is_parameterized:
            layers.append(spec)
            continue
        shape = expected_weight_shape(spec.kind, shapes[spec.name][0])
        record = records.get((spec.name, "weights"))
        if record is None:
            raise WeightsError(f"missing weights record for layer '{spec.name}'")
        weights = _read_array(record, data, int(np.prod(shape))).reshape(shape)
        used.add((spec.name, "weights"))

        biases = None
        if spec.has_bias:
            record = records.get((spec.name, "biases"))
            if record is None:
                raise WeightsError(f"missing biases record for layer '{spec.name}'")
            biases = _read_array(record, data, spec.kind.num_output)
            used.add((spec.name, "biases"))
        layers.append(spec.with_params(weights, biases))

    for layer, param in sorted(set(records) - used):
        logger.warning(f"weights container: unused record {layer} {param}")

    return model.replace_layers(layers)


def write_weights(model: CnnModel) -> bytes:
    """Serialize the float parameters of a weighted model into a container."""
    lines = [MAGIC]
    chunks = []
    offset = 0
    for spec in model.parameterized_layers:
        if "\n" in spec.name or "\r" in spec.name:
            raise WeightsError(f"layer name {spec.name!r} contains a line break")
        params = [("weights", spec.weights)]
        if spec.has_bias:
            params.append(("biases", spec.biases))
        for param, values in params:
            if values is None:
                raise WeightsError(f"layer '{spec.name}' has no {param} to write")
            array = np.ascontiguousarray(values, dtype=_DTYPE)
            dims = ",".join(str(d) for d in array.shape)
            lines.append(f"{shlex.quote(spec.name)} {param} {dims} {offset}")
            chunks.append(array.tobytes())
            offset += array.nbytes
    header = ("\n".join(lines) + "\n").encode("utf-8") + _END
    return header + b"".join(chunks)
