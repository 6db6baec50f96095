"""Pixel streams, feature maps and their file formats.

Raw planar files hold little-endian int32 values in [C][H][W] order; a
JSON sidecar with the same stem records shape and fixed-point format.
"""

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.quant.fixed_point import FixedPointFormat, dequantize, quantize_array
from .base import SimulationError

_RAW_DTYPE = np.dtype("<i4")


def _check_range(data: np.ndarray, fmt: FixedPointFormat, what: str) -> None:
    if data.size and (data.min() < fmt.min_raw or data.max() > fmt.max_raw):
        raise SimulationError(
            f"{what} holds values in [{data.min()}, {data.max()}], outside {fmt} range "
            f"[{fmt.min_raw}, {fmt.max_raw}]"
        )


@dataclass(frozen=True, eq=False)
class PixelStream:
    """A frame of C channels, streamed in raster order (row-major)."""

    data: np.ndarray
    fmt: FixedPointFormat

    def __post_init__(self):
        if self.data.ndim != 3:
            raise SimulationError(f"pixel stream needs (C, H, W) data, got shape {self.data.shape}")
        _check_range(self.data, self.fmt, "pixel stream")

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(int(d) for d in self.data.shape)

    def __len__(self) -> int:
        return self.shape[1] * self.shape[2]

    def tokens(self):
        """Yield one tuple of C channel values per raster position."""
        channels, height, width = self.shape
        flat = self.data.reshape(channels, height * width)
        for index in range(height * width):
            yield tuple(int(v) for v in flat[:, index])


@dataclass(frozen=True, eq=False)
class FeatureMaps:
    data: np.ndarray
    fmt: FixedPointFormat

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(d) for d in self.data.shape)

    def to_stream(self) -> PixelStream:
        return PixelStream(self.data, self.fmt)


def random_image(shape: tuple[int, int, int], fmt: FixedPointFormat, seed: int | None = None) -> PixelStream:
    rng = np.random.default_rng(seed)
    data = rng.integers(fmt.min_raw, fmt.max_raw + 1, size=shape, dtype=np.int64)
    return PixelStream(data, fmt)


def image_from_real(values: np.ndarray, fmt: FixedPointFormat) -> PixelStream:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 2:
        values = values[None]
    return PixelStream(quantize_array(values, fmt), fmt)


def _pgm_tokens(content: bytes):
    """Header fields of a PGM file with comments removed, and the offset after them."""
    fields = []
    position = 0
    while len(fields) < 4:
        match = re.compile(rb"\s*(#[^\n]*\n\s*)*([^\s#]+)").match(content, position)
        if match is None:
            raise SimulationError("truncated PGM header")
        fields.append(match.group(2))
        position = match.end()
    return fields, position + 1


def _pgm_real(path: str | Path) -> np.ndarray:
    content = Path(path).read_bytes()
    (magic, width, height, maxval), offset = _pgm_tokens(content)
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError:
        raise SimulationError(f"{path}: malformed PGM header") from None
    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        pixels = np.frombuffer(content, dtype=dtype, count=count, offset=offset) if len(content) >= offset + count * dtype.itemsize else None
    elif magic == b"P2":
        values = content[offset - 1:].split()
        pixels = np.array([int(v) for v in values[:count]]) if len(values) >= count else None
    else:
        raise SimulationError(f"{path}: not a PGM file (magic {magic!r})")
    if pixels is None:
        raise SimulationError(f"{path}: expected {count} pixels, file is truncated")
    return pixels.astype(np.float64).reshape(1, height, width) / maxval


def read_pgm(path: str | Path, fmt: FixedPointFormat) -> PixelStream:
    """Read a P2 or P5 grayscale image, mapping [0, maxval] onto [0, 1] in fmt."""
    return image_from_real(_pgm_real(path), fmt)


def write_pgm(stream: PixelStream, path: str | Path) -> None:
    """Write channel 0 as P2, mapping the format range onto [0, 255]."""
    channel = stream.data[0].astype(np.int64) - stream.fmt.min_raw
    span = stream.fmt.max_raw - stream.fmt.min_raw
    pixels = (channel * 255 + span // 2) // span
    height, width = channel.shape
    lines = ["P2", f"{width} {height}", "255"] + [" ".join(str(int(v)) for v in row) for row in pixels]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def write_raw(data: np.ndarray, fmt: FixedPointFormat, path: str | Path) -> tuple[Path, Path]:
    """Write planar int32 data plus its JSON header; returns both paths."""
    path = Path(path).with_suffix(".raw")
    header = path.with_suffix(".json")
    path.parent.mkdir(parents=True, exist_ok=True)
    np.ascontiguousarray(data, dtype=_RAW_DTYPE).tofile(path)
    header.write_text(json.dumps({
        "shape": [int(d) for d in data.shape],
        "dtype": "int32-le",
        "format": fmt.to_dict(),
    }, indent=2) + "\n", encoding="utf-8")
    return path, header


def read_raw(path: str | Path) -> tuple[np.ndarray, FixedPointFormat]:
    path = Path(path).with_suffix(".raw")
    header_path = path.with_suffix(".json")
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
        shape = tuple(header["shape"])
        fmt = FixedPointFormat(**header["format"])
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise SimulationError(f"cannot read raw header {header_path}: {e}") from e
    data = np.fromfile(path, dtype=_RAW_DTYPE)
    if data.size != int(np.prod(shape)):
        raise SimulationError(f"{path}: holds {data.size} values, header declares shape {shape}")
    return data.reshape(shape).astype(np.int64), fmt


def load_image(path: str | Path, fmt: FixedPointFormat) -> PixelStream:
    """PGM files are rescaled into fmt; raw files must already be in fmt."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return read_pgm(path, fmt)
    data, file_fmt = read_raw(path)
    if file_fmt != fmt:
        raise SimulationError(f"{path}: stored in {file_fmt}, model input expects {fmt}")
    if data.ndim == 2:
        data = data[None]
    return PixelStream(data, fmt)


def load_real_image(path: str | Path) -> np.ndarray:
    """Real-valued (C, H, W) image: PGM pixels in [0, 1] or a dequantized raw file."""
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        return _pgm_real(path)
    data, fmt = read_raw(path)
    if data.ndim == 2:
        data = data[None]
    return dequantize(data, fmt)
