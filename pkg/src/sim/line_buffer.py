"""Streaming window extraction over a raster-ordered frame.

Holds the last K-1 padded rows plus the row being filled, the same storage
as K-1 line buffers of the padded image width. Zero padding is injected
into the stream around the real pixels.
"""

from collections import deque

from .base import SimulationError


def warmup_tokens(kernel: int, width: int) -> int:
    """0-based index of the input token that completes the first window (no padding)."""
    return (kernel - 1) * width + kernel - 1


class LineBuffer:
    def __init__(self, kernel: int, width: int, height: int, stride: int = 1, pad: int = 0):
        if kernel < 1 or stride < 1 or pad < 0:
            raise SimulationError(f"invalid window geometry K={kernel} stride={stride} pad={pad}")
        if width + 2 * pad < kernel or height + 2 * pad < kernel:
            raise SimulationError(f"{kernel}x{kernel} window does not fit a {height}x{width} frame")
        self.kernel = kernel
        self.width = width
        self.height = height
        self.stride = stride
        self.pad = pad
        self.padded_width = width + 2 * pad
        self.reset()

    def reset(self) -> None:
        self.rows = deque(maxlen=self.kernel)
        self.row = 0
        self.col = 0
        self.padded_row = 0
        self.padded_col = 0

    def _insert(self, value: int, windows: list) -> None:
        if self.padded_col == 0:
            self.rows.append([])
        self.rows[-1].append(value)
        k, pr, pc = self.kernel, self.padded_row, self.padded_col
        if pr >= k - 1 and pc >= k - 1 and (pr - k + 1) % self.stride == 0 and (pc - k + 1) % self.stride == 0:
            windows.append(tuple(v for line in self.rows for v in line[pc - k + 1:pc + 1]))
        self.padded_col += 1
        if self.padded_col == self.padded_width:
            self.padded_col = 0
            self.padded_row += 1

    def _insert_zeros(self, count: int, windows: list) -> None:
        for _ in range(count):
            self._insert(0, windows)

    def push(self, value: int) -> list[tuple[int, ...]]:
        """Consume one real pixel; returns the windows it completes, each K*K taps row-major."""
        windows = []
        if self.row == 0 and self.col == 0:
            self._insert_zeros(self.pad * self.padded_width, windows)
        if self.col == 0:
            self._insert_zeros(self.pad, windows)
        self._insert(value, windows)
        self.col += 1
        if self.col == self.width:
            self._insert_zeros(self.pad, windows)
            self.col = 0
            self.row += 1
            if self.row == self.height:
                self._insert_zeros(self.pad * self.padded_width, windows)
                self.reset()
        return windows
