"""Raw planar RGB 4:4:4 sequence I/O.

File layout (bit-exact contract, no container):
  frame 0 G plane, frame 0 B plane, frame 0 R plane, frame 1 G plane, ...
  Each plane is height rows of width samples, row-major.
  8-bit: 1 byte per sample. 10/12-bit: 2 bytes per sample, little-endian,
  upper bits zero.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

CHANNELS = ("G", "B", "R")
G, B, R = 0, 1, 2

SUPPORTED_BIT_DEPTHS = (8, 10, 12)


class RawFormatError(ValueError):
    """Raised when a raw file does not match the declared geometry."""


def bytes_per_sample(bit_depth: int) -> int:
    return 1 if bit_depth == 8 else 2


@dataclass(frozen=True)
class Frame:
    """One picture: three same-sized integer sample planes in G, B, R order."""

    width: int
    height: int
    bit_depth: int
    planes: tuple  # (g, b, r) int32 arrays of shape (height, width)

    def __post_init__(self):
        if self.bit_depth not in SUPPORTED_BIT_DEPTHS:
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        if len(self.planes) != 3:
            raise ValueError("a frame needs exactly three planes (G, B, R)")
        for p in self.planes:
            if p.shape != (self.height, self.width):
                raise ValueError(
                    f"plane shape {p.shape} != ({self.height}, {self.width})"
                )
            if p.size and (int(p.min()) < 0 or int(p.max()) > self.max_value):
                raise ValueError("sample outside [0, 2^bit_depth - 1]")

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


@dataclass
class Sequence:
    """Ordered frames sharing geometry; frame_rate is metadata only."""

    frames: list = field(default_factory=list)
    frame_rate: float = 30.0

    def __post_init__(self):
        if not self.frames:
            raise ValueError("a sequence holds at least one frame")
        first = self.frames[0]
        for f in self.frames:
            if (f.width, f.height, f.bit_depth) != (
                first.width,
                first.height,
                first.bit_depth,
            ):
                raise ValueError("all frames must share width, height, bit depth")

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def bit_depth(self) -> int:
        return self.frames[0].bit_depth


def frame_byte_size(width: int, height: int, bit_depth: int) -> int:
    return 3 * width * height * bytes_per_sample(bit_depth)


def load_raw(path, width: int, height: int, bit_depth: int,
             max_frames: int | None = None) -> Sequence:
    """Read a raw planar G,B,R file into a Sequence.

    Returns min(max_frames, available) frames; samples are masked to
    bit_depth bits. Raises RawFormatError when the file size is not a
    whole number of frames, or the file holds none.
    """
    if bit_depth not in SUPPORTED_BIT_DEPTHS:
        raise ValueError(f"unsupported bit depth {bit_depth}")
    if width < 1 or height < 1:
        raise ValueError("frame dimensions must be at least 1x1")
    if max_frames is not None and max_frames < 1:
        raise ValueError("max_frames must be at least 1")

    fsize = os.path.getsize(path)
    fbytes = frame_byte_size(width, height, bit_depth)
    if fsize == 0 or fsize % fbytes != 0:
        raise RawFormatError(
            f"file size {fsize} is not a positive multiple of the "
            f"{fbytes}-byte frame size for {width}x{height}@{bit_depth}bit"
        )
    available = fsize // fbytes
    count = available if max_frames is None else min(max_frames, available)

    dtype = np.uint8 if bit_depth == 8 else np.dtype("<u2")
    mask = (1 << bit_depth) - 1
    plane_samples = width * height

    frames = []
    with open(path, "rb") as fh:
        for _ in range(count):
            planes = []
            for _ in range(3):
                raw = np.fromfile(fh, dtype=dtype, count=plane_samples)
                plane = (raw.astype(np.int32) & mask).reshape(height, width)
                planes.append(plane)
            frames.append(Frame(width, height, bit_depth, tuple(planes)))
    return Sequence(frames)


def write_raw(seq: Sequence, path) -> None:
    """Write a Sequence in the raw planar layout; load_raw round-trips it."""
    dtype = np.uint8 if seq.bit_depth == 8 else np.dtype("<u2")
    with open(path, "wb") as fh:
        for frame in seq.frames:
            for plane in frame.planes:
                plane.astype(dtype).tofile(fh)
