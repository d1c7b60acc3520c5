"""Fixed quadtree block geometry.

A frame is tiled into 2Nx2N coding blocks (CBs) at one of three depth
levels: depth 0 -> 64x64 (N=32), depth 1 -> 32x32 (N=16), depth 2 ->
16x16 (N=8). Each CB splits into four NxN sub-blocks. Frames whose
dimensions are not multiples of the CB size are edge-padded (last
row/column replicated) before analysis; padded samples never enter
quality metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CB_SIZE_BY_DEPTH = {0: 64, 1: 32, 2: 16}


@dataclass(frozen=True)
class BlockRef:
    """Square block: top-left corner, side length, quadtree level."""

    x: int
    y: int
    size: int
    depth: int
    partial: bool = False  # extends past the true frame, covered by padding

    def __post_init__(self):
        if self.size < 2 or self.size % 2 != 0:
            raise ValueError(f"block size must be even and >= 2, got {self.size}")


@dataclass(frozen=True)
class BlockGrid:
    """Raster-order CB tiling of a (padded) frame at a fixed depth."""

    width: int
    height: int
    depth: int
    cb_size: int
    cols: int
    rows: int
    blocks: tuple

    @property
    def padded_width(self) -> int:
        return self.cols * self.cb_size

    @property
    def padded_height(self) -> int:
        return self.rows * self.cb_size

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def build_grid(width: int, height: int, depth: int) -> BlockGrid:
    """Tile a width x height frame with CBs at the given quadtree depth."""
    if depth not in CB_SIZE_BY_DEPTH:
        raise ValueError(f"depth must be one of {sorted(CB_SIZE_BY_DEPTH)}, got {depth}")
    if width < 1 or height < 1:
        raise ValueError("frame dimensions must be at least 1x1")
    size = CB_SIZE_BY_DEPTH[depth]
    cols = math.ceil(width / size)
    rows = math.ceil(height / size)
    blocks = []
    for row in range(rows):
        for col in range(cols):
            x, y = col * size, row * size
            partial = (x + size > width) or (y + size > height)
            blocks.append(BlockRef(x, y, size, depth, partial))
    return BlockGrid(width, height, depth, size, cols, rows, tuple(blocks))


def sub_blocks(b: BlockRef):
    """Four quadrants of a CB in the order top-left, top-right,
    bottom-left, bottom-right."""
    n = b.size // 2
    d = b.depth + 1
    return (
        BlockRef(b.x, b.y, n, d, b.partial),
        BlockRef(b.x + n, b.y, n, d, b.partial),
        BlockRef(b.x, b.y + n, n, d, b.partial),
        BlockRef(b.x + n, b.y + n, n, d, b.partial),
    )


def pad_plane(plane: np.ndarray, grid: BlockGrid) -> np.ndarray:
    """Edge-replicate a plane out to the grid's padded dimensions."""
    h, w = plane.shape
    ph, pw = grid.padded_height, grid.padded_width
    if (h, w) == (ph, pw):
        return plane
    return np.pad(plane, ((0, ph - h), (0, pw - w)), mode="edge")
