"""Per-CB normalized spatial activity.

For every CB and channel:

    g = 1 + min(variance of each of the four NxN sub-blocks)
    m = mean of g over all CBs of that channel in the current picture
    A = (s*g + m) / (g + s*m)        with scaling factor s (2 by default)

A is the frame-normalized texture measure: A = 1 when g equals the frame
mean, and A is confined to [1/s, s] for any input. Variances are
population variances (divide by the sample count) accumulated in exact
integer arithmetic and converted to float only for the final division.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .partitioner import BlockGrid, BlockRef, pad_plane, sub_blocks
from .video_io import Frame

DEFAULT_SCALE = 2.0


def sub_block_variance(plane: np.ndarray, sb: BlockRef) -> float:
    """Population variance of the samples inside one sub-block."""
    samples = plane[sb.y: sb.y + sb.size, sb.x: sb.x + sb.size]
    n = samples.size
    s1 = int(samples.sum(dtype=np.int64))
    s2 = int((samples.astype(np.int64) ** 2).sum(dtype=np.int64))
    # var = E[x^2] - E[x]^2 = (n*s2 - s1^2) / n^2, kept integral until here
    return float(n * s2 - s1 * s1) / (n * n)


def cb_activity(plane: np.ndarray, cb: BlockRef) -> float:
    """Non-normalized activity: 1 + the minimum sub-block variance."""
    return 1.0 + min(sub_block_variance(plane, sb) for sb in sub_blocks(cb))


def frame_mean_activity(g_values) -> float:
    """Arithmetic mean of the CB activities of one channel in one picture."""
    values = list(g_values)
    if not values:
        raise ValueError("frame mean activity needs at least one CB")
    return sum(values) / len(values)


def normalized_activity(g: float, m: float, s: float = DEFAULT_SCALE) -> float:
    """Normalize CB activity g against the frame mean m.

    Strictly increasing in g for fixed m, equal to 1 at g == m, and
    bounded by [1/s, s].
    """
    return (s * g + m) / (g + s * m)


@dataclass
class ActivityMap:
    """Activity of every CB for all three channels of one frame.

    g, a have shape (3, n_blocks) indexed by channel then raster CB
    index; m has shape (3,). s is the normalization scale used.
    """

    s: float
    g: np.ndarray
    m: np.ndarray
    a: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.g.shape[1]


def compute_activity_map(frame: Frame, grid: BlockGrid,
                         s: float = DEFAULT_SCALE) -> ActivityMap:
    """Activity map for one frame over a block grid.

    Planes are edge-padded to the grid before analysis. Uses a vectorized
    path that is arithmetic-identical to sub_block_variance/cb_activity.
    """
    half = grid.cb_size // 2
    g = np.empty((3, grid.n_blocks))
    m = np.empty(3)
    a = np.empty((3, grid.n_blocks))
    for ch, plane in enumerate(frame.planes):
        padded = pad_plane(plane, grid).astype(np.int64)
        rows, cols = padded.shape[0] // half, padded.shape[1] // half
        tiles = padded.reshape(rows, half, cols, half)
        s1 = tiles.sum(axis=(1, 3))
        s2 = (tiles * tiles).sum(axis=(1, 3))
        n = half * half
        var = (n * s2 - s1 * s1).astype(np.float64) / float(n * n)
        # min over each CB's 2x2 group of sub-block variances
        quads = var.reshape(grid.rows, 2, grid.cols, 2)
        g_ch = 1.0 + quads.min(axis=(1, 3)).reshape(-1)
        m_ch = frame_mean_activity(g_ch.tolist())
        g[ch] = g_ch
        m[ch] = m_ch
        a[ch] = (s * g_ch + m_ch) / (g_ch + s * m_ch)
    return ActivityMap(s=s, g=g, m=m, a=a)
