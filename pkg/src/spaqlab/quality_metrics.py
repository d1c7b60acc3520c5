"""Objective quality metrics: per-channel PSNR, global GBR SSIM,
percentage deltas against an anchor.

SSIM uses an 8x8 uniform sliding window (stride 1) with the standard
stabilizers C1 = (0.01*peak)^2 and C2 = (0.03*peak)^2; the global score
of a frame is the mean of its three channel scores. Window sums are
taken from integer integral images, so scores are exact and symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .video_io import Frame

PSNR_CAP_DB = 99.99
SSIM_WINDOW = 8


def psnr(ref_plane: np.ndarray, test_plane: np.ndarray, bit_depth: int) -> float:
    """Peak signal-to-noise ratio in dB, capped at 99.99."""
    if ref_plane.shape != test_plane.shape:
        raise ValueError("planes must share dimensions")
    diff = ref_plane.astype(np.int64) - test_plane.astype(np.int64)
    mse = float((diff * diff).sum()) / diff.size
    return mse_to_psnr(mse, bit_depth)


def mse_to_psnr(mse: float, bit_depth: int) -> float:
    if mse <= 0:
        return PSNR_CAP_DB
    peak = (1 << bit_depth) - 1
    return min(10.0 * math.log10(peak * peak / mse), PSNR_CAP_DB)


def _window_sums(x: np.ndarray, win: int) -> np.ndarray:
    """Sum of every win x win window (stride 1), exact in int64."""
    h, w = x.shape
    c = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(x, axis=0, dtype=np.int64), axis=1, out=c[1:, 1:])
    return (c[win:, win:] - c[:-win, win:] - c[win:, :-win] + c[:-win, :-win])


def ssim_plane(ref_plane: np.ndarray, test_plane: np.ndarray, bit_depth: int,
               window: int = SSIM_WINDOW) -> float:
    """Mean SSIM of one channel over all window positions."""
    if ref_plane.shape != test_plane.shape:
        raise ValueError("planes must share dimensions")
    h, w = ref_plane.shape
    if h < window or w < window:
        raise ValueError(f"plane {h}x{w} is smaller than the {window}x{window} window")
    peak = (1 << bit_depth) - 1
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2
    n = window * window

    a = ref_plane.astype(np.int64)
    b = test_plane.astype(np.int64)
    sa = _window_sums(a, window).astype(np.float64)
    sb = _window_sums(b, window).astype(np.float64)
    saa = _window_sums(a * a, window).astype(np.float64)
    sbb = _window_sums(b * b, window).astype(np.float64)
    sab = _window_sums(a * b, window).astype(np.float64)

    mu_a = sa / n
    mu_b = sb / n
    var_a = saa / n - mu_a * mu_a
    var_b = sbb / n - mu_b * mu_b
    cov = sab / n - mu_a * mu_b

    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())


def ssim_global(ref: Frame, test: Frame, window: int = SSIM_WINDOW) -> float:
    """Global GBR score: mean of the three channel SSIMs."""
    if (ref.width, ref.height, ref.bit_depth) != (
        test.width,
        test.height,
        test.bit_depth,
    ):
        raise ValueError("frames must share dimensions and bit depth")
    scores = [
        ssim_plane(ref.planes[ch], test.planes[ch], ref.bit_depth, window)
        for ch in range(3)
    ]
    return sum(scores) / 3.0


def pct_reduction(anchor: float, test: float) -> float:
    """Signed percentage change of test against anchor (negative = reduction)."""
    if anchor <= 0:
        raise ValueError(f"anchor must be positive, got {anchor}")
    return 100.0 * (test - anchor) / anchor


def _pct_or_none(anchor: float, test: float):
    if anchor <= 0:
        return 0.0 if test == anchor else None
    return pct_reduction(anchor, test)


@dataclass
class MetricReport:
    """Quality numbers of one coded run."""

    psnr_db: tuple   # (G, B, R)
    mse: tuple       # (G, B, R), pooled over frames
    ssim: float
    bits: int

    def deltas_vs(self, anchor: "MetricReport") -> dict:
        """Signed percentage changes against an anchor run.

        PSNR deltas are reported both on dB values and on the underlying
        MSE, since the two conventions tell different stories.
        """
        return {
            "pct_bits": _pct_or_none(anchor.bits, self.bits),
            "pct_psnr_db": tuple(
                _pct_or_none(anchor.psnr_db[ch], self.psnr_db[ch])
                for ch in range(3)
            ),
            "pct_psnr_mse": tuple(
                _pct_or_none(anchor.mse[ch], self.mse[ch]) for ch in range(3)
            ),
        }
