"""Per-CB, per-channel perceptual QP synthesis.

The final QP of a CB combines the frame-level base QP with a perceptual
adjustment built from the CB's normalized spatial activity A and its
PU's temporal offset t:

    raw   = round(6 * log2(A))            (half away from zero)
    delta = clamp(t + raw, lo, hi)        (default clamp scope: total)
    Q     = clamp(q_base + delta, 0, 51)

The clamp window is [o/2, o] for G and [o, o_max] for B and R, where
o = 6 is the mean CB-level QP offset and o_max = 12 the maximum. Since
the window floors are positive, the final QP never drops below the base
QP: smooth regions are simply not sharpened, while textured or
high-motion regions (and the less visually sensitive B/R channels) are
quantized more coarsely.

Clamping the total adjustment is one of two defensible readings of the
published ranges; the alternative (clamp only the spatial term, then add
t) is selectable via ClampScope.TERM so the two can be compared.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

QP_MIN = 0
QP_MAX = 51

# QStep doubles every 6 QP; one octave is split into six exact ratios so
# that qp_to_qstep(q + 6) == 2 * qp_to_qstep(q) holds bit-exactly.
_OCTAVE_FRACTIONS = tuple(2.0 ** (r / 6.0) for r in range(6))


class ClampScope(str, enum.Enum):
    """What the per-channel offset window applies to."""

    TOTAL = "total"  # clamp(t + raw): both masking terms share the window
    TERM = "term"    # t + clamp(raw): window applies to the spatial term only


@dataclass(frozen=True)
class QpConstants:
    """Offset-model constants; override only for experiments."""

    mean_offset: float = 6.0   # mean CB-level perceptual QP offset
    max_offset: float = 12.0   # maximum CB-level QP offset
    num_offsets: int = 12      # number of CB-level offsets behind the mean
    qp_min: int = QP_MIN
    qp_max: int = QP_MAX

    @property
    def g_range(self):
        return (self.mean_offset / 2.0, self.mean_offset)

    @property
    def br_range(self):
        return (self.mean_offset, self.max_offset)


def round_half_away(x: float) -> int:
    """Round to nearest integer, halves away from zero."""
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def spatial_offset(activity: float) -> int:
    """Raw spatial QP offset round(6 * log2(A)) for a CB activity A."""
    if activity <= 0:
        raise ValueError(f"activity must be positive, got {activity}")
    return round_half_away(6.0 * math.log2(activity))


def perceptual_offset(activity: float, temporal: float, lo: float, hi: float,
                      scope: ClampScope = ClampScope.TOTAL) -> float:
    """Clamped perceptual QP adjustment for one CB and channel."""
    raw = spatial_offset(activity)
    if scope is ClampScope.TOTAL:
        return min(max(temporal + raw, lo), hi)
    return temporal + min(max(float(raw), lo), hi)


def cb_qp(q_base: float, delta: float,
          qp_min: int = QP_MIN, qp_max: int = QP_MAX) -> float:
    """Final CB-level QP: base plus adjustment, clamped to the legal range."""
    return min(max(q_base + delta, qp_min), qp_max)


def qp_to_qstep(qp: float) -> float:
    """Quantization step size for a QP: 1.0 at QP 4, doubling every 6 QP."""
    if not QP_MIN <= qp <= QP_MAX:
        raise ValueError(f"QP must lie in [{QP_MIN}, {QP_MAX}], got {qp}")
    e = qp - 4
    if e == int(e):
        e = int(e)
        return (2.0 ** (e // 6)) * _OCTAVE_FRACTIONS[e % 6]
    return 2.0 ** (e / 6.0)


@dataclass
class QpMap:
    """Per-CB QP decomposition for one frame.

    Arrays have shape (3, n_blocks): channel (G, B, R), then raster CB
    index. raw is the spatial offset term, t the temporal offset, delta
    the clamped total adjustment, qp the final QP and qstep its step
    size. For the uniform anchor, raw = t = delta = 0.
    """

    frame_index: int
    base_qp: np.ndarray
    raw: np.ndarray
    t: np.ndarray
    delta: np.ndarray
    qp: np.ndarray
    qstep: np.ndarray

    @property
    def n_blocks(self) -> int:
        return self.qp.shape[1]

    def rows(self):
        """CSV-ready rows: frame, cb_index, channel, q, raw, t, delta, qp, qstep."""
        from .video_io import CHANNELS

        for cb in range(self.n_blocks):
            for ch in range(3):
                yield (
                    self.frame_index,
                    cb,
                    CHANNELS[ch],
                    float(self.base_qp[ch]),
                    int(self.raw[ch, cb]),
                    float(self.t[ch, cb]),
                    float(self.delta[ch, cb]),
                    float(self.qp[ch, cb]),
                    float(self.qstep[ch, cb]),
                )


def uniform_qp_map(frame_index: int, base_qps, n_blocks: int) -> QpMap:
    """Anchor map: every CB of every channel uses the frame-level QP."""
    base = np.asarray(base_qps, dtype=np.float64)
    qp = np.repeat(base[:, None], n_blocks, axis=1)
    zeros = np.zeros((3, n_blocks))
    qstep = np.vectorize(qp_to_qstep)(qp)
    return QpMap(frame_index, base, zeros.astype(np.int64), zeros.copy(),
                 zeros.copy(), qp, qstep)


def build_qp_map(frame_index: int, base_qps, n_blocks: int,
                 activity=None, magnitudes=None, mean_magnitude: float = 0.0,
                 constants: QpConstants = QpConstants(),
                 scope: ClampScope = ClampScope.TOTAL) -> QpMap:
    """Perceptual map from activity and/or motion data.

    activity: ActivityMap or None (None treats every A as 1, the
    temporal-only ablation). magnitudes: per-PU vector magnitudes or None
    (None disables temporal offsets, the spatial-only ablation or an
    intra frame). mean_magnitude is the frame mean the magnitudes are
    thresholded against.
    """
    from .motion_model import temporal_offset_br, temporal_offset_g

    base = np.asarray(base_qps, dtype=np.float64)
    raw = np.zeros((3, n_blocks), dtype=np.int64)
    t = np.zeros((3, n_blocks))
    delta = np.zeros((3, n_blocks))
    qp = np.zeros((3, n_blocks))
    qstep = np.zeros((3, n_blocks))

    ranges = (constants.g_range, constants.br_range, constants.br_range)
    offset_fns = (temporal_offset_g, temporal_offset_br, temporal_offset_br)

    for ch in range(3):
        lo, hi = ranges[ch]
        for cb in range(n_blocks):
            a = 1.0 if activity is None else float(activity.a[ch, cb])
            raw[ch, cb] = spatial_offset(a)
            if magnitudes is not None:
                t[ch, cb] = offset_fns[ch](
                    magnitudes[cb], mean_magnitude, constants.mean_offset
                )
            delta[ch, cb] = perceptual_offset(a, t[ch, cb], lo, hi, scope)
            qp[ch, cb] = cb_qp(base[ch], delta[ch, cb],
                               constants.qp_min, constants.qp_max)
            qstep[ch, cb] = qp_to_qstep(qp[ch, cb])
    return QpMap(frame_index, base, raw, t, delta, qp, qstep)
