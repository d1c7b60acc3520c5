"""Anchor-vs-SPAQ experiment runner.

Runs one sequence through the codec once per (mode, QP) cell and collects
bit cost, per-channel PSNR and global SSIM per cell, plus percentage
deltas against the uniform-QP anchor at the same QP. GOP structure is
IPPP: the first frame is intra, every later frame predicts from the
previous reconstruction (closed loop).

Modes:
  anchor-uniform  every CB uses the frame-level QP unchanged
  spaq            spatial + temporal + color masking offsets
  spatial-only    ablation: temporal offsets forced to zero
  temporal-only   ablation: activity forced to 1 (offsets from motion only)
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .codec_sim import INTER_DEADZONE, INTRA_DEADZONE, encode_frame
from .motion_model import estimate_motion_field
from .partitioner import build_grid, pad_plane
from .qp_model import ClampScope, QpConstants, build_qp_map, uniform_qp_map
from .quality_metrics import MetricReport, mse_to_psnr, ssim_global
from .spatial_activity import DEFAULT_SCALE, compute_activity_map
from .video_io import CHANNELS, G, SUPPORTED_BIT_DEPTHS, Frame, Sequence, load_raw

MODES = ("anchor-uniform", "spaq", "spatial-only", "temporal-only")
SYNTHETIC_KINDS = ("noise", "gradient", "moving-texture", "mixed")
DEFAULT_QPS = (22, 27, 32, 37)
ANCHOR_MODE = "anchor-uniform"

REPORT_COLUMNS = (
    "sequence", "mode", "qp", "bits", "bits_g", "bits_b", "bits_r",
    "psnr_g_db", "psnr_b_db", "psnr_r_db", "ssim",
    "pct_bits", "pct_psnr_g_db", "pct_psnr_b_db", "pct_psnr_r_db",
    "pct_psnr_g_mse", "pct_psnr_b_mse", "pct_psnr_r_mse",
)
RATE_POINT_COLUMNS = ("qp", "mode", "bits", "ssim")
QPMAP_COLUMNS = ("frame", "cb_index", "channel", "q", "raw", "t", "delta",
                 "qp", "qstep")


@dataclass
class ExperimentConfig:
    input_path: str | None = None
    synthetic: str | None = None
    width: int = 128
    height: int = 128
    bit_depth: int = 8
    frames: int = 16
    qps: tuple = DEFAULT_QPS
    modes: tuple = (ANCHOR_MODE, "spaq")
    cb_depth: int = 1
    search_range: int = 16
    clamp_scope: str = ClampScope.TOTAL.value
    activity_scale: float = DEFAULT_SCALE
    intra_deadzone: float = INTRA_DEADZONE
    inter_deadzone: float = INTER_DEADZONE
    channel_qp_offsets: tuple = (0, 0, 0)
    open_loop_me: bool = False
    v_source: str = "current"
    seed: int = 0
    shift: tuple = (3, 4)
    out_dir: str | None = None
    label: str | None = None

    def validate(self):
        if (self.input_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of input_path and synthetic is required")
        if self.synthetic is not None and self.synthetic not in SYNTHETIC_KINDS:
            raise ValueError(f"unknown synthetic kind {self.synthetic!r}")
        if self.bit_depth not in SUPPORTED_BIT_DEPTHS:
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        if self.width < 8 or self.height < 8:
            raise ValueError("frames must be at least 8x8 for the SSIM window")
        if self.synthetic == "moving-texture" and (self.width < 64 or self.height < 64):
            raise ValueError("moving-texture needs at least 64x64 frames")
        if self.frames < 1:
            raise ValueError("at least one frame is required")
        if not self.qps:
            raise ValueError("at least one QP is required")
        for qp in self.qps:
            if not 0 <= qp <= 51:
                raise ValueError(f"QP {qp} outside [0, 51]")
        if not self.modes:
            raise ValueError("at least one mode is required")
        for mode in self.modes:
            if mode not in MODES:
                raise ValueError(f"unknown mode {mode!r}")
        if self.cb_depth not in (0, 1, 2):
            raise ValueError("cb_depth must be 0, 1 or 2")
        if self.search_range < 0:
            raise ValueError("search_range must be >= 0")
        ClampScope(self.clamp_scope)
        if self.v_source not in ("current", "previous"):
            raise ValueError("v_source must be 'current' or 'previous'")
        for dz in (self.intra_deadzone, self.inter_deadzone):
            if not 0.0 <= dz <= 0.5:
                raise ValueError("deadzones must lie in [0, 0.5]")
        for off in self.channel_qp_offsets:
            if min(self.qps) + off < 0 or max(self.qps) + off > 51:
                raise ValueError("channel QP offset pushes a base QP outside [0, 51]")


def _ramp(width, height, axis, low, span):
    x = np.arange(width)[None, :]
    y = np.arange(height)[:, None]
    coord = {"x": x + 0 * y, "y": y + 0 * x, "xy": (x + y) // 2}[axis]
    peak = int(coord.max()) or 1
    return (low + (coord * span) // peak).astype(np.int32)


def moving_patch_rect(width, height, frames, shift, n):
    """Placement (x, y, side) of the moving-texture patch at frame n.

    Published so tests and analyses can locate the planted texture
    without re-deriving the generator's geometry.
    """
    patch = min(64, min(width, height) // 2)
    sx, sy = shift
    x0 = max(0, (width - patch - abs(sx) * (frames - 1)) // 2)
    y0 = max(0, (height - patch - abs(sy) * (frames - 1)) // 2)
    px = min(max(x0 + n * sx, 0), width - patch)
    py = min(max(y0 + n * sy, 0), height - patch)
    return px, py, patch


def gen_synthetic(kind: str, width: int = 128, height: int = 128,
                  frames: int = 16, bit_depth: int = 8, seed: int = 0,
                  shift=(3, 4)) -> Sequence:
    """Deterministic test content; same (kind, dims, seed) -> same samples."""
    if kind not in SYNTHETIC_KINDS:
        raise ValueError(f"unknown synthetic kind {kind!r}")
    if kind == "moving-texture" and (width < 64 or height < 64):
        raise ValueError("moving-texture needs at least 64x64 frames")
    rng = np.random.default_rng(seed)
    maxv = (1 << bit_depth) - 1
    mid = 1 << (bit_depth - 1)
    amp = int(0.35 * maxv)

    def texture(h, w):
        return rng.integers(mid - amp, mid + amp + 1, (h, w), dtype=np.int64
                            ).astype(np.int32)

    out = []
    if kind == "noise":
        for _ in range(frames):
            planes = tuple(
                rng.integers(0, maxv + 1, (height, width), dtype=np.int64
                             ).astype(np.int32)
                for _ in range(3)
            )
            out.append(Frame(width, height, bit_depth, planes))
    elif kind == "gradient":
        low = maxv // 16
        span = max(1, maxv - 2 * low - frames)
        bases = (_ramp(width, height, "x", low, span),
                 _ramp(width, height, "y", low, span),
                 _ramp(width, height, "xy", low, span))
        for n in range(frames):
            planes = tuple((b + n).astype(np.int32) for b in bases)
            out.append(Frame(width, height, bit_depth, planes))
    elif kind == "moving-texture":
        low = maxv // 16
        bgs = tuple(_ramp(width, height, ax, low, maxv // 4)
                    for ax in ("x", "y", "xy"))
        patch = moving_patch_rect(width, height, frames, shift, 0)[2]
        patches = tuple(texture(patch, patch) for _ in range(3))
        for n in range(frames):
            px, py, _ = moving_patch_rect(width, height, frames, shift, n)
            planes = []
            for ch in range(3):
                plane = bgs[ch].copy()
                plane[py: py + patch, px: px + patch] = patches[ch]
                planes.append(plane)
            out.append(Frame(width, height, bit_depth, tuple(planes)))
    else:  # mixed
        low = maxv // 16
        hh, hw = height // 2, width // 2
        patch = max(8, min(24, min(hh, hw) // 2))
        patches = tuple(texture(patch, patch) for _ in range(3))
        base = tuple(_ramp(width, height, ax, low, maxv // 3)
                     for ax in ("x", "y", "xy"))
        for n in range(frames):
            px = min(hw // 4 + n, width - hw + hw // 4 - patch) if hw else 0
            py = min(hh + hh // 4 + 2 * n, height - patch)
            planes = []
            for ch in range(3):
                plane = base[ch].copy()
                # top-right quadrant: dense texture, refreshed every frame
                plane[:hh, hw:] = texture(hh, width - hw)
                plane[py: py + patch, px: px + patch] = patches[ch]
                planes.append(plane)
            out.append(Frame(width, height, bit_depth, tuple(planes)))
    return Sequence(out)


@dataclass
class CellResult:
    """Raw outcome of coding one sequence in one (mode, QP) cell."""

    mode: str
    qp: int
    bits: int
    channel_bits: tuple
    frame_bits: list
    mse: tuple
    ssim: float
    qp_maps: list
    qp_histograms: list
    recons: list


def run_cell(seq: Sequence, grid, mode: str, base_qp: int,
             cfg: ExperimentConfig) -> CellResult:
    """Code a whole sequence in one mode at one base QP."""
    constants = QpConstants()
    scope = ClampScope(cfg.clamp_scope)
    base_qps = [base_qp + cfg.channel_qp_offsets[ch] for ch in range(3)]
    use_spatial = mode in ("spaq", "spatial-only")
    use_temporal = mode in ("spaq", "temporal-only")

    recon_prev = None
    prev_mean_mag = None
    total_bits = 0
    channel_bits = np.zeros(3, dtype=np.int64)
    frame_bits = []
    sse = np.zeros(3, dtype=np.int64)
    ssim_sum = 0.0
    qp_maps, histograms, recons = [], [], []

    for n, frame in enumerate(seq.frames):
        if recon_prev is None:
            fld = None
        else:
            me_ref = seq.frames[n - 1] if cfg.open_loop_me else recon_prev
            fld = estimate_motion_field(
                pad_plane(frame.planes[G], grid),
                pad_plane(me_ref.planes[G], grid),
                grid, cfg.search_range, n,
            )
        if mode == ANCHOR_MODE:
            qmap = uniform_qp_map(n, base_qps, grid.n_blocks)
        else:
            act = (compute_activity_map(frame, grid, cfg.activity_scale)
                   if use_spatial else None)
            if use_temporal and fld is not None:
                mags = fld.magnitudes()
                if cfg.v_source == "previous" and prev_mean_mag is not None:
                    vmean = prev_mean_mag
                else:
                    vmean = fld.mean_magnitude
            else:
                mags, vmean = None, 0.0
            qmap = build_qp_map(n, base_qps, grid.n_blocks, activity=act,
                                magnitudes=mags, mean_magnitude=vmean,
                                constants=constants, scope=scope)
        enc = encode_frame(frame, recon_prev, qmap, grid, fld,
                           cfg.intra_deadzone, cfg.inter_deadzone)
        total_bits += enc.bits
        channel_bits += np.asarray(enc.channel_bits)
        frame_bits.append(enc.bits)
        sse += np.asarray(enc.sse)
        ssim_sum += ssim_global(frame, enc.recon)
        qp_maps.append(qmap)
        histograms.append({
            CHANNELS[ch]: dict(sorted(Counter(
                f"{q:g}" for q in qmap.qp[ch]
            ).items()))
            for ch in range(3)
        })
        recons.append(enc.recon)
        recon_prev = enc.recon
        if fld is not None:
            prev_mean_mag = fld.mean_magnitude

    samples = len(seq.frames) * seq.width * seq.height
    mse = tuple(float(s) / samples for s in sse)
    return CellResult(mode, base_qp, int(total_bits),
                      tuple(int(b) for b in channel_bits), frame_bits, mse,
                      ssim_sum / len(seq.frames), qp_maps, histograms, recons)


@dataclass
class RunRecord:
    """One report row: a (sequence, mode, QP) cell plus deltas vs anchor."""

    sequence: str
    mode: str
    qp: int
    bits: int
    channel_bits: tuple
    psnr_db: tuple
    mse: tuple
    ssim: float
    pct_bits: float
    pct_psnr_db: tuple
    pct_psnr_mse: tuple
    qp_histograms: list


@dataclass
class ExperimentReport:
    sequence: str
    config: dict
    records: list = field(default_factory=list)
    # (mode, qp) -> CellResult; carried for inspection, never serialized
    cells: dict = field(default_factory=dict, repr=False)


def _metrics(cell: CellResult, bit_depth: int) -> MetricReport:
    return MetricReport(
        psnr_db=tuple(mse_to_psnr(m, bit_depth) for m in cell.mse),
        mse=cell.mse,
        ssim=cell.ssim,
        bits=cell.bits,
    )


def _make_record(label, cell: CellResult, anchor: CellResult,
                 bit_depth: int) -> RunRecord:
    metrics = _metrics(cell, bit_depth)
    deltas = metrics.deltas_vs(_metrics(anchor, bit_depth))
    return RunRecord(
        sequence=label,
        mode=cell.mode,
        qp=cell.qp,
        bits=cell.bits,
        channel_bits=cell.channel_bits,
        psnr_db=metrics.psnr_db,
        mse=cell.mse,
        ssim=cell.ssim,
        pct_bits=deltas["pct_bits"],
        pct_psnr_db=deltas["pct_psnr_db"],
        pct_psnr_mse=deltas["pct_psnr_mse"],
        qp_histograms=cell.qp_histograms,
    )


def load_sequence(cfg: ExperimentConfig) -> Sequence:
    if cfg.synthetic is not None:
        return gen_synthetic(cfg.synthetic, cfg.width, cfg.height, cfg.frames,
                             cfg.bit_depth, cfg.seed, cfg.shift)
    return load_raw(cfg.input_path, cfg.width, cfg.height, cfg.bit_depth,
                    cfg.frames)


def run(cfg: ExperimentConfig, keep_recons: bool = False) -> ExperimentReport:
    """Run every (mode, QP) cell of the config and assemble the report.

    The uniform anchor always runs (it is the reference every percentage
    column is computed against) even when absent from cfg.modes. Writes
    report files when cfg.out_dir is set. Reconstructed frames are
    dropped from the returned cells unless keep_recons is set.
    """
    cfg.validate()
    seq = load_sequence(cfg)
    label = cfg.label or cfg.synthetic or os.path.basename(cfg.input_path)
    grid = build_grid(seq.width, seq.height, cfg.cb_depth)

    modes = list(cfg.modes)
    if ANCHOR_MODE not in modes:
        modes.insert(0, ANCHOR_MODE)

    report = ExperimentReport(label, dataclasses.asdict(cfg))
    for qp in cfg.qps:
        anchor = run_cell(seq, grid, ANCHOR_MODE, qp, cfg)
        report.cells[(ANCHOR_MODE, qp)] = anchor
        for mode in modes:
            cell = anchor if mode == ANCHOR_MODE else run_cell(
                seq, grid, mode, qp, cfg)
            report.cells[(mode, qp)] = cell
            report.records.append(
                _make_record(label, cell, anchor, seq.bit_depth))
    if not keep_recons:
        for cell in report.cells.values():
            cell.recons = []
    if cfg.out_dir is not None:
        emit(report, cfg.out_dir)
    return report


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _round6(value):
    return None if value is None else round(value, 6)


def record_to_row(r: RunRecord) -> list:
    return [
        r.sequence, r.mode, r.qp, r.bits,
        r.channel_bits[0], r.channel_bits[1], r.channel_bits[2],
        _round6(r.psnr_db[0]), _round6(r.psnr_db[1]), _round6(r.psnr_db[2]),
        _round6(r.ssim),
        _round6(r.pct_bits),
        _round6(r.pct_psnr_db[0]), _round6(r.pct_psnr_db[1]),
        _round6(r.pct_psnr_db[2]),
        _round6(r.pct_psnr_mse[0]), _round6(r.pct_psnr_mse[1]),
        _round6(r.pct_psnr_mse[2]),
    ]


def emit(report: ExperimentReport, out_dir) -> None:
    """Write report.csv, report.json, rate_points.csv and QP map dumps."""
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "report.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_COLUMNS)
        for r in report.records:
            writer.writerow(_fmt(v) for v in record_to_row(r))

    payload = {
        "sequence": report.sequence,
        "config": report.config,
        "records": [
            dict(zip(REPORT_COLUMNS, record_to_row(r)))
            | {"qp_histograms": r.qp_histograms}
            for r in report.records
        ],
    }
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(os.path.join(out_dir, "rate_points.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RATE_POINT_COLUMNS)
        for r in report.records:
            writer.writerow([r.qp, r.mode, r.bits, _fmt(_round6(r.ssim))])

    if report.cells:
        for (mode, qp), cell in sorted(report.cells.items()):
            sub = os.path.join(out_dir, "qpmaps", f"{mode}_qp{qp}")
            os.makedirs(sub, exist_ok=True)
            for qmap in cell.qp_maps:
                path = os.path.join(sub, f"qpmap_{qmap.frame_index:04d}.csv")
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(QPMAP_COLUMNS)
                    for row in qmap.rows():
                        writer.writerow(_fmt(v) for v in row)
