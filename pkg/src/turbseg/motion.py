"""Motion cues: block-matching optical flow and score-map normalization.

The built-in estimator is deliberately classical: coarse-to-fine integer
block matching over a box-filtered image pyramid. It needs no model
weights, is deterministic down to the tie-breaking rule, and produces the
same kind of magnitude map an external flow estimator would deliver
through `frameio.read_flow`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError


@dataclass
class FlowConfig:
    pyramid_levels: int = 3
    block: int = 8
    search_radius: int = 4

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ConfigError("pyramid_levels must be >= 1")
        if self.block < 2:
            raise ConfigError("block must be >= 2")
        if self.search_radius < 1:
            raise ConfigError("search_radius must be >= 1")


@dataclass
class SkipConfig:
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("skip interval k must be >= 1")


@dataclass
class NormConfig:
    percentile: float = 99.0

    def __post_init__(self):
        if not 0.0 < self.percentile <= 100.0:
            raise ConfigError("percentile must be in (0, 100]")


def _downsample(img: np.ndarray) -> np.ndarray:
    """Factor-2 box-filtered downsample; odd trailing row/col is dropped."""
    h2, w2 = img.shape[0] // 2, img.shape[1] // 2
    c = img[: 2 * h2, : 2 * w2]
    return (c[0::2, 0::2] + c[1::2, 0::2] + c[0::2, 1::2] + c[1::2, 1::2]) // 4


def _block_anchors(size: int, block: int) -> np.ndarray:
    """Left/top coordinates of the block grid; the last block is anchored
    to the image edge so every block is full-sized."""
    n = max(1, math.ceil(size / block))
    return np.minimum(np.arange(n) * block, size - block)


def estimate_flow(a: np.ndarray, b: np.ndarray, cfg: FlowConfig | None = None) -> np.ndarray:
    """Dense flow from `a` to `b` as an (H, W, 2) float32 (u, v) field.

    Coarse-to-fine: each pyramid level refines the doubled estimate of the
    level above with an integer SAD search, and the level-0 per-block flow
    is bilinearly interpolated to pixels.
    """
    cfg = cfg or FlowConfig()
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")

    pyr_a = [a.astype(np.int32)]
    pyr_b = [b.astype(np.int32)]
    for _ in range(cfg.pyramid_levels - 1):
        pyr_a.append(_downsample(pyr_a[-1]))
        pyr_b.append(_downsample(pyr_b[-1]))
    ch, cw = pyr_a[-1].shape
    if ch < cfg.block or cw < cfg.block:
        raise ValueError(
            f"coarsest level {cw}x{ch} is smaller than one {cfg.block}px block"
        )

    flow = None
    for level in range(cfg.pyramid_levels - 1, -1, -1):
        al, bl = pyr_a[level], pyr_b[level]
        ys = _block_anchors(al.shape[0], cfg.block)
        xs = _block_anchors(al.shape[1], cfg.block)
        prior = np.zeros((len(ys), len(xs), 2), dtype=np.int32)
        if flow is not None:
            # nearest coarser block under each finer block center, doubled
            cyc = (ys + cfg.block // 2) // 2 // cfg.block
            cxc = (xs + cfg.block // 2) // 2 // cfg.block
            cyc = np.clip(cyc, 0, flow.shape[0] - 1)
            cxc = np.clip(cxc, 0, flow.shape[1] - 1)
            prior = 2 * flow[np.ix_(cyc, cxc)]
        flow = _kernels.block_match_level(
            np.ascontiguousarray(al),
            np.ascontiguousarray(bl),
            np.ascontiguousarray(prior),
            cfg.block,
            cfg.search_radius,
        )

    return _blocks_to_pixels(flow, a.shape, cfg.block)


def _blocks_to_pixels(flow: np.ndarray, shape: tuple[int, int], block: int) -> np.ndarray:
    """Bilinear interpolation of per-block flow to per-pixel, edge-clamped."""
    h, w = shape
    cy = _block_anchors(h, block) + (block - 1) / 2.0
    cx = _block_anchors(w, block) + (block - 1) / 2.0
    out = np.empty((h, w, 2), dtype=np.float32)
    for c in range(2):
        rows = np.empty((flow.shape[0], w))
        for i in range(flow.shape[0]):
            rows[i] = np.interp(np.arange(w), cx, flow[i, :, c].astype(np.float64))
        cols = np.empty((h, w))
        for j in range(w):
            cols[:, j] = np.interp(np.arange(h), cy, rows[:, j])
        out[:, :, c] = cols.astype(np.float32)
    return out


def flow_magnitude(field: np.ndarray) -> np.ndarray:
    """Per-pixel sqrt(u^2 + v^2) as a raw (unnormalized) float32 score map."""
    field = np.asarray(field)
    u = field[..., 0].astype(np.float64)
    v = field[..., 1].astype(np.float64)
    return np.sqrt(u * u + v * v).astype(np.float32)


def skip_pair(t: int, k: int, t_count: int) -> tuple[int, int]:
    """(source, destination) frame indices for the gap-k flow of frame t.

    Forward pair (t, t+k) when it fits; near the tail, fall back to the
    backward pair (t-k, t); if that is degenerate (t == 0), clamp the
    destination to the last frame instead.
    """
    if t_count < 2:
        raise ValueError("need at least 2 frames to form a flow pair")
    if not 0 <= t < t_count:
        raise ValueError(f"frame index {t} out of range [0, {t_count})")
    if k < 1:
        raise ValueError("skip interval k must be >= 1")
    if t + k <= t_count - 1:
        return t, t + k
    src = max(0, t - k)
    if src < t:
        return src, t
    return t, min(t + k, t_count - 1)


def normalize_score(raw: np.ndarray, cfg: NormConfig | None = None) -> np.ndarray:
    """Divide by the cfg.percentile-th percentile and clamp into [0, 1].

    The percentile is the sorted value at rank ceil((n-1) * p / 100). An
    all-zero percentile returns the all-zero map (nothing to normalize).
    """
    cfg = cfg or NormConfig()
    raw = np.asarray(raw)
    if not np.isfinite(raw).all():
        raise ValueError("raw score map contains non-finite values")
    if raw.size and raw.min() < 0:
        raise ValueError("raw score map contains negative values")
    flat = raw.reshape(-1)
    rank = min(flat.size - 1, math.ceil((flat.size - 1) * cfg.percentile / 100.0))
    denom = float(np.partition(flat, rank)[rank])
    if denom == 0.0:
        return np.zeros_like(raw, dtype=np.float32)
    return np.clip(raw / denom, 0.0, 1.0).astype(np.float32)
