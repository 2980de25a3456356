"""Synthetic turbulence benchmark sequences with exact ground truth.

A textured static background is warped per frame by a smooth random
displacement field (the pseudo-motion stand-in), and one bright textured
square moves slowly across it. Slow object motion plus jitter of similar
magnitude is exactly the regime where a single adjacent-frame motion cue
struggles and skip-frame flow and background modeling help.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import frameio


@dataclass
class SynthConfig:
    width: int = 128
    height: int = 96
    frames: int = 60
    jitter_sigma: float = 1.0   # std-dev of the per-pixel warp, in pixels
    object_size: int = 12
    object_intensity: int = 215
    speed_x: float = 0.8        # pixels per frame
    speed_y: float = 0.2
    start_x: int = 8
    start_y: int = 40
    seed: int = 7


def _smooth_field(rng: np.random.Generator, shape: tuple[int, int], cell: int) -> np.ndarray:
    """Bilinearly upsampled coarse Gaussian noise: smooth, zero-mean, unit std."""
    h, w = shape
    gh, gw = h // cell + 2, w // cell + 2
    coarse = rng.standard_normal((gh, gw))
    zoom = (h / gh, w / gw)
    return ndimage.zoom(coarse, zoom, order=1, mode="nearest", grid_mode=True)


def generate_sequence(cfg: SynthConfig | None = None) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Return (frames, ground-truth masks), both lists of (H, W) uint8."""
    cfg = cfg or SynthConfig()
    h, w = cfg.height, cfg.width
    rng = np.random.default_rng(cfg.seed)

    base = 90.0 + 45.0 * _smooth_field(rng, (h, w), cell=12)
    base += 8.0 * rng.standard_normal((h, w))  # fine static texture
    base = np.clip(base, 20.0, 170.0)

    obj = cfg.object_intensity + 12.0 * _smooth_field(
        rng, (cfg.object_size, cfg.object_size), cell=3
    )
    obj = np.clip(obj, 0.0, 255.0)

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    frames = []
    masks = []
    for t in range(cfg.frames):
        dx = cfg.jitter_sigma * _smooth_field(rng, (h, w), cell=16)
        dy = cfg.jitter_sigma * _smooth_field(rng, (h, w), cell=16)
        warped = ndimage.map_coordinates(
            base, [yy + dy, xx + dx], order=1, mode="nearest"
        )
        frame = np.clip(np.floor(warped + 0.5), 0, 255).astype(np.uint8)

        ox = int(round(cfg.start_x + cfg.speed_x * t))
        oy = int(round(cfg.start_y + cfg.speed_y * t))
        mask = np.zeros((h, w), dtype=np.uint8)
        x0, y0 = max(0, ox), max(0, oy)
        x1 = min(w, ox + cfg.object_size)
        y1 = min(h, oy + cfg.object_size)
        if x1 > x0 and y1 > y0:
            patch = obj[y0 - oy : y1 - oy, x0 - ox : x1 - ox]
            frame[y0:y1, x0:x1] = np.clip(np.floor(patch + 0.5), 0, 255).astype(np.uint8)
            mask[y0:y1, x0:x1] = 1
        frames.append(frame)
        masks.append(mask)
    return frames, masks


def write_sequence(
    frames: list[np.ndarray],
    masks: list[np.ndarray] | None,
    frames_dir: str | Path,
    gt_dir: str | Path | None = None,
) -> None:
    frames_dir = Path(frames_dir)
    frames_dir.mkdir(parents=True, exist_ok=True)
    for t, frame in enumerate(frames):
        frameio.write_frame(frame, frames_dir / f"frame_{t:06}.png")
    if masks is not None and gt_dir is not None:
        gt_dir = Path(gt_dir)
        gt_dir.mkdir(parents=True, exist_ok=True)
        for t, mask in enumerate(masks):
            frameio.write_mask(mask, gt_dir / f"frame_{t:06}.png")
