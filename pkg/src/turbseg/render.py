"""Deterministic overlay rendering shared by the batch dump and the
calibration service; both must emit identical bytes for identical inputs."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .proposal import BoxProposal

# Mask highlight: 50% blend toward green; box outlines in red.
_BOX_COLOR = (255, 48, 48)


def render_overlay(
    frame: np.ndarray, mask: np.ndarray, boxes: list[BoxProposal]
) -> bytes:
    """Grayscale frame + alpha-blended mask + 1-px box outlines, as PNG bytes.

    All arithmetic is integer so the rendering is platform-independent.
    """
    frame = np.asarray(frame, dtype=np.uint8)
    rgb = np.repeat(frame[:, :, None], 3, axis=2).astype(np.int32)
    on = np.asarray(mask) != 0
    rgb[on, 0] = frame[on] // 2
    rgb[on, 1] = (frame[on].astype(np.int32) + 255) // 2
    rgb[on, 2] = frame[on] // 2
    for box in boxes:
        rgb[box.y0, box.x0 : box.x1] = _BOX_COLOR
        rgb[box.y1 - 1, box.x0 : box.x1] = _BOX_COLOR
        rgb[box.y0 : box.y1, box.x0] = _BOX_COLOR
        rgb[box.y0 : box.y1, box.x1 - 1] = _BOX_COLOR
    return encode_png(rgb.astype(np.uint8))


def render_heatmap(score: np.ndarray) -> bytes:
    """Score map in [0, 1] rendered as grayscale PNG bytes."""
    level = np.clip(np.floor(np.asarray(score) * 255.0 + 0.5), 0, 255)
    return encode_png(level.astype(np.uint8))


def encode_png(array: np.ndarray) -> bytes:
    mode = "L" if array.ndim == 2 else "RGB"
    buf = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buf, format="PNG")
    return buf.getvalue()
