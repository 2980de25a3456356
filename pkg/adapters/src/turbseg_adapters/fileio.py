"""Writers/readers for the pipeline exchange formats.

Deliberately self-contained: the adapters talk to the segmentation
pipeline only through these files, so this module reimplements the byte
layouts instead of importing the pipeline package.

* `.flo`: float32 magic 202021.25, int32 width, int32 height, then
  row-major interleaved (u, v) float32 pairs, all little-endian.
* grayscale PFM: "Pf\\n{w} {h}\\n-1.0\\n" then float32 rows, bottom first.
* masks: 8-bit grayscale PNG holding only {0, 255}.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import cv2
import numpy as np

FLO_MAGIC = 202021.25


def write_flo(field: np.ndarray, path: str | Path) -> None:
    field = np.asarray(field, dtype=np.float32)
    assert field.ndim == 3 and field.shape[2] == 2, field.shape
    h, w = field.shape[:2]
    with open(path, "wb") as f:
        f.write(struct.pack("<fii", FLO_MAGIC, w, h))
        f.write(np.ascontiguousarray(field, dtype="<f4").tobytes())


def write_pfm(values: np.ndarray, path: str | Path) -> None:
    values = np.asarray(values, dtype=np.float32)
    assert values.ndim == 2, values.shape
    h, w = values.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{w} {h}\n-1.0\n".encode("ascii"))
        f.write(np.ascontiguousarray(np.flipud(values), dtype="<f4").tobytes())


def write_mask_png(mask: np.ndarray, path: str | Path) -> None:
    out = np.where(np.asarray(mask) > 0, 255, 0).astype(np.uint8)
    if not cv2.imwrite(str(path), out):
        raise OSError(f"failed to write {path}")


def load_gray(path: str | Path) -> np.ndarray:
    img = cv2.imread(str(path), cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise OSError(f"unreadable image {path}")
    return img


def list_frames(directory: str | Path, pattern: str = "*.png") -> list[Path]:
    """Frames sorted by the last digit run in the file name."""
    paths = sorted(Path(directory).glob(pattern))
    if not paths:
        raise FileNotFoundError(f"no frames matching {pattern!r} in {directory}")

    def index(p: Path) -> int:
        runs = re.findall(r"\d+", p.stem)
        if not runs:
            raise ValueError(f"no frame index in {p.name!r}")
        return int(runs[-1])

    return [p for _, p in sorted((index(p), p) for p in paths)]


def read_prompts(path: str | Path) -> list[list[dict]]:
    """Parse the prompt JSONL into per-frame box dict lists."""
    import json

    frames = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record["frame"] != len(frames):
            raise ValueError(f"prompt frames out of order at {record['frame']}")
        frames.append(record["boxes"])
    return frames
