"""Box-prompted mask refinement adapter.

Reads the pipeline's prompt JSONL, refines each box against the frame, and
writes one merged `refined_{t:06}.png` per frame (union over boxes; empty
prompt list means an all-zero mask). Backends:

* `grabcut` (default): GrabCut initialized with the prompt rectangle.
  Weight-free; an honest classical counterpart to promptable segmenters.
* `sam2`: pretrained promptable video segmenter, if installed.
"""

from __future__ import annotations

import logging
from pathlib import Path

import cv2
import numpy as np

from .fileio import list_frames, load_gray, read_prompts, write_mask_png
from .manifest import write_manifest

logger = logging.getLogger(__name__)


def _grabcut_box(gray: np.ndarray, box: dict) -> np.ndarray:
    """Segment inside one prompt box; falls back to filling the box when
    GrabCut cannot separate anything (the prompt asserts an object)."""
    h, w = gray.shape
    x0, y0 = max(0, box["x0"]), max(0, box["y0"])
    x1, y1 = min(w, box["x1"]), min(h, box["y1"])
    out = np.zeros((h, w), np.uint8)
    if x1 - x0 < 2 or y1 - y0 < 2:
        out[y0:y1, x0:x1] = 1
        return out
    # GrabCut needs background pixels outside the rect; inset a
    # full-frame box by one pixel
    rx0, ry0, rx1, ry1 = x0, y0, x1, y1
    if rx0 == 0 and rx1 == w:
        rx0, rx1 = 1, w - 1
    if ry0 == 0 and ry1 == h:
        ry0, ry1 = 1, h - 1
    rect = (rx0, ry0, max(1, rx1 - rx0), max(1, ry1 - ry0))
    img = cv2.cvtColor(gray, cv2.COLOR_GRAY2BGR)
    state = np.zeros((h, w), np.uint8)
    cv2.setRNGSeed(7)
    try:
        cv2.grabCut(
            img, state, rect,
            np.zeros((1, 65), np.float64), np.zeros((1, 65), np.float64),
            3, cv2.GC_INIT_WITH_RECT,
        )
        fg = (state == cv2.GC_FGD) | (state == cv2.GC_PR_FGD)
    except cv2.error:
        fg = np.zeros((h, w), bool)
    if not fg.any():
        out[y0:y1, x0:x1] = 1
        return out
    out[fg] = 1
    # constrain to the prompt area: the refiner must not wander
    constrained = np.zeros((h, w), np.uint8)
    constrained[y0:y1, x0:x1] = out[y0:y1, x0:x1]
    if not constrained.any():
        constrained[y0:y1, x0:x1] = 1
    return constrained


class _GrabcutBackend:
    model_id = "opencv/grabCut"

    def __call__(self, gray: np.ndarray, boxes: list[dict]) -> np.ndarray:
        mask = np.zeros(gray.shape, np.uint8)
        for box in boxes:
            mask |= _grabcut_box(gray, box)
        return mask


class _Sam2Backend:
    def __init__(self, checkpoint: str | None = None):
        from sam2.sam2_image_predictor import SAM2ImagePredictor

        self.predictor = SAM2ImagePredictor.from_pretrained(
            checkpoint or "facebook/sam2-hiera-small"
        )
        self.model_id = checkpoint or "facebook/sam2-hiera-small"

    def __call__(self, gray: np.ndarray, boxes: list[dict]) -> np.ndarray:
        import numpy as np

        mask = np.zeros(gray.shape, np.uint8)
        if not boxes:
            return mask
        rgb = cv2.cvtColor(gray, cv2.COLOR_GRAY2RGB)
        self.predictor.set_image(rgb)
        for box in boxes:
            prompts = np.array([box["x0"], box["y0"], box["x1"], box["y1"]])
            masks, scores, _ = self.predictor.predict(box=prompts, multimask_output=False)
            mask |= (masks[0] > 0.5).astype(np.uint8)
        return mask


def make_backend(name: str):
    if name == "grabcut":
        return _GrabcutBackend()
    if name == "sam2":
        return _Sam2Backend()
    raise ValueError(f"unknown refiner backend {name!r}")


def run_refiner_adapter(
    frames_dir: str | Path,
    prompts_path: str | Path,
    out_dir: str | Path,
    backend: str = "grabcut",
    pattern: str = "*.png",
) -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {
        "pattern": pattern,
        "frames_dir": str(frames_dir),
        "prompts": str(prompts_path),
    }
    try:
        refiner = make_backend(backend)
    except Exception as exc:
        write_manifest(out_dir, "refiner", backend, params, status="failed", error=str(exc))
        raise

    prompts = read_prompts(prompts_path)
    paths = list_frames(frames_dir, pattern)
    if len(paths) != len(prompts):
        write_manifest(
            out_dir, "refiner", refiner.model_id, params,
            status="failed",
            error=f"{len(paths)} frames vs {len(prompts)} prompt records",
        )
        raise ValueError(f"{len(paths)} frames vs {len(prompts)} prompt records")

    written = 0
    try:
        for t, path in enumerate(paths):
            mask = refiner(load_gray(path), prompts[t])
            write_mask_png(mask, out_dir / f"refined_{t:06}.png")
            written += 1
    except Exception as exc:
        write_manifest(out_dir, "refiner", refiner.model_id, params, status="failed", error=str(exc))
        raise
    write_manifest(out_dir, "refiner", refiner.model_id, params)
    logger.info("refiner adapter wrote %d masks to %s", written, out_dir)
    return written
