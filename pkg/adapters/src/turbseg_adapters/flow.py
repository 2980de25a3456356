"""Dense optical flow adapter.

Emits `flow_{src:06}_{dst:06}.flo` for all adjacent pairs and for the
skip-interval pairs the pipeline's cue loader looks up. Backends:

* `farneback` (default): classical polynomial-expansion flow, no weights,
  runs anywhere.
* `raft`: pretrained RAFT (torchvision); needs torch and downloadable
  checkpoint files.

A failed model load still writes a manifest with status "failed" so a
partial run is diagnosable.
"""

from __future__ import annotations

import logging
from pathlib import Path

import cv2
import numpy as np

from .fileio import list_frames, load_gray, write_flo
from .manifest import write_manifest

logger = logging.getLogger(__name__)


def skip_pair(t: int, k: int, t_count: int) -> tuple[int, int]:
    """Pipeline pairing rule: forward (t, t+k), backward near the tail,
    clamped forward when t == 0 leaves no backward room."""
    if t + k <= t_count - 1:
        return t, t + k
    src = max(0, t - k)
    if src < t:
        return src, t
    return t, min(t + k, t_count - 1)


def required_pairs(t_count: int, k: int) -> list[tuple[int, int]]:
    pairs = set()
    for t in range(t_count):
        pairs.add(skip_pair(t, 1, t_count))
        if k != 1:
            pairs.add(skip_pair(t, k, t_count))
    return sorted(pairs)


def _farneback(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return cv2.calcOpticalFlowFarneback(
        a, b, None,
        pyr_scale=0.5, levels=3, winsize=15,
        iterations=3, poly_n=5, poly_sigma=1.2, flags=0,
    ).astype(np.float32)


class _RaftBackend:
    def __init__(self):
        import torch
        from torchvision.models.optical_flow import Raft_Small_Weights, raft_small

        self.torch = torch
        self.model = raft_small(weights=Raft_Small_Weights.DEFAULT).eval()
        self.model_id = "torchvision/raft_small_C_T_V2"

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        torch = self.torch

        def prep(img):
            t = torch.from_numpy(img).float().div_(127.5).sub_(1.0)
            t = t.unsqueeze(0).repeat(3, 1, 1).unsqueeze(0)
            # RAFT wants dims divisible by 8
            h, w = img.shape
            ph, pw = (-h) % 8, (-w) % 8
            return torch.nn.functional.pad(t, (0, pw, 0, ph), mode="replicate"), (h, w)

        with torch.no_grad():
            ta, (h, w) = prep(a)
            tb, _ = prep(b)
            flow = self.model(ta, tb)[-1][0, :, :h, :w]
        return flow.permute(1, 2, 0).numpy().astype(np.float32)


def make_backend(name: str):
    if name == "farneback":
        fn = _farneback
        return fn, "opencv/calcOpticalFlowFarneback"
    if name == "raft":
        backend = _RaftBackend()
        return backend, backend.model_id
    raise ValueError(f"unknown flow backend {name!r}")


def run_flow_adapter(
    frames_dir: str | Path,
    out_dir: str | Path,
    k: int = 5,
    backend: str = "farneback",
    pattern: str = "*.png",
) -> int:
    """Compute and write all required flow pairs; returns the file count."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {"k": k, "pattern": pattern, "frames_dir": str(frames_dir)}
    try:
        estimator, model_id = make_backend(backend)
    except Exception as exc:
        write_manifest(out_dir, "flow", backend, params, status="failed", error=str(exc))
        raise

    paths = list_frames(frames_dir, pattern)
    frames = [load_gray(p) for p in paths]
    written = 0
    try:
        for src, dst in required_pairs(len(frames), k):
            field = estimator(frames[src], frames[dst])
            write_flo(field, out_dir / f"flow_{src:06}_{dst:06}.flo")
            written += 1
    except Exception as exc:
        write_manifest(out_dir, "flow", model_id, params, status="failed", error=str(exc))
        raise
    write_manifest(out_dir, "flow", model_id, params)
    logger.info("flow adapter wrote %d fields to %s", written, out_dir)
    return written
