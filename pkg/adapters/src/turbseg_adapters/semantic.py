"""Semantic objectness adapter: per-frame saliency maps in [0, 1] as PFM.

Backends:

* `spectral` (default): spectral-residual saliency. Classical, weight-free,
  and a reasonable objectness stand-in: it responds to spatially coherent
  structure and stays quiet on texture-free regions.
* `dinov2`: patch-feature saliency from a pretrained self-supervised ViT
  (torch.hub). The map is the per-patch feature energy after removing the
  mean patch feature, upsampled to frame size. Requires torch and a
  downloadable checkpoint.

Both normalize by the 99th-percentile response with an absolute floor, so
a featureless frame maps to near-zero everywhere instead of amplifying
numerical noise to full scale.
"""

from __future__ import annotations

import logging
from pathlib import Path

import cv2
import numpy as np

from .fileio import list_frames, load_gray, write_pfm
from .manifest import write_manifest

logger = logging.getLogger(__name__)

_NORM_FLOOR = 1e-4


def _normalize(raw: np.ndarray) -> np.ndarray:
    denom = max(float(np.percentile(raw, 99.0)), _NORM_FLOOR)
    return np.clip(raw / denom, 0.0, 1.0).astype(np.float32)


def spectral_residual(gray: np.ndarray) -> np.ndarray:
    """Hou-Zhang spectral residual saliency, normalized to [0, 1]."""
    small = cv2.resize(gray, (64, 64), interpolation=cv2.INTER_AREA).astype(np.float64)
    spectrum = np.fft.fft2(small)
    log_amp = np.log1p(np.abs(spectrum))
    phase = np.angle(spectrum)
    residual = log_amp - cv2.blur(log_amp, (3, 3))
    saliency = np.abs(np.fft.ifft2(np.expm1(residual) * np.exp(1j * phase))) ** 2
    saliency = cv2.GaussianBlur(saliency, (9, 9), 2.5)
    saliency = cv2.resize(saliency, (gray.shape[1], gray.shape[0]), interpolation=cv2.INTER_LINEAR)
    return _normalize(saliency)


class _Dinov2Backend:
    def __init__(self, model_name: str = "dinov2_vits14"):
        import torch

        self.torch = torch
        self.model = torch.hub.load("facebookresearch/dinov2", model_name).eval()
        self.model_id = f"facebookresearch/dinov2:{model_name}"
        self.patch = 14

    def __call__(self, gray: np.ndarray) -> np.ndarray:
        torch = self.torch
        h, w = gray.shape
        gh, gw = max(1, h // self.patch), max(1, w // self.patch)
        t = torch.from_numpy(gray).float().div_(255.0)
        t = t.unsqueeze(0).repeat(3, 1, 1).unsqueeze(0)
        t = torch.nn.functional.interpolate(
            t, size=(gh * self.patch, gw * self.patch), mode="bilinear"
        )
        with torch.no_grad():
            feats = self.model.forward_features(t)["x_norm_patchtokens"][0]
        feats = feats - feats.mean(dim=0, keepdim=True)
        energy = feats.norm(dim=1).reshape(gh, gw).numpy().astype(np.float64)
        energy = cv2.resize(energy, (w, h), interpolation=cv2.INTER_LINEAR)
        return _normalize(energy)


def make_backend(name: str):
    if name == "spectral":
        return spectral_residual, "spectral-residual-64"
    if name == "dinov2":
        backend = _Dinov2Backend()
        return backend, backend.model_id
    raise ValueError(f"unknown semantic backend {name!r}")


def run_semantic_adapter(
    frames_dir: str | Path,
    out_dir: str | Path,
    backend: str = "spectral",
    pattern: str = "*.png",
) -> int:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {"pattern": pattern, "frames_dir": str(frames_dir)}
    try:
        extractor, model_id = make_backend(backend)
    except Exception as exc:
        write_manifest(out_dir, "semantic", backend, params, status="failed", error=str(exc))
        raise

    written = 0
    try:
        for t, path in enumerate(list_frames(frames_dir, pattern)):
            objectness = extractor(load_gray(path))
            write_pfm(objectness, out_dir / f"frame_{t:06}.pfm")
            written += 1
    except Exception as exc:
        write_manifest(out_dir, "semantic", model_id, params, status="failed", error=str(exc))
        raise
    write_manifest(out_dir, "semantic", model_id, params)
    logger.info("semantic adapter wrote %d maps to %s", written, out_dir)
    return written
