"""Sample-based background modeling (ViBe variant).

Each pixel keeps a reservoir of historical intensities. A pixel is
background when enough reservoir samples sit within an intensity radius of
the current observation; background pixels stochastically refresh their
own reservoir and one neighbor's. The anomaly map is emitted as a {0.0,
1.0} float32 score map so fusion can consume it like any other cue.

Determinism contract: all randomness comes from one seeded generator and
is consumed as whole row-major arrays per step, before any update is
applied. Identical seeds therefore give bit-identical model evolution on
either kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError


@dataclass
class VibeParams:
    samples_n: int = 20
    radius_r: int = 20
    min_matches: int = 2
    subsample_phi: int = 16
    rng_seed: int = 42

    def __post_init__(self):
        if self.min_matches < 1:
            raise ConfigError("min_matches must be >= 1")
        if self.samples_n < self.min_matches:
            raise ConfigError("samples_n must be >= min_matches")
        if self.radius_r < 0:
            raise ConfigError("radius_r must be >= 0")
        if self.subsample_phi < 1:
            raise ConfigError("subsample_phi must be >= 1")


@dataclass
class VibeModel:
    reservoir: np.ndarray  # (H, W, samples_n) uint8
    params: VibeParams
    rng: np.random.Generator = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.reservoir.shape[:2]


def vibe_init(first: np.ndarray, params: VibeParams | None = None) -> VibeModel:
    """Seed every pixel's reservoir from its clamped 9-point neighborhood."""
    params = params or VibeParams()
    first = np.asarray(first, dtype=np.uint8)
    h, w = first.shape
    rng = np.random.default_rng(params.rng_seed)

    picks = rng.integers(0, 9, size=(h, w, params.samples_n))
    offs = _kernels.NBR9[picks]  # (H, W, N, 2) of (dy, dx)
    ys = np.clip(np.arange(h)[:, None, None] + offs[..., 0], 0, h - 1)
    xs = np.clip(np.arange(w)[None, :, None] + offs[..., 1], 0, w - 1)
    reservoir = np.ascontiguousarray(first[ys, xs])
    return VibeModel(reservoir=reservoir, params=params, rng=rng)


def vibe_step(model: VibeModel, frame: np.ndarray) -> np.ndarray:
    """Classify `frame`, update the model in place, return the anomaly map.

    The random draws happen up front in a fixed order (own gate, own slot,
    neighbor gate, neighbor pick, neighbor slot) so the stream consumption
    does not depend on the classification outcome.
    """
    frame = np.asarray(frame, dtype=np.uint8)
    h, w = model.shape
    if frame.shape != (h, w):
        raise ValueError(f"frame shape {frame.shape} does not match model {(h, w)}")

    p = model.params
    rng = model.rng
    inv_phi = 1.0 / p.subsample_phi
    own_gate = (rng.random((h, w)) < inv_phi).astype(np.uint8)
    own_slot = rng.integers(0, p.samples_n, size=(h, w), dtype=np.int32)
    nbr_gate = (rng.random((h, w)) < inv_phi).astype(np.uint8)
    nbr_choice = rng.integers(0, 8, size=(h, w), dtype=np.int32)
    nbr_slot = rng.integers(0, p.samples_n, size=(h, w), dtype=np.int32)

    fg = _kernels.vibe_step_kernel(
        model.reservoir,
        np.ascontiguousarray(frame),
        p.radius_r,
        p.min_matches,
        own_gate,
        own_slot,
        nbr_gate,
        nbr_choice,
        nbr_slot,
    )
    return np.asarray(fg, dtype=np.float32)
