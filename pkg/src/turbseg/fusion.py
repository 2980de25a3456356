"""Weighted multi-cue fusion and thresholding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass
class FusionWeights:
    alpha: float = 0.4   # adjacent motion
    beta: float = 0.3    # skip-frame motion
    gamma: float = 0.2   # semantic prior
    delta: float = 0.1   # background anomaly

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma, self.delta)
        if any(v < 0 for v in vals):
            raise ConfigError("fusion weights must be nonnegative")
        if all(v == 0 for v in vals):
            raise ConfigError("at least one fusion weight must be positive")


@dataclass
class FusionConfig:
    weights: FusionWeights = field(default_factory=FusionWeights)
    tau: float = 0.35
    semantic_pregate: bool = False
    pregate_epsilon: float = 0.3

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError("tau must be in (0, 1]")
        if not 0.0 <= self.pregate_epsilon <= 1.0:
            raise ConfigError("pregate_epsilon must be in [0, 1]")


def fuse(bundle, w: FusionWeights) -> np.ndarray:
    """Per-pixel weighted sum of the four cue maps, clamped to [0, 1]."""
    s = (
        w.alpha * bundle.m.astype(np.float64)
        + w.beta * bundle.m_skip.astype(np.float64)
        + w.gamma * bundle.p_sem.astype(np.float64)
        + w.delta * bundle.b.astype(np.float64)
    )
    return np.clip(s, 0.0, 1.0).astype(np.float32)


def pregate_motion(m: np.ndarray, p_sem: np.ndarray, epsilon: float) -> np.ndarray:
    """Multiplicative semantic gating of the motion map.

    m * (eps + (1 - eps) * p_sem): with eps < 1 the semantic prior damps
    motion responses that lack object structure without ever zeroing them.
    """
    gated = m.astype(np.float64) * (epsilon + (1.0 - epsilon) * p_sem.astype(np.float64))
    return gated.astype(np.float32)


def fuse_config(bundle, cfg: FusionConfig) -> np.ndarray:
    """`fuse` with the optional semantic pre-gate applied first.

    This is the single fusion entry point shared by the batch pipeline and
    the calibration service, so both paths stay bit-identical.
    """
    if cfg.semantic_pregate:
        bundle = bundle.with_motion(pregate_motion(bundle.m, bundle.p_sem, cfg.pregate_epsilon))
    return fuse(bundle, cfg.weights)


def binarize(s: np.ndarray, tau: float) -> np.ndarray:
    """Threshold a score map: bit = 1 iff s >= tau."""
    return (np.asarray(s) >= tau).astype(np.uint8)
