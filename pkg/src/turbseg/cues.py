"""Per-frame assembly of the four cue maps feeding fusion.

Each cue role (adjacent motion, skip motion, semantic prior, background
anomaly) is either computed by a built-in provider or ingested from a cue
directory of per-frame PFM files; motion roles may alternatively supply
raw `.flo` flow that gets converted and normalized on the way in. A
missing optional cue is substituted with zeros, which by linearity of the
fusion sum is the same as giving it zero weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import frameio, motion
from .errors import ConfigError, FormatError

ROLES = ("motion", "skip_motion", "semantic", "background")


@dataclass
class CueSource:
    role: str
    origin: str = "builtin"  # "builtin" | "files"
    directory: str | Path | None = None
    normalization: motion.NormConfig | None = None
    optional: bool = False

    def __post_init__(self):
        if self.role not in ROLES:
            raise ConfigError(f"unknown cue role {self.role!r}")
        if self.origin not in ("builtin", "files"):
            raise ConfigError(f"unknown cue origin {self.origin!r}")
        if self.role == "semantic" and self.origin == "builtin":
            raise ConfigError("the semantic cue has no built-in provider")
        if self.origin == "files" and self.directory is None and not self.optional:
            raise ConfigError(f"file-backed cue {self.role!r} needs a directory")


@dataclass
class CueBundle:
    t: int
    m: np.ndarray
    m_skip: np.ndarray
    p_sem: np.ndarray
    b: np.ndarray

    def with_motion(self, m: np.ndarray) -> "CueBundle":
        return CueBundle(t=self.t, m=m, m_skip=self.m_skip, p_sem=self.p_sem, b=self.b)


@dataclass
class CueContext:
    """Sequence-level inputs the assembler needs beyond the sources."""

    dims: tuple[int, int]  # (height, width)
    t_count: int
    builtin: Mapping[str, Callable[[int], np.ndarray]] = field(default_factory=dict)
    skip_k: int = 5
    zero_until: Mapping[str, int] = field(default_factory=dict)


def cue_map_path(directory: str | Path, t: int) -> Path:
    return Path(directory) / f"frame_{t:06}.pfm"


def flow_file_path(directory: str | Path, src: int, dst: int) -> Path:
    return Path(directory) / f"flow_{src:06}_{dst:06}.flo"


def _validate(values: np.ndarray, role: str, t: int, dims: tuple[int, int]) -> np.ndarray:
    if values.shape != dims:
        raise FormatError(
            f"cue {role!r} frame {t} has shape {values.shape}, expected {dims}"
        )
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise FormatError(f"cue {role!r} frame {t} has values outside [0, 1]")
    return np.asarray(values, dtype=np.float32)


def _resolve_files(source: CueSource, t: int, ctx: CueContext) -> np.ndarray | None:
    if source.directory is None:
        return None
    pfm = cue_map_path(source.directory, t)
    if pfm.exists():
        return frameio.read_score_map(pfm)
    if source.role in ("motion", "skip_motion"):
        k = 1 if source.role == "motion" else ctx.skip_k
        src, dst = motion.skip_pair(t, k, ctx.t_count)
        flo = flow_file_path(source.directory, src, dst)
        if flo.exists():
            mag = motion.flow_magnitude(frameio.read_flow(flo))
            return motion.normalize_score(mag, source.normalization or motion.NormConfig())
    return None


def assemble_bundle(t: int, sources: list[CueSource], ctx: CueContext) -> CueBundle:
    """Build the cue bundle for frame t; raises if a required cue is missing."""
    by_role = {source.role: source for source in sources}
    missing_roles = [r for r in ROLES if r not in by_role]
    if missing_roles:
        raise ConfigError(f"no cue source for roles {missing_roles}")

    zeros = np.zeros(ctx.dims, dtype=np.float32)
    maps = {}
    for role in ROLES:
        source = by_role[role]
        if t < ctx.zero_until.get(role, 0):
            maps[role] = zeros
            continue
        if source.origin == "builtin":
            provider = ctx.builtin.get(role)
            if provider is None:
                raise ConfigError(f"no built-in provider wired for cue {role!r}")
            maps[role] = _validate(provider(t), role, t, ctx.dims)
            continue
        values = _resolve_files(source, t, ctx)
        if values is None:
            if not source.optional:
                raise FormatError(
                    f"required cue {role!r} missing for frame {t} "
                    f"in {source.directory}"
                )
            maps[role] = zeros
        else:
            maps[role] = _validate(values, role, t, ctx.dims)

    return CueBundle(
        t=t,
        m=maps["motion"],
        m_skip=maps["skip_motion"],
        p_sem=maps["semantic"],
        b=maps["background"],
    )
