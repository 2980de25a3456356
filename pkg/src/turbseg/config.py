"""Declarative pipeline configuration, stored as flat TOML.

The config file is the complete behavioral surface of a run: there are no
learned parameters anywhere. The calibration service rewrites this file,
so the emitter keeps a fixed section/key order to make diffs readable.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .cues import ROLES, CueSource
from .errors import ConfigError
from .fusion import FusionConfig, FusionWeights
from .motion import FlowConfig, NormConfig, SkipConfig
from .temporal import TemporalConfig
from .vibe import VibeParams


@dataclass
class InputConfig:
    frames_dir: str = "frames"
    pattern: str = "*.png"
    name: str = "sequence"


@dataclass
class CueSourceConfig:
    origin: str = "builtin"
    directory: str = ""
    optional: bool = False
    percentile: float = 99.0


@dataclass
class VibeSection:
    samples_n: int = 20
    radius_r: int = 20
    min_matches: int = 2
    subsample_phi: int = 16
    warmup_frames: int = 10

    def params(self, seed: int) -> VibeParams:
        return VibeParams(
            samples_n=self.samples_n,
            radius_r=self.radius_r,
            min_matches=self.min_matches,
            subsample_phi=self.subsample_phi,
            rng_seed=seed,
        )


@dataclass
class ProposalConfig:
    min_area: int = 9
    margin: int = 4
    connectivity: int = 8

    def __post_init__(self):
        if self.min_area < 0:
            raise ConfigError("min_area must be >= 0")
        if self.margin < 0:
            raise ConfigError("margin must be >= 0")
        if self.connectivity not in (4, 8):
            raise ConfigError("connectivity must be 4 or 8")


@dataclass
class RefineConfig:
    mode: str = "fallback"  # "fallback" | "external"
    refined_dir: str = ""
    tau_box: float | None = None  # None: inherit the fusion tau

    def __post_init__(self):
        if self.mode not in ("fallback", "external"):
            raise ConfigError(f"unknown refine mode {self.mode!r}")
        if self.tau_box is not None and not 0.0 < self.tau_box <= 1.0:
            raise ConfigError("tau_box must be in (0, 1]")


@dataclass
class OutputConfig:
    out_dir: str = "out"
    dump_intermediates: bool = False


@dataclass
class EvalConfig:
    gt_dir: str = ""
    gt_pattern: str = "*.png"
    empty_convention: str = "one"

    def __post_init__(self):
        if self.empty_convention not in ("one", "zero", "skip"):
            raise ConfigError(f"unknown empty convention {self.empty_convention!r}")


@dataclass
class PipelineConfig:
    seed: int = 42
    workers: int = 1
    input: InputConfig = field(default_factory=InputConfig)
    cue_sources: dict = field(
        default_factory=lambda: {
            "motion": CueSourceConfig(),
            "skip_motion": CueSourceConfig(),
            "semantic": CueSourceConfig(origin="files", optional=True),
            "background": CueSourceConfig(),
        }
    )
    flow: FlowConfig = field(default_factory=FlowConfig)
    skip: SkipConfig = field(default_factory=SkipConfig)
    vibe: VibeSection = field(default_factory=VibeSection)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    proposal: ProposalConfig = field(default_factory=ProposalConfig)
    temporal: TemporalConfig = field(default_factory=TemporalConfig)
    refine: RefineConfig = field(default_factory=RefineConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    base_dir: Path = field(default_factory=Path.cwd)

    def resolve(self, path_value: str) -> Path:
        p = Path(path_value)
        return p if p.is_absolute() else self.base_dir / p

    def sources(self) -> list[CueSource]:
        out = []
        for role in ROLES:
            sc = self.cue_sources[role]
            directory = self.resolve(sc.directory) if sc.directory else None
            if sc.origin == "files" and directory is None and not sc.optional:
                raise ConfigError(f"file-backed cue {role!r} needs a directory")
            out.append(
                CueSource(
                    role=role,
                    origin=sc.origin,
                    directory=directory,
                    normalization=NormConfig(percentile=sc.percentile),
                    optional=sc.optional,
                )
            )
        return out

    def tau_box(self) -> float:
        return self.refine.tau_box if self.refine.tau_box is not None else self.fusion.tau


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"config section [{name}] must be a table")
    return dict(value)


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent.resolve())


def config_from_dict(data: dict, base_dir: Path | None = None) -> PipelineConfig:
    cue_sources = {}
    cue_data = _section(data, "cues")
    for role in ROLES:
        defaults = (
            {"origin": "files", "optional": True} if role == "semantic" else {}
        )
        cue_sources[role] = CueSourceConfig(**{**defaults, **_section(cue_data, role)})

    fusion_data = _section(data, "fusion")
    weights = FusionWeights(
        alpha=fusion_data.pop("alpha", 0.4),
        beta=fusion_data.pop("beta", 0.3),
        gamma=fusion_data.pop("gamma", 0.2),
        delta=fusion_data.pop("delta", 0.1),
    )
    refine_data = _section(data, "refine")
    if "tau_box" not in refine_data:
        refine_data["tau_box"] = None

    try:
        return PipelineConfig(
            seed=int(data.get("seed", 42)),
            workers=int(data.get("workers", 1)),
            input=InputConfig(**_section(data, "input")),
            cue_sources=cue_sources,
            flow=FlowConfig(**_section(data, "flow")),
            skip=SkipConfig(**_section(data, "skip")),
            vibe=VibeSection(**_section(data, "vibe")),
            fusion=FusionConfig(weights=weights, **fusion_data),
            proposal=ProposalConfig(**_section(data, "proposal")),
            temporal=TemporalConfig(**_section(data, "temporal")),
            refine=RefineConfig(**refine_data),
            output=OutputConfig(**_section(data, "output")),
            eval=EvalConfig(**_section(data, "eval")),
            base_dir=base_dir or Path.cwd(),
        )
    except TypeError as exc:
        raise ConfigError(f"bad config key: {exc}") from exc


def config_to_dict(cfg: PipelineConfig) -> dict:
    w = cfg.fusion.weights
    out = {
        "seed": cfg.seed,
        "workers": cfg.workers,
        "input": {
            "frames_dir": cfg.input.frames_dir,
            "pattern": cfg.input.pattern,
            "name": cfg.input.name,
        },
        "cues": {
            role: {
                "origin": sc.origin,
                "directory": sc.directory,
                "optional": sc.optional,
                "percentile": sc.percentile,
            }
            for role, sc in ((r, cfg.cue_sources[r]) for r in ROLES)
        },
        "flow": {
            "pyramid_levels": cfg.flow.pyramid_levels,
            "block": cfg.flow.block,
            "search_radius": cfg.flow.search_radius,
        },
        "skip": {"k": cfg.skip.k},
        "vibe": {
            "samples_n": cfg.vibe.samples_n,
            "radius_r": cfg.vibe.radius_r,
            "min_matches": cfg.vibe.min_matches,
            "subsample_phi": cfg.vibe.subsample_phi,
            "warmup_frames": cfg.vibe.warmup_frames,
        },
        "fusion": {
            "alpha": w.alpha,
            "beta": w.beta,
            "gamma": w.gamma,
            "delta": w.delta,
            "tau": cfg.fusion.tau,
            "semantic_pregate": cfg.fusion.semantic_pregate,
            "pregate_epsilon": cfg.fusion.pregate_epsilon,
        },
        "proposal": {
            "min_area": cfg.proposal.min_area,
            "margin": cfg.proposal.margin,
            "connectivity": cfg.proposal.connectivity,
        },
        "temporal": {
            "iou_min": cfg.temporal.iou_min,
            "gap_max": cfg.temporal.gap_max,
            "tail_propagate": cfg.temporal.tail_propagate,
        },
        "refine": {
            "mode": cfg.refine.mode,
            "refined_dir": cfg.refine.refined_dir,
            **({"tau_box": cfg.refine.tau_box} if cfg.refine.tau_box is not None else {}),
        },
        "output": {
            "out_dir": cfg.output.out_dir,
            "dump_intermediates": cfg.output.dump_intermediates,
        },
        "eval": {
            "gt_dir": cfg.eval.gt_dir,
            "gt_pattern": cfg.eval.gt_pattern,
            "empty_convention": cfg.eval.empty_convention,
        },
    }
    return out


def _toml_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ConfigError(f"cannot serialize config value {value!r}")


def dump_toml(data: dict) -> str:
    """Serialize the (two-level) config dict; tomli-w is not a dependency
    because the structure here is deliberately flat."""
    lines = []
    tables = []
    for key, value in data.items():
        if isinstance(value, dict):
            tables.append((key, value))
        else:
            lines.append(f"{key} = {_toml_value(value)}")
    for name, table in tables:
        subtables = [(k, v) for k, v in table.items() if isinstance(v, dict)]
        scalars = [(k, v) for k, v in table.items() if not isinstance(v, dict)]
        if scalars or not subtables:
            lines.append("")
            lines.append(f"[{name}]")
            lines.extend(f"{k} = {_toml_value(v)}" for k, v in scalars)
        for sub, subtable in subtables:
            lines.append("")
            lines.append(f"[{name}.{sub}]")
            lines.extend(f"{k} = {_toml_value(v)}" for k, v in subtable.items())
    return "\n".join(lines) + "\n"


def save_config(cfg: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(dump_toml(config_to_dict(cfg)))
