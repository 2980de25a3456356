"""End-to-end orchestration: cues -> fusion -> proposals -> refine -> eval.

Every stage reads its inputs from and writes its outputs to the run
directory, so any stage can be re-run in isolation from the intermediates
of a previous run and reproduce byte-identical results. Randomness (ViBe)
sits behind the single config seed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cues, frameio, fusion, metrics, motion, proposal, refine, temporal, vibe
from .config import PipelineConfig
from .errors import StageError, TurbsegError

logger = logging.getLogger(__name__)

STAGES = ("cues", "propose", "refine", "eval")


@dataclass
class RunPaths:
    out_dir: Path

    @property
    def fused_dir(self) -> Path:
        return self.out_dir / "fused"

    @property
    def masks_dir(self) -> Path:
        return self.out_dir / "masks"

    @property
    def overlays_dir(self) -> Path:
        return self.out_dir / "overlays"

    @property
    def prompts_path(self) -> Path:
        return self.out_dir / "prompts.jsonl"

    @property
    def boxes_raw_path(self) -> Path:
        return self.out_dir / "boxes_raw.jsonl"

    @property
    def eval_json_path(self) -> Path:
        return self.out_dir / "eval.json"

    @property
    def eval_table_path(self) -> Path:
        return self.out_dir / "eval.txt"

    def cue_dir(self, role: str) -> Path:
        return self.out_dir / "cues" / role

    def mask_path(self, t: int) -> Path:
        return self.masks_dir / f"mask_{t:06}.png"

    def fused_path(self, t: int) -> Path:
        return self.fused_dir / f"frame_{t:06}.pfm"


def paths_for(cfg: PipelineConfig) -> RunPaths:
    return RunPaths(out_dir=cfg.resolve(cfg.output.out_dir))


def _load_frames(cfg: PipelineConfig) -> list[np.ndarray]:
    return frameio.load_frame_sequence(
        cfg.resolve(cfg.input.frames_dir), cfg.input.pattern
    )


def _motion_maps(
    frames: list[np.ndarray],
    k: int,
    flow_cfg: motion.FlowConfig,
    norm_cfg: motion.NormConfig,
    workers: int,
) -> list[np.ndarray]:
    t_count = len(frames)

    def one(t: int) -> np.ndarray:
        src, dst = motion.skip_pair(t, k, t_count)
        field = motion.estimate_flow(frames[src], frames[dst], flow_cfg)
        return motion.normalize_score(motion.flow_magnitude(field), norm_cfg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(t_count)))
    return [one(t) for t in range(t_count)]


def _background_maps(frames: list[np.ndarray], params: vibe.VibeParams) -> list[np.ndarray]:
    model = vibe.vibe_init(frames[0], params)
    return [vibe.vibe_step(model, frame) for frame in frames]


def run_cues(cfg: PipelineConfig, paths: RunPaths) -> None:
    """Materialize all four cue roles as per-frame PFMs under the run dir."""
    frames = _load_frames(cfg)
    t_count = len(frames)
    dims = frames[0].shape
    ctx = cues.CueContext(dims=dims, t_count=t_count, skip_k=cfg.skip.k)
    zeros = np.zeros(dims, dtype=np.float32)

    for source in cfg.sources():
        role = source.role
        out_dir = paths.cue_dir(role)
        out_dir.mkdir(parents=True, exist_ok=True)
        if source.origin == "builtin":
            if role in ("motion", "skip_motion"):
                k = 1 if role == "motion" else cfg.skip.k
                maps = _motion_maps(
                    frames, k, cfg.flow, source.normalization, cfg.workers
                )
            elif role == "background":
                maps = _background_maps(frames, cfg.vibe.params(cfg.seed))
            else:
                raise StageError("cues", f"cue {role!r} has no built-in provider")
        else:
            maps = []
            for t in range(t_count):
                values = cues._resolve_files(source, t, ctx)
                if values is None:
                    if not source.optional:
                        raise StageError(
                            "cues", f"required cue {role!r} missing", frame=t
                        )
                    values = zeros
                maps.append(cues._validate(values, role, t, dims))
        for t, values in enumerate(maps):
            frameio.write_score_map(values, cues.cue_map_path(out_dir, t))
    logger.info("cues: wrote %d frames x %d roles", t_count, len(cues.ROLES))


def _materialized_sources(paths: RunPaths) -> list[cues.CueSource]:
    return [
        cues.CueSource(role=role, origin="files", directory=paths.cue_dir(role))
        for role in cues.ROLES
    ]


def _cue_frame_count(paths: RunPaths) -> int:
    files = sorted(paths.cue_dir("motion").glob("frame_*.pfm"))
    if not files:
        raise StageError("propose", f"no cue maps under {paths.cue_dir('motion')}")
    return len(files)


def assembly_context(cfg: PipelineConfig, dims: tuple[int, int], t_count: int) -> cues.CueContext:
    """Assembly context shared by the batch path and the calibration service."""
    return cues.CueContext(
        dims=dims,
        t_count=t_count,
        skip_k=cfg.skip.k,
        zero_until={"background": cfg.vibe.warmup_frames},
    )


def extract_boxes(
    s: np.ndarray, cfg: PipelineConfig, t: int
) -> tuple[np.ndarray, list[proposal.BoxProposal]]:
    """Binarize one fused map and pull scored box proposals out of it."""
    mask = fusion.binarize(s, cfg.fusion.tau)
    comps = proposal.connected_components(mask, cfg.proposal.connectivity)
    boxes = proposal.components_to_boxes(
        comps,
        s,
        min_area=cfg.proposal.min_area,
        margin=cfg.proposal.margin,
        frame=t,
    )
    return mask, boxes


def run_propose(cfg: PipelineConfig, paths: RunPaths, dump: bool = False) -> None:
    """Fuse cues, extract boxes, filter temporally, export SAM-style prompts."""
    t_count = _cue_frame_count(paths)
    probe = frameio.read_score_map(cues.cue_map_path(paths.cue_dir("motion"), 0))
    dims = probe.shape
    sources = _materialized_sources(paths)
    ctx = assembly_context(cfg, dims, t_count)
    paths.fused_dir.mkdir(parents=True, exist_ok=True)

    frames = _load_frames(cfg) if dump else None
    if dump:
        paths.overlays_dir.mkdir(parents=True, exist_ok=True)

    raw_boxes: list[list[proposal.BoxProposal]] = []
    for t in range(t_count):
        try:
            bundle = cues.assemble_bundle(t, sources, ctx)
            s = fusion.fuse_config(bundle, cfg.fusion)
            frameio.write_score_map(s, paths.fused_path(t))
            mask, boxes = extract_boxes(s, cfg, t)
            raw_boxes.append(boxes)
            if dump:
                overlay = _render_overlay_bytes(frames[t], mask, boxes)
                (paths.overlays_dir / f"frame_{t:06}.png").write_bytes(overlay)
        except TurbsegError:
            raise
        except Exception as exc:
            raise StageError("propose", str(exc), frame=t) from exc

    filtered = temporal.isolated_box_filter(raw_boxes, cfg.temporal)
    final = temporal.temporal_recovery(filtered, cfg.temporal)
    refine.export_prompts(final, paths.prompts_path)
    if dump:
        refine.export_prompts(raw_boxes, paths.boxes_raw_path)
    logger.info(
        "propose: %d raw boxes -> %d after filter+recovery",
        sum(len(b) for b in raw_boxes),
        sum(len(b) for b in final),
    )


def _render_overlay_bytes(frame, mask, boxes) -> bytes:
    from . import render

    return render.render_overlay(frame, mask, boxes)


def run_refine(cfg: PipelineConfig, paths: RunPaths) -> list[np.ndarray]:
    """Produce final masks from prompts, via external import or the fallback."""
    if not paths.prompts_path.exists():
        raise StageError("refine", f"missing prompt file {paths.prompts_path}")
    prompts = refine.parse_prompts(paths.prompts_path)
    t_count = len(prompts)
    if t_count == 0:
        raise StageError("refine", "prompt file is empty")
    dims = frameio.read_score_map(paths.fused_path(0)).shape
    paths.masks_dir.mkdir(parents=True, exist_ok=True)

    masks = []
    if cfg.refine.mode == "external":
        refined_dir = cfg.resolve(cfg.refine.refined_dir)
        try:
            masks = refine.import_refined(refined_dir, dims, t_count)
        except TurbsegError as exc:
            raise StageError("refine", str(exc)) from exc
        for t, mask in enumerate(masks):
            refine.audit_containment(mask, prompts[t], frame=t)
    else:
        tau_box = cfg.tau_box()
        for t in range(t_count):
            try:
                s = frameio.read_score_map(paths.fused_path(t))
            except TurbsegError as exc:
                raise StageError("refine", str(exc), frame=t) from exc
            masks.append(refine.fallback_refine(s, prompts[t], tau_box))

    for t, mask in enumerate(masks):
        frameio.write_mask(mask, paths.mask_path(t))
    return masks


def load_mask_sequence(directory: Path, pattern: str) -> list[np.ndarray]:
    files = sorted(Path(directory).glob(pattern))
    if not files:
        raise TurbsegError(f"no masks matched {pattern!r} in {directory}")
    indexed = sorted((frameio.frame_index(p), p) for p in files)
    return [frameio.read_mask(p) for _, p in indexed]


def run_eval(cfg: PipelineConfig, paths: RunPaths) -> metrics.EvalReport:
    """Score final masks against ground truth and write the report files."""
    if not cfg.eval.gt_dir:
        raise StageError("eval", "no ground-truth directory configured")
    try:
        preds = load_mask_sequence(paths.masks_dir, "mask_*.png")
        gts = load_mask_sequence(cfg.resolve(cfg.eval.gt_dir), cfg.eval.gt_pattern)
        scores = metrics.score_video(preds, gts, cfg.eval.empty_convention)
        report = metrics.aggregate(
            [(cfg.input.name, scores)], cfg.eval.empty_convention
        )
    except (TurbsegError, ValueError) as exc:
        raise StageError("eval", str(exc)) from exc
    paths.eval_json_path.write_text(report.to_json() + "\n")
    paths.eval_table_path.write_text(report.format_table() + "\n")
    return report


def run(
    cfg: PipelineConfig, stage: str | None = None, dump: bool | None = None
) -> metrics.EvalReport | None:
    """Run the full pipeline, or one named stage against existing intermediates."""
    if stage is not None and stage not in STAGES:
        raise StageError(stage, f"unknown stage; expected one of {STAGES}")
    dump = cfg.output.dump_intermediates if dump is None else dump
    paths = paths_for(cfg)
    paths.out_dir.mkdir(parents=True, exist_ok=True)

    report = None
    stages = [stage] if stage else list(STAGES)
    for name in stages:
        if name == "eval" and stage is None and not cfg.eval.gt_dir:
            continue
        logger.info("stage %s", name)
        try:
            if name == "cues":
                run_cues(cfg, paths)
            elif name == "propose":
                run_propose(cfg, paths, dump=dump)
            elif name == "refine":
                run_refine(cfg, paths)
            else:
                report = run_eval(cfg, paths)
        except StageError:
            raise
        except TurbsegError as exc:
            raise StageError(name, str(exc)) from exc
        except (OSError, ValueError) as exc:
            raise StageError(name, str(exc)) from exc
    return report
