"""Local HTTP service for human-in-the-loop fusion calibration.

Serves precomputed cue maps and recomputes fusion/proposals on demand so a
browser UI can sweep weights and thresholds against live overlays. The
fusion code path is the exact batch implementation (shared functions), so
a parameter set accepted here behaves identically in `pipeline run`.

State model: cue bundles are immutable for the session lifetime; the only
mutable state is the candidate parameter set, updated by PUT /config and
persisted to the pipeline's TOML config.
"""

from __future__ import annotations

import base64
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import HTMLResponse, Response
from pydantic import BaseModel, Field, model_validator

from . import _kernels, cues, frameio, fusion, metrics, pipeline, render
from .config import PipelineConfig, load_config, save_config
from .errors import ConfigError, TurbsegError

_WEIGHT_ALIASES = {"a": "alpha", "b": "beta", "g": "gamma", "d": "delta"}


class ParamsModel(BaseModel):
    """Calibratable parameters: fusion + proposal + temporal."""

    alpha: float = Field(ge=0)
    beta: float = Field(ge=0)
    gamma: float = Field(ge=0)
    delta: float = Field(ge=0)
    tau: float = Field(gt=0, le=1)
    semantic_pregate: bool
    pregate_epsilon: float = Field(ge=0, le=1)
    min_area: int = Field(ge=0)
    margin: int = Field(ge=0)
    connectivity: Literal[4, 8]
    iou_min: float = Field(ge=0, le=1)
    gap_max: int = Field(ge=0)
    tail_propagate: bool

    @model_validator(mode="after")
    def _some_weight_positive(self):
        if self.alpha == self.beta == self.gamma == self.delta == 0:
            raise ValueError("at least one fusion weight must be positive")
        return self


class FuseRequest(BaseModel):
    frame: int = Field(ge=0)
    weights: dict[str, float] | None = None
    tau: float | None = Field(default=None, gt=0, le=1)
    semantic_pregate: bool | None = None
    pregate_epsilon: float | None = Field(default=None, ge=0, le=1)
    min_area: int | None = Field(default=None, ge=0)
    margin: int | None = Field(default=None, ge=0)
    connectivity: Literal[4, 8] | None = None


@dataclass
class CalibSession:
    config: PipelineConfig
    config_path: Path | None
    frames: list[np.ndarray]
    bundles: list[cues.CueBundle]
    gt: list[np.ndarray] | None
    lock: threading.Lock

    @property
    def dims(self) -> tuple[int, int]:
        return self.frames[0].shape


def load_session(cfg: PipelineConfig, config_path: str | Path | None = None) -> CalibSession:
    """Load frames and precomputed cue bundles; fails if cues are missing."""
    paths = pipeline.paths_for(cfg)
    frames = pipeline._load_frames(cfg)
    t_count = len(frames)
    missing = [
        role
        for role in cues.ROLES
        if not cues.cue_map_path(paths.cue_dir(role), 0).exists()
    ]
    if missing:
        raise TurbsegError(
            f"cue maps missing for roles {missing}; run `turbseg cues` first"
        )
    sources = pipeline._materialized_sources(paths)
    ctx = pipeline.assembly_context(cfg, frames[0].shape, t_count)
    bundles = [cues.assemble_bundle(t, sources, ctx) for t in range(t_count)]
    gt = None
    if cfg.eval.gt_dir:
        gt = pipeline.load_mask_sequence(
            cfg.resolve(cfg.eval.gt_dir), cfg.eval.gt_pattern
        )
        if len(gt) != t_count:
            raise TurbsegError(f"{len(gt)} ground-truth masks for {t_count} frames")
    return CalibSession(
        config=cfg,
        config_path=Path(config_path) if config_path else None,
        frames=frames,
        bundles=bundles,
        gt=gt,
        lock=threading.Lock(),
    )


def _params_from_config(cfg: PipelineConfig) -> ParamsModel:
    w = cfg.fusion.weights
    return ParamsModel(
        alpha=w.alpha,
        beta=w.beta,
        gamma=w.gamma,
        delta=w.delta,
        tau=cfg.fusion.tau,
        semantic_pregate=cfg.fusion.semantic_pregate,
        pregate_epsilon=cfg.fusion.pregate_epsilon,
        min_area=cfg.proposal.min_area,
        margin=cfg.proposal.margin,
        connectivity=cfg.proposal.connectivity,
        iou_min=cfg.temporal.iou_min,
        gap_max=cfg.temporal.gap_max,
        tail_propagate=cfg.temporal.tail_propagate,
    )


def _apply_params(cfg: PipelineConfig, p: ParamsModel) -> PipelineConfig:
    return replace(
        cfg,
        fusion=replace(
            cfg.fusion,
            weights=fusion.FusionWeights(p.alpha, p.beta, p.gamma, p.delta),
            tau=p.tau,
            semantic_pregate=p.semantic_pregate,
            pregate_epsilon=p.pregate_epsilon,
        ),
        proposal=replace(
            cfg.proposal,
            min_area=p.min_area,
            margin=p.margin,
            connectivity=p.connectivity,
        ),
        temporal=replace(
            cfg.temporal,
            iou_min=p.iou_min,
            gap_max=p.gap_max,
            tail_propagate=p.tail_propagate,
        ),
    )


def _normalize_weights(weights: dict[str, float]) -> dict[str, float]:
    out = {}
    for key, value in weights.items():
        name = _WEIGHT_ALIASES.get(key, key)
        if name not in ("alpha", "beta", "gamma", "delta"):
            raise HTTPException(422, f"unknown weight key {key!r}")
        out[name] = value
    return out


def _request_config(session: CalibSession, req: FuseRequest) -> PipelineConfig:
    """Candidate config with per-request overrides, validated like any config."""
    with session.lock:
        cfg = session.config
    w = {
        "alpha": cfg.fusion.weights.alpha,
        "beta": cfg.fusion.weights.beta,
        "gamma": cfg.fusion.weights.gamma,
        "delta": cfg.fusion.weights.delta,
    }
    if req.weights is not None:
        w.update(_normalize_weights(req.weights))
    try:
        return replace(
            cfg,
            fusion=replace(
                cfg.fusion,
                weights=fusion.FusionWeights(**w),
                tau=cfg.fusion.tau if req.tau is None else req.tau,
                semantic_pregate=(
                    cfg.fusion.semantic_pregate
                    if req.semantic_pregate is None
                    else req.semantic_pregate
                ),
                pregate_epsilon=(
                    cfg.fusion.pregate_epsilon
                    if req.pregate_epsilon is None
                    else req.pregate_epsilon
                ),
            ),
            proposal=replace(
                cfg.proposal,
                min_area=cfg.proposal.min_area if req.min_area is None else req.min_area,
                margin=cfg.proposal.margin if req.margin is None else req.margin,
                connectivity=(
                    cfg.proposal.connectivity
                    if req.connectivity is None
                    else req.connectivity
                ),
            ),
        )
    except ConfigError as exc:
        raise HTTPException(422, str(exc)) from exc


def _compute_frame(session: CalibSession, cfg: PipelineConfig, t: int):
    """Single-frame fusion + box extraction via the batch implementation."""
    if not 0 <= t < len(session.bundles):
        raise HTTPException(404, f"frame {t} out of range [0, {len(session.bundles)})")
    s = fusion.fuse_config(session.bundles[t], cfg.fusion)
    mask, boxes = pipeline.extract_boxes(s, cfg, t)
    return s, mask, boxes


def create_app(session: CalibSession) -> FastAPI:
    app = FastAPI(title="turbseg calibration service")
    # the browser UI is served as static files from anywhere local, so the
    # API allows cross-origin calls; the service is localhost tooling by
    # design (no auth, not for deployment)
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/meta")
    def meta():
        h, w = session.dims
        return {
            "frames": len(session.frames),
            "width": w,
            "height": h,
            "videos": [session.config.input.name],
            "ground_truth": session.gt is not None,
            "kernel_backend": _kernels.BACKEND,
            "cue_roles": list(cues.ROLES),
        }

    @app.get("/frames/{t}")
    def frame_png(t: int):
        if not 0 <= t < len(session.frames):
            raise HTTPException(404, f"frame {t} out of range")
        return Response(render.encode_png(session.frames[t]), media_type="image/png")

    @app.get("/cues/{role}/{t}")
    def cue_png(role: str, t: int):
        if role not in cues.ROLES:
            raise HTTPException(404, f"unknown cue role {role!r}")
        if not 0 <= t < len(session.bundles):
            raise HTTPException(404, f"frame {t} out of range")
        bundle = session.bundles[t]
        values = {
            "motion": bundle.m,
            "skip_motion": bundle.m_skip,
            "semantic": bundle.p_sem,
            "background": bundle.b,
        }[role]
        return Response(render.render_heatmap(values), media_type="image/png")

    @app.post("/fuse")
    def fuse_frame(req: FuseRequest):
        cfg = _request_config(session, req)
        s, mask, boxes = _compute_frame(session, cfg, req.frame)
        overlay = render.render_overlay(session.frames[req.frame], mask, boxes)
        return {
            "frame": req.frame,
            "boxes": [b.to_json() for b in boxes],
            "mask_pixels": int(mask.sum()),
            "overlay_png": base64.b64encode(overlay).decode("ascii"),
        }

    @app.get("/score")
    def score(
        frame: int,
        alpha: float | None = None,
        beta: float | None = None,
        gamma: float | None = None,
        delta: float | None = None,
        tau: float | None = None,
        min_area: int | None = None,
        margin: int | None = None,
    ):
        if session.gt is None:
            raise HTTPException(404, "no ground truth loaded")
        weights = {
            k: v
            for k, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta))
            if v is not None
        }
        req = FuseRequest(
            frame=frame,
            weights=weights or None,
            tau=tau,
            min_area=min_area,
            margin=margin,
        )
        cfg = _request_config(session, req)
        _, mask, _ = _compute_frame(session, cfg, frame)
        gt = session.gt[frame]
        return {
            "frame": frame,
            "iou": metrics.frame_iou(mask, gt),
            "dice": metrics.frame_dice(mask, gt),
        }

    @app.get("/config")
    def get_config():
        with session.lock:
            return _params_from_config(session.config).model_dump()

    @app.put("/config")
    def put_config(params: ParamsModel):
        with session.lock:
            session.config = _apply_params(session.config, params)
            if session.config_path is not None:
                save_config(session.config, session.config_path)
        return params.model_dump()

    @app.get("/", response_class=HTMLResponse)
    def index():
        return (
            "<html><body><h1>turbseg calibration service</h1>"
            "<p>API: /meta, /frames/{t}, /cues/{role}/{t}, POST /fuse, "
            "/score, GET+PUT /config</p></body></html>"
        )

    return app


def serve(config_path: str | Path, host: str = "127.0.0.1", port: int = 8321) -> None:
    """Blocking entry point used by `turbseg serve`."""
    import uvicorn

    cfg = load_config(config_path)
    session = load_session(cfg, config_path=config_path)
    app = create_app(session)
    uvicorn.run(app, host=host, port=port, log_level="info")
