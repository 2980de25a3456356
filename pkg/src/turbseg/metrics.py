"""Segmentation metrics: per-frame IoU/Dice and leaderboard-style aggregation.

Aggregation is mean-over-frames per video, then unweighted mean over
videos. Frames empty in both prediction and ground truth score 1.0 by
default; the convention is explicit and overridable because evaluation
servers differ on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

EMPTY_CONVENTIONS = ("one", "zero", "skip")


def _counts(pred: np.ndarray, gt: np.ndarray) -> tuple[int, int, int]:
    pred = np.asarray(pred) != 0
    gt = np.asarray(gt) != 0
    if pred.shape != gt.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    inter = int((pred & gt).sum())
    return inter, int(pred.sum()), int(gt.sum())


def frame_iou(pred: np.ndarray, gt: np.ndarray, empty_score: float = 1.0) -> float:
    """|pred & gt| / |pred | gt|; both masks empty scores `empty_score`."""
    inter, np_, ng = _counts(pred, gt)
    union = np_ + ng - inter
    if union == 0:
        return empty_score
    return inter / union


def frame_dice(pred: np.ndarray, gt: np.ndarray, empty_score: float = 1.0) -> float:
    """2|pred & gt| / (|pred| + |gt|); both masks empty scores `empty_score`."""
    inter, np_, ng = _counts(pred, gt)
    if np_ + ng == 0:
        return empty_score
    return 2.0 * inter / (np_ + ng)


def score_video(
    preds: list[np.ndarray], gts: list[np.ndarray], empty_convention: str = "one"
) -> list[tuple[float, float] | None]:
    """Per-frame (iou, dice) pairs; a skipped both-empty frame yields None."""
    if empty_convention not in EMPTY_CONVENTIONS:
        raise ValueError(f"unknown empty convention {empty_convention!r}")
    if len(preds) != len(gts):
        raise ValueError(f"{len(preds)} predictions vs {len(gts)} ground truths")
    scores: list[tuple[float, float] | None] = []
    for pred, gt in zip(preds, gts):
        inter, np_, ng = _counts(pred, gt)
        if np_ + ng == 0:
            if empty_convention == "skip":
                scores.append(None)
            else:
                v = 1.0 if empty_convention == "one" else 0.0
                scores.append((v, v))
        else:
            scores.append((inter / (np_ + ng - inter), 2.0 * inter / (np_ + ng)))
    return scores


@dataclass
class VideoScore:
    name: str
    miou: float
    mdice: float
    frames: int


@dataclass
class EvalReport:
    videos: list[VideoScore]
    final_miou: float
    final_mdice: float
    empty_convention: str = "one"

    def to_json(self) -> str:
        return json.dumps(
            {
                "videos": [
                    {
                        "name": v.name,
                        "miou": v.miou,
                        "mdice": v.mdice,
                        "frames": v.frames,
                    }
                    for v in self.videos
                ],
                "final_miou": self.final_miou,
                "final_mdice": self.final_mdice,
                "empty_convention": self.empty_convention,
            },
            indent=2,
        )

    def format_table(self) -> str:
        name_width = max(
            [len(v.name) for v in self.videos] + [len("Final evaluation")]
        )
        lines = [f"{'Video':<{name_width}}  {'mIoU':>8}  {'mDice':>8}"]
        for v in self.videos:
            lines.append(f"{v.name:<{name_width}}  {v.miou:>8.4f}  {v.mdice:>8.4f}")
        lines.append(
            f"{'Final evaluation':<{name_width}}  "
            f"{self.final_miou:>8.6f}  {self.final_mdice:>8.6f}"
        )
        return "\n".join(lines)


def aggregate(
    videos: list[tuple[str, list[tuple[float, float]]]],
    empty_convention: str = "one",
) -> EvalReport:
    """Mean per-frame scores per video, then unweighted mean over videos."""
    if not videos:
        raise ValueError("no videos to aggregate")
    scored = []
    for name, frame_scores in videos:
        frame_scores = [s for s in frame_scores if s is not None]
        if not frame_scores:
            raise ValueError(f"video {name!r} has no scorable frames")
        ious = [s[0] for s in frame_scores]
        dices = [s[1] for s in frame_scores]
        scored.append(
            VideoScore(
                name=name,
                miou=float(np.mean(ious)),
                mdice=float(np.mean(dices)),
                frames=len(frame_scores),
            )
        )
    return EvalReport(
        videos=scored,
        final_miou=float(np.mean([v.miou for v in scored])),
        final_mdice=float(np.mean([v.mdice for v in scored])),
        empty_convention=empty_convention,
    )
