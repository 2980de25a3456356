"""Temporal box filtering and recovery across a whole sequence.

Turbulence artifacts flicker: a box with no spatial support in either
adjacent frame is dropped. Real objects can also briefly vanish, so short
empty gaps between mutually consistent detections are re-filled by linear
interpolation, and a short empty tail inherits the last reliable boxes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConfigError
from .proposal import BoxProposal


@dataclass
class TemporalConfig:
    iou_min: float = 0.1
    gap_max: int = 5
    tail_propagate: bool = True

    def __post_init__(self):
        if not 0.0 <= self.iou_min <= 1.0:
            raise ConfigError("iou_min must be in [0, 1]")
        if self.gap_max < 0:
            raise ConfigError("gap_max must be >= 0")


def box_iou(a, b) -> float:
    """Intersection-over-union of two half-open (x0, y0, x1, y1) boxes."""
    ax0, ay0, ax1, ay1 = a.box if isinstance(a, BoxProposal) else a
    bx0, by0, bx1, by1 = b.box if isinstance(b, BoxProposal) else b
    iw = min(ax1, bx1) - max(ax0, bx0)
    ih = min(ay1, by1) - max(ay0, by0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return inter / union


def _max_iou(box: BoxProposal, others: list[BoxProposal]) -> float:
    return max((box_iou(box, o) for o in others), default=0.0)


def isolated_box_filter(
    frames: list[list[BoxProposal]], cfg: TemporalConfig | None = None
) -> list[list[BoxProposal]]:
    """Drop boxes with IoU < iou_min against both neighboring frames.

    Neighbor support is always measured against the ORIGINAL (input) box
    sets, which makes the filter idempotent. Boundary frames consult only
    the single neighbor they have.
    """
    cfg = cfg or TemporalConfig()
    t_count = len(frames)
    out = []
    for t, boxes in enumerate(frames):
        kept = []
        for box in boxes:
            supported = False
            if t > 0 and _max_iou(box, frames[t - 1]) >= cfg.iou_min:
                supported = True
            if not supported and t < t_count - 1 and _max_iou(box, frames[t + 1]) >= cfg.iou_min:
                supported = True
            if t_count == 1:
                supported = True  # no neighbors to contradict the box
            if supported:
                kept.append(box)
        out.append(kept)
    return out


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def _interpolate(a: BoxProposal, b: BoxProposal, t: int) -> BoxProposal:
    frac = (t - a.frame) / (b.frame - a.frame)
    coords = [
        _round_half_away(av + frac * (bv - av))
        for av, bv in zip(a.box, b.box)
    ]
    return BoxProposal(
        frame=t,
        x0=coords[0],
        y0=coords[1],
        x1=coords[2],
        y1=coords[3],
        score=min(a.score, b.score),
        id=a.id,
    )


def temporal_recovery(
    frames: list[list[BoxProposal]], cfg: TemporalConfig | None = None
) -> list[list[BoxProposal]]:
    """Fill short empty gaps and an empty tail; never touches existing boxes.

    A maximal empty run of length <= gap_max, flanked by frames whose best
    box pair reaches iou_min, receives one interpolated box per frame with
    the min of the flanking scores. An empty tail of length <= gap_max
    copies the last nonempty frame's boxes verbatim (frame index aside).
    """
    cfg = cfg or TemporalConfig()
    out = [list(boxes) for boxes in frames]
    t_count = len(frames)
    nonempty = [t for t in range(t_count) if frames[t]]
    if not nonempty:
        return out

    for left, right in zip(nonempty, nonempty[1:]):
        gap = right - left - 1
        if not 0 < gap <= cfg.gap_max:
            continue
        best = max(
            ((box_iou(a, b), a, b) for a in frames[left] for b in frames[right]),
            key=lambda item: item[0],
        )
        if best[0] < cfg.iou_min:
            continue
        for t in range(left + 1, right):
            out[t].append(_interpolate(best[1], best[2], t))

    tail = t_count - 1 - nonempty[-1]
    if cfg.tail_propagate and 0 < tail <= cfg.gap_max:
        for t in range(nonempty[-1] + 1, t_count):
            out[t].extend(replace(box, frame=t) for box in frames[nonempty[-1]])
    return out
