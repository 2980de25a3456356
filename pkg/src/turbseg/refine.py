"""Box-prompt exchange with an external mask refiner, plus a built-in fallback.

The exchange contract is two files: a JSON-lines prompt file (one record
per frame, empty frames included) and one `refined_{t:06}.png` mask per
frame coming back. The fallback refiner closes the loop when no external
refiner is present: it keeps the fused score inside each prompt box and
fills boxes the score abandons entirely (a prompt asserts an object).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from . import frameio
from .errors import FormatError
from .proposal import BoxProposal

logger = logging.getLogger(__name__)


def export_prompts(frames: list[list[BoxProposal]], path: str | Path) -> None:
    """Write one JSONL record per frame: {"frame": t, "boxes": [...]}."""
    lines = []
    for t, boxes in enumerate(frames):
        for box in boxes:
            for name in ("x0", "y0", "x1", "y1"):
                if not isinstance(getattr(box, name), int):
                    raise ValueError(
                        f"box coordinate {name} at frame {t} is not an integer"
                    )
            if not (0 <= box.x0 < box.x1 and 0 <= box.y0 < box.y1):
                raise ValueError(f"invalid box extent {box.box} at frame {t}")
        record = {"frame": t, "boxes": [b.to_json() for b in boxes]}
        lines.append(json.dumps(record, separators=(",", ":")))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_prompts(path: str | Path) -> list[list[BoxProposal]]:
    """Read a prompt JSONL back into per-frame box lists."""
    frames = []
    for lineno, line in enumerate(Path(path).read_text().splitlines()):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad JSON on prompt line {lineno + 1}: {exc}") from exc
        t = record["frame"]
        if t != len(frames):
            raise FormatError(
                f"prompt frames out of order: got {t}, expected {len(frames)}"
            )
        frames.append(
            [
                BoxProposal(
                    frame=t,
                    x0=b["x0"],
                    y0=b["y0"],
                    x1=b["x1"],
                    y1=b["y1"],
                    score=b["score"],
                    id=b["id"],
                )
                for b in record["boxes"]
            ]
        )
    return frames


def import_refined(
    directory: str | Path, dims: tuple[int, int], t_count: int
) -> list[np.ndarray]:
    """Load `refined_{t:06}.png` for every frame, validated to `dims`."""
    directory = Path(directory)
    masks = []
    for t in range(t_count):
        path = directory / f"refined_{t:06}.png"
        if not path.exists():
            raise FormatError(f"missing refined mask for frame {t}: {path}")
        masks.append(frameio.read_mask(path, expected_shape=dims))
    return masks


def fallback_refine(
    s: np.ndarray, boxes: list[BoxProposal], tau_box: float
) -> np.ndarray:
    """Box-constrained thresholding of the fused score map.

    Union over boxes of {pixels inside with s >= tau_box}; a box whose
    interior clears the threshold nowhere is filled completely.
    """
    s = np.asarray(s)
    mask = np.zeros(s.shape, dtype=np.uint8)
    for box in boxes:
        region = s[box.y0 : box.y1, box.x0 : box.x1]
        hit = region >= tau_box
        if hit.any():
            mask[box.y0 : box.y1, box.x0 : box.x1] |= hit.astype(np.uint8)
        else:
            mask[box.y0 : box.y1, box.x0 : box.x1] = 1
    return mask


def containment_fraction(mask: np.ndarray, boxes: list[BoxProposal]) -> float:
    """Fraction of set mask pixels lying inside the union of prompt boxes."""
    mask = np.asarray(mask) != 0
    total = int(mask.sum())
    if total == 0:
        return 1.0
    inside = np.zeros(mask.shape, dtype=bool)
    for box in boxes:
        inside[box.y0 : box.y1, box.x0 : box.x1] = True
    return int((mask & inside).sum()) / total


def audit_containment(
    mask: np.ndarray, boxes: list[BoxProposal], frame: int, minimum: float = 0.95
) -> float:
    """Log (not reject) refined masks that bleed too far outside the prompts."""
    frac = containment_fraction(mask, boxes)
    if frac < minimum:
        logger.warning(
            "frame %d: only %.1f%% of refined mask pixels fall inside the "
            "prompt boxes (threshold %.0f%%)",
            frame,
            100.0 * frac,
            100.0 * minimum,
        )
    return frac
