"""Connected components and their conversion to scored box prompts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass
class Component:
    label: int
    ys: np.ndarray
    xs: np.ndarray
    bbox: tuple[int, int, int, int]  # (x0, y0, x1, y1), half-open

    @property
    def area(self) -> int:
        return len(self.ys)


@dataclass
class BoxProposal:
    frame: int
    x0: int
    y0: int
    x1: int
    y1: int
    score: float
    id: int

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "x0": self.x0,
            "y0": self.y0,
            "x1": self.x1,
            "y1": self.y1,
            "score": self.score,
        }


def connected_components(mask: np.ndarray, connectivity: int = 8) -> list[Component]:
    """Label foreground regions; labels follow row-major first-pixel order."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.ascontiguousarray(np.asarray(mask) != 0, dtype=np.uint8)
    labels, n = _kernels.label_components(mask, connectivity)
    if n == 0:
        return []
    width = mask.shape[1]
    flat = labels.ravel()
    idx = np.nonzero(flat)[0]
    order = np.argsort(flat[idx], kind="stable")  # row-major within a label
    grouped = idx[order]
    bounds = np.searchsorted(flat[idx][order], np.arange(1, n + 2))
    comps = []
    for lab in range(1, n + 1):
        pix = grouped[bounds[lab - 1] : bounds[lab]]
        ys, xs = np.divmod(pix, width)
        comps.append(
            Component(
                label=lab,
                ys=ys,
                xs=xs,
                bbox=(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1),
            )
        )
    return comps


def components_to_boxes(
    comps: list[Component],
    s: np.ndarray,
    min_area: int = 9,
    margin: int = 4,
    bounds: tuple[int, int] | None = None,
    frame: int = 0,
) -> list[BoxProposal]:
    """Filter small components and expand the survivors into box prompts.

    The tight extent grows by `margin` on every side (clipped to `bounds`,
    given as (width, height) and defaulting to the score map's shape); the
    box score is the mean fused score over the component's own pixels.
    """
    s = np.asarray(s)
    if bounds is None:
        bounds = (s.shape[1], s.shape[0])
    width, height = bounds
    boxes = []
    for comp in comps:
        if comp.area < min_area:
            continue
        x0, y0, x1, y1 = comp.bbox
        boxes.append(
            BoxProposal(
                frame=frame,
                x0=max(0, x0 - margin),
                y0=max(0, y0 - margin),
                x1=min(width, x1 + margin),
                y1=min(height, y1 + margin),
                score=float(s[comp.ys, comp.xs].mean(dtype=np.float64)),
                id=len(boxes),
            )
        )
    return boxes
