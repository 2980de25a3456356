"""Pure numpy/scipy implementations of the hot kernels.

This backend defines the reference semantics; the compiled Cython core in
`_core.pyx` must produce bit-identical outputs (enforced by
tests/test_backends.py). Update rules that involve scattered writes are
therefore pinned to an explicit order: own-sample updates for every
background pixel in row-major order, then neighbor updates in row-major
order of the source pixel, last writer wins.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

# 8-neighborhood offsets (dy, dx), self excluded, row-major order.
NBR8 = np.array(
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)],
    dtype=np.int64,
)

# 9-point neighborhood including self, used by reservoir seeding.
NBR9 = np.array(
    [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)],
    dtype=np.int64,
)

_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)
_STRUCT8 = np.ones((3, 3), dtype=np.uint8)


def vibe_step_kernel(
    reservoir: np.ndarray,
    frame: np.ndarray,
    radius: int,
    min_matches: int,
    own_gate: np.ndarray,
    own_slot: np.ndarray,
    nbr_gate: np.ndarray,
    nbr_choice: np.ndarray,
    nbr_slot: np.ndarray,
) -> np.ndarray:
    """Classify one frame against the reservoir and apply in-place updates.

    Two-phase: all pixels are classified first, then background pixels
    propagate their intensity into their own reservoir and (independently)
    into one clamped 8-neighbor's reservoir. Returns the foreground map
    as a {0, 1} uint8 array.
    """
    h, w, n = reservoir.shape
    diff = np.abs(reservoir.astype(np.int16) - frame[:, :, None].astype(np.int16))
    matches = (diff <= radius).sum(axis=2)
    bg = matches >= min_matches
    fg = (~bg).astype(np.uint8)

    # Own-sample updates: each background pixel writes only its own
    # reservoir, so the scatter has no collisions.
    ys, xs = np.nonzero(bg & (own_gate != 0))
    reservoir[ys, xs, own_slot[ys, xs]] = frame[ys, xs]

    # Neighbor updates: collisions are possible; resolve them as
    # last-writer-wins in row-major order of the source pixel.
    ys, xs = np.nonzero(bg & (nbr_gate != 0))
    if ys.size:
        off = NBR8[nbr_choice[ys, xs]]
        ny = np.clip(ys + off[:, 0], 0, h - 1)
        nx = np.clip(xs + off[:, 1], 0, w - 1)
        flat = (ny * w + nx) * n + nbr_slot[ys, xs]
        vals = frame[ys, xs]
        source_order = np.arange(flat.size)
        perm = np.lexsort((source_order, flat))
        sorted_flat = flat[perm]
        keep = np.ones(sorted_flat.size, dtype=bool)
        keep[:-1] = sorted_flat[1:] != sorted_flat[:-1]
        reservoir.reshape(-1)[sorted_flat[keep]] = vals[perm][keep]
    return fg


def block_match_level(
    a: np.ndarray,
    b: np.ndarray,
    prior: np.ndarray,
    block: int,
    radius: int,
) -> np.ndarray:
    """Integer SAD block matching at one pyramid level.

    `prior` holds the per-block (u, v) estimate carried over from the
    coarser level; the search covers the (2*radius+1)^2 integer offsets
    around it whose comparison window stays inside `b`. Ties go to the
    candidate with the smaller total offset magnitude, then to the
    lexicographically smaller (v, u).
    """
    h, w = a.shape
    nby, nbx = prior.shape[:2]
    out = np.zeros_like(prior)
    for bi in range(nby):
        y0 = min(bi * block, h - block)
        for bj in range(nbx):
            x0 = min(bj * block, w - block)
            pu = int(min(max(prior[bi, bj, 0], -x0), (w - block) - x0))
            pv = int(min(max(prior[bi, bj, 1], -y0), (h - block) - y0))
            ablk = a[y0 : y0 + block, x0 : x0 + block]
            best_key = None
            best_u = best_v = 0
            for dv in range(-radius, radius + 1):
                cy = y0 + pv + dv
                if cy < 0 or cy > h - block:
                    continue
                for du in range(-radius, radius + 1):
                    cx = x0 + pu + du
                    if cx < 0 or cx > w - block:
                        continue
                    sad = int(
                        np.abs(ablk - b[cy : cy + block, cx : cx + block]).sum(
                            dtype=np.int64
                        )
                    )
                    u = pu + du
                    v = pv + dv
                    key = (sad, u * u + v * v, v, u)
                    if best_key is None or key < best_key:
                        best_key = key
                        best_u, best_v = u, v
            out[bi, bj, 0] = best_u
            out[bi, bj, 1] = best_v
    return out


def label_components(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    """Label connected foreground regions, 1..n in row-major first-pixel order."""
    structure = _STRUCT8 if connectivity == 8 else _STRUCT4
    labels, n = ndimage.label(mask != 0, structure=structure)
    labels = labels.astype(np.int32)
    if n:
        # scipy labels in scan order already; remap defensively so the
        # ordering contract never depends on scipy internals.
        flat = labels.ravel()
        nz = np.nonzero(flat)[0]
        first = np.full(n + 1, flat.size, dtype=np.int64)
        np.minimum.at(first, flat[nz], nz)
        order = np.argsort(first[1:], kind="stable")
        remap = np.empty(n + 1, dtype=np.int32)
        remap[0] = 0
        remap[order + 1] = np.arange(1, n + 1, dtype=np.int32)
        labels = remap[labels]
    return labels, int(n)
