"""File I/O for frames, masks, flow fields, and score maps.

These formats are the exchange surface between the pipeline and any
external cue/refiner scripts, so reads and writes are bit-exact:

* frames and masks: 8-bit grayscale PNG (masks use {0, 255} only),
* flow fields: Middlebury ``.flo`` (little-endian float32),
* score maps: grayscale PFM (``Pf``, bottom row first).

No NaN/Inf survives a load; every loader rejects non-finite payloads.
"""

from __future__ import annotations

import re
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError

FLO_MAGIC = 202021.25

# ITU-R BT.601 luma weights, ties rounded half away from zero so that any
# adapter in any language can reproduce the conversion exactly.
_LUMA_R, _LUMA_G, _LUMA_B = 0.299, 0.587, 0.114


def luma(r: int, g: int, b: int) -> int:
    """Convert one RGB triple in [0, 255] to a grayscale intensity."""
    y = int(np.floor(_LUMA_R * r + _LUMA_G * g + _LUMA_B * b + 0.5))
    return min(255, max(0, y))


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Vectorized `luma` over an (H, W, 3) uint8 array."""
    y = _LUMA_R * rgb[..., 0] + _LUMA_G * rgb[..., 1] + _LUMA_B * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def load_frame(path: str | Path) -> np.ndarray:
    """Load one PNG frame as an (H, W) uint8 grayscale array."""
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise FormatError(f"unreadable frame {path}: {exc}") from exc
    if img.mode == "P":
        img = img.convert("RGB")
    if img.mode == "L":
        return np.asarray(img, dtype=np.uint8)
    if img.mode in ("RGB", "RGBA"):
        return rgb_to_gray(np.asarray(img)[..., :3])
    raise FormatError(f"unsupported image mode {img.mode!r} in {path}")


def write_frame(frame: np.ndarray, path: str | Path) -> None:
    frame = np.asarray(frame, dtype=np.uint8)
    Image.fromarray(frame, mode="L").save(path, format="PNG")


def frame_index(filename: str | Path) -> int:
    """Frame index = last run of digits in the file name (sans extension)."""
    stem = Path(filename).stem
    runs = re.findall(r"\d+", stem)
    if not runs:
        raise FormatError(f"no frame index digits in filename {filename!r}")
    return int(runs[-1])


def load_frame_sequence(directory: str | Path, pattern: str = "*.png") -> list[np.ndarray]:
    """Load all frames matching `pattern`, ordered by parsed frame index.

    All frames must share the same dimensions; color inputs are converted
    through the luma weights.
    """
    directory = Path(directory)
    paths = sorted(directory.glob(pattern))
    if not paths:
        raise FormatError(f"no frames matched {pattern!r} in {directory}")
    indexed = sorted((frame_index(p), p) for p in paths)
    for (i, a), (j, b) in zip(indexed, indexed[1:]):
        if i == j:
            raise FormatError(f"duplicate frame index {i}: {a.name}, {b.name}")
    frames = []
    for _, p in indexed:
        frame = load_frame(p)
        if frames and frame.shape != frames[0].shape:
            raise FormatError(
                f"dimension mismatch: {p.name} is {frame.shape}, "
                f"expected {frames[0].shape}"
            )
        frames.append(frame)
    return frames


# -- Middlebury .flo ---------------------------------------------------------

def read_flow(path: str | Path) -> np.ndarray:
    """Read a `.flo` file into an (H, W, 2) float32 array of (u, v)."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise FormatError(f"truncated flow file {path}")
    magic, width, height = struct.unpack("<fii", data[:12])
    if magic != FLO_MAGIC:
        raise FormatError(f"bad flow magic {magic!r} in {path}")
    if width < 1 or height < 1:
        raise FormatError(f"bad flow dimensions {width}x{height} in {path}")
    expected = 12 + 8 * width * height
    if len(data) < expected:
        raise FormatError(f"truncated flow payload in {path}")
    flat = np.frombuffer(data[12:expected], dtype="<f4")
    field = flat.reshape(height, width, 2).astype(np.float32)
    if not np.isfinite(field).all():
        raise FormatError(f"non-finite flow values in {path}")
    return field


def write_flow(field: np.ndarray, path: str | Path) -> None:
    field = np.asarray(field, dtype=np.float32)
    if field.ndim != 3 or field.shape[2] != 2:
        raise ValueError(f"flow field must be (H, W, 2), got {field.shape}")
    if not np.isfinite(field).all():
        raise ValueError("refusing to write non-finite flow values")
    height, width = field.shape[:2]
    with open(path, "wb") as f:
        f.write(struct.pack("<fii", FLO_MAGIC, width, height))
        f.write(np.ascontiguousarray(field, dtype="<f4").tobytes())


# -- grayscale PFM -----------------------------------------------------------

def read_score_map(path: str | Path) -> np.ndarray:
    """Read a grayscale PFM into an (H, W) float32 array, top row first."""
    with open(path, "rb") as f:
        tag = _read_header_line(f, path)
        if tag == "PF":
            raise FormatError(f"expected grayscale PFM, got color 'PF' in {path}")
        if tag != "Pf":
            raise FormatError(f"bad PFM tag {tag!r} in {path}")
        dims = _read_header_line(f, path).split()
        if len(dims) != 2:
            raise FormatError(f"bad PFM dimension line in {path}")
        width, height = int(dims[0]), int(dims[1])
        if width < 1 or height < 1:
            raise FormatError(f"bad PFM dimensions {width}x{height} in {path}")
        scale = float(_read_header_line(f, path))
        if scale == 0:
            raise FormatError(f"zero PFM scale in {path}")
        payload = f.read(4 * width * height)
    if len(payload) < 4 * width * height:
        raise FormatError(f"truncated PFM payload in {path}")
    dtype = "<f4" if scale < 0 else ">f4"
    flat = np.frombuffer(payload, dtype=dtype).astype(np.float32)
    if not np.isfinite(flat).all():
        raise FormatError(f"non-finite score values in {path}")
    # PFM stores the bottom row first; flip to the top-down order used here.
    return np.flipud(flat.reshape(height, width)).copy()


def write_score_map(score: np.ndarray, path: str | Path) -> None:
    score = np.asarray(score, dtype=np.float32)
    if score.ndim != 2:
        raise ValueError(f"score map must be 2-D, got {score.shape}")
    if not np.isfinite(score).all():
        raise ValueError("refusing to write non-finite score values")
    height, width = score.shape
    with open(path, "wb") as f:
        f.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        f.write(np.ascontiguousarray(np.flipud(score), dtype="<f4").tobytes())


def _read_header_line(f, path) -> str:
    chars = bytearray()
    while True:
        c = f.read(1)
        if not c:
            raise FormatError(f"truncated PFM header in {path}")
        if c == b"\n":
            return chars.decode("ascii").strip()
        chars.extend(c)
        if len(chars) > 128:
            raise FormatError(f"unterminated PFM header line in {path}")


# -- binary masks ------------------------------------------------------------

def read_mask(path: str | Path, expected_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Read an 8-bit grayscale PNG as a {0, 1} uint8 mask (pixel > 127 => 1)."""
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise FormatError(f"unreadable mask {path}: {exc}") from exc
    if img.mode != "L":
        img = img.convert("L")
    mask = (np.asarray(img, dtype=np.uint8) > 127).astype(np.uint8)
    if expected_shape is not None and mask.shape != tuple(expected_shape):
        raise FormatError(
            f"mask {path} is {mask.shape}, expected {tuple(expected_shape)}"
        )
    return mask


def write_mask(mask: np.ndarray, path: str | Path) -> None:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got {mask.shape}")
    out = np.where(mask > 0, 255, 0).astype(np.uint8)
    Image.fromarray(out, mode="L").save(path, format="PNG")
