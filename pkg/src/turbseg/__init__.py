"""turbseg: training-free multi-cue dynamic object segmentation for
turbulence-degraded video.

Cue maps (motion, skip-frame motion, semantic prior, background anomaly)
are fused into per-frame proposal scores, binarized into scored box
prompts, filtered temporally, refined into masks (externally or via the
built-in fallback), and evaluated with mIoU/mDice.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"

__all__ = ["kernel_backend", "__version__"]
