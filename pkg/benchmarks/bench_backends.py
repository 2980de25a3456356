#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Times the three hot kernels (ViBe step, block-match level, component
labeling) on synthetic data of a realistic size, then the full pipeline on
a generated sequence. Usage:

    python benchmarks/bench_backends.py [--size 256] [--frames 30]
"""

import argparse
import importlib
import time

import numpy as np


def _timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(size: int):
    from turbseg._kernels import py_backend

    try:
        _core = importlib.import_module("turbseg._kernels._core")
    except ImportError:
        print("compiled backend not built; nothing to compare")
        return

    rng = np.random.default_rng(0)
    h = w = size
    n = 20

    reservoir = rng.integers(0, 256, (h, w, n), dtype=np.uint8)
    frame = rng.integers(0, 256, (h, w), dtype=np.uint8)
    own_gate = (rng.random((h, w)) < 1 / 16).astype(np.uint8)
    own_slot = rng.integers(0, n, (h, w), dtype=np.int32)
    nbr_gate = (rng.random((h, w)) < 1 / 16).astype(np.uint8)
    nbr_choice = rng.integers(0, 8, (h, w), dtype=np.int32)
    nbr_slot = rng.integers(0, n, (h, w), dtype=np.int32)
    vibe_args = (frame, 20, 2, own_gate, own_slot, nbr_gate, nbr_choice, nbr_slot)

    a = rng.integers(0, 256, (h, w)).astype(np.int32)
    b = rng.integers(0, 256, (h, w)).astype(np.int32)
    nb = -(-h // 8)
    prior = np.zeros((nb, nb, 2), dtype=np.int32)

    mask = (rng.random((h, w)) < 0.4).astype(np.uint8)

    rows = []
    for name, compiled_fn, python_fn in (
        (
            f"vibe_step {h}x{w}x{n}",
            lambda: _core.vibe_step_kernel(reservoir.copy(), *vibe_args),
            lambda: py_backend.vibe_step_kernel(reservoir.copy(), *vibe_args),
        ),
        (
            f"block_match {h}x{w} r=4",
            lambda: _core.block_match_level(a, b, prior, 8, 4),
            lambda: py_backend.block_match_level(a, b, prior, 8, 4),
        ),
        (
            f"label_components {h}x{w}",
            lambda: _core.label_components(mask, 8),
            lambda: py_backend.label_components(mask, 8),
        ),
    ):
        tc = _timeit(compiled_fn)
        tp = _timeit(python_fn)
        rows.append((name, tc, tp))

    print(f"{'kernel':<28} {'compiled':>10} {'python':>10} {'speedup':>9}")
    for name, tc, tp in rows:
        print(f"{name:<28} {tc * 1e3:>8.2f}ms {tp * 1e3:>8.2f}ms {tp / tc:>8.1f}x")


def bench_pipeline(frames: int):
    import dataclasses
    import os
    import subprocess
    import sys
    import tempfile

    script = r"""
import dataclasses, sys, time
from pathlib import Path
from turbseg import config, pipeline, synth, _kernels
from turbseg.fusion import FusionWeights

root = Path(sys.argv[1])
cfg = config.PipelineConfig(base_dir=root)
cfg.input.frames_dir = "frames"
cfg.output.out_dir = "out_" + _kernels.BACKEND
cfg = dataclasses.replace(cfg, fusion=dataclasses.replace(
    cfg.fusion, weights=FusionWeights(0.15, 0.4, 0.0, 0.45), tau=0.6))
t0 = time.perf_counter()
pipeline.run(cfg)
print(f"{_kernels.BACKEND}: {time.perf_counter() - t0:.2f}s")
"""
    from turbseg import synth

    with tempfile.TemporaryDirectory() as root:
        seq, masks = synth.generate_sequence(synth.SynthConfig(frames=frames))
        synth.write_sequence(seq, masks, f"{root}/frames", None)
        print(f"\nfull pipeline, {frames} frames:", flush=True)
        for backend in ("compiled", "python"):
            env = dict(os.environ, TURBSEG_BACKEND=backend)
            subprocess.run([sys.executable, "-c", script, root], env=env, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--frames", type=int, default=30)
    args = parser.parse_args()
    bench_kernels(args.size)
    bench_pipeline(args.frames)


if __name__ == "__main__":
    main()
