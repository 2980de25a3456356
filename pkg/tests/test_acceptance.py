"""Release gate: one test per acceptance criterion, at pinned tolerances.

Run with `pytest -v tests/test_acceptance.py` to get one pass/fail line
per criterion. The end-to-end benchmark is desk-scale by design: the
synthetic generator provides exact ground truth, and the multi-cue
configuration must beat the motion-only one on the same seed, which is
the testable core of the multi-signal design.
"""

import dataclasses
import itertools
import math

import numpy as np
import pytest

from turbseg import (
    config,
    frameio,
    fusion,
    metrics,
    motion,
    pipeline,
    proposal,
    refine,
    synth,
    temporal,
    vibe,
)
from turbseg.cues import CueBundle
from turbseg.fusion import FusionWeights
from turbseg.proposal import BoxProposal

from test_proposal import flood_fill_oracle, labels_from_components

TABLE1_PAIRS = [
    (0.3327, 0.3995),
    (0.4807, 0.4902),
    (0.4456, 0.4712),
    (0.4590, 0.4786),
    (0.4766, 0.4880),
    (0.3557, 0.4157),
]
PUBLISHED_FINALS = (0.425041, 0.457206)

BENCH = synth.SynthConfig(frames=60)
MULTI_CUE = FusionWeights(alpha=0.15, beta=0.4, gamma=0.0, delta=0.45)
MOTION_ONLY = FusionWeights(alpha=1.0, beta=0.0, gamma=0.0, delta=0.0)
BENCH_TAU = 0.6


def _bench_config(root, out, weights):
    cfg = config.PipelineConfig(base_dir=root)
    cfg.input.frames_dir = "frames"
    cfg.eval.gt_dir = "gt"
    cfg.output.out_dir = out
    return dataclasses.replace(
        cfg, fusion=dataclasses.replace(cfg.fusion, weights=weights, tau=BENCH_TAU)
    )


@pytest.fixture(scope="module")
def bench_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("bench")
    frames, masks = synth.generate_sequence(BENCH)
    synth.write_sequence(frames, masks, root / "frames", root / "gt")
    return root


@pytest.fixture(scope="module")
def bench_run(bench_root):
    """Full multi-cue pipeline run with dumped intermediates."""
    cfg = _bench_config(bench_root, "multi", MULTI_CUE)
    report = pipeline.run(cfg, dump=True)
    return cfg, report


def test_criterion_01_table1_aggregation():
    videos = [(f"video{i}", [pair]) for i, pair in enumerate(TABLE1_PAIRS)]
    report = metrics.aggregate(videos)
    assert abs(report.final_miou - PUBLISHED_FINALS[0]) < 5e-4
    assert abs(report.final_mdice - PUBLISHED_FINALS[1]) < 5e-4


def test_criterion_02_metric_identities():
    rng = np.random.default_rng(202)
    for _ in range(1000):
        h, w = int(rng.integers(1, 65)), int(rng.integers(1, 65))
        pred = (rng.random((h, w)) < rng.uniform(0, 0.8)).astype(np.uint8)
        gt = (rng.random((h, w)) < rng.uniform(0, 0.8)).astype(np.uint8)
        iou = metrics.frame_iou(pred, gt)
        dice = metrics.frame_dice(pred, gt)
        assert 0.0 <= iou <= 1.0 and 0.0 <= dice <= 1.0
        assert abs(dice - 2 * iou / (1 + iou)) <= 1e-12
        assert iou <= dice + 1e-12
        assert metrics.frame_iou(gt, pred) == iou
        assert metrics.frame_dice(gt, pred) == dice


def test_criterion_03_connected_components_oracle():
    rng = np.random.default_rng(303)
    cases = [
        (rng.random((32, 32)) < rng.uniform(0.15, 0.8)).astype(np.uint8)
        for _ in range(500)
    ]
    cases += [
        np.array(bits, np.uint8).reshape(3, 3)
        for bits in itertools.product((0, 1), repeat=9)
    ]
    for mask in cases:
        for conn in (4, 8):
            comps = proposal.connected_components(mask, conn)
            want, n = flood_fill_oracle(mask, conn)
            assert len(comps) == n
            np.testing.assert_array_equal(
                labels_from_components(comps, mask.shape), want
            )


def test_criterion_04_vibe_behavior():
    rng = np.random.default_rng(404)
    # (a) constant video: zero foreground at every step
    constant = np.full((24, 24), 90, np.uint8)
    model = vibe.vibe_init(constant, vibe.VibeParams())
    for _ in range(12):
        assert vibe.vibe_step(model, constant).sum() == 0.0

    # (b) smooth static background + sigma=2 noise: < 1% foreground after
    # a 10-frame warmup
    yy, xx = np.mgrid[0:32, 0:32]
    base = 110 + 40 * np.sin(2 * np.pi * xx / 32) * np.sin(2 * np.pi * yy / 32)
    frames = [
        np.clip(base + rng.normal(0, 2, base.shape), 0, 255).astype(np.uint8)
        for _ in range(20)
    ]
    model = vibe.vibe_init(frames[0], vibe.VibeParams())
    maps = [vibe.vibe_step(model, f) for f in frames]
    assert np.stack(maps[10:]).mean() < 0.01

    # (c) entering bright square: >= 90% of its pixels flagged on entry
    background = np.full((32, 32), 30, np.uint8)
    frames = [background.copy() for _ in range(6)]
    frames[5][10:20, 10:20] = 200
    model = vibe.vibe_init(frames[0], vibe.VibeParams())
    maps = [vibe.vibe_step(model, f) for f in frames]
    assert maps[5][10:20, 10:20].mean() >= 0.9

    # (d) bit-identical reruns under a fixed seed
    frames = [rng.integers(0, 256, (16, 16), dtype=np.uint8) for _ in range(8)]

    def full_run():
        model = vibe.vibe_init(frames[0], vibe.VibeParams(rng_seed=11))
        return [vibe.vibe_step(model, f) for f in frames]

    for a, b in zip(full_run(), full_run()):
        np.testing.assert_array_equal(a, b)


def test_criterion_05_flow_sanity():
    rng = np.random.default_rng(505)
    a = rng.integers(0, 256, (64, 96), dtype=np.uint8)
    b = np.roll(a, 3, axis=1)
    flow = motion.estimate_flow(a, b)
    assert abs(np.median(flow[..., 0]) - 3.0) <= 1.0
    assert abs(np.median(flow[..., 1]) - 0.0) <= 1.0
    assert np.abs(motion.estimate_flow(a, a)).max() == 0.0


def test_criterion_06_fusion_threshold_properties():
    rng = np.random.default_rng(606)

    def bundle(scale):
        return CueBundle(
            t=0,
            m=(rng.random((12, 12)) * scale).astype(np.float32),
            m_skip=(rng.random((12, 12)) * scale).astype(np.float32),
            p_sem=(rng.random((12, 12)) * scale).astype(np.float32),
            b=(rng.random((12, 12)) * scale).astype(np.float32),
        )

    # clamp range + unit-weight identity
    big = bundle(1.0)
    s = fusion.fuse(big, FusionWeights(2.0, 2.0, 2.0, 2.0))
    assert s.min() >= 0.0 and s.max() <= 1.0
    np.testing.assert_array_equal(fusion.fuse(big, FusionWeights(1, 0, 0, 0)), big.m)

    # threshold antitonicity
    score = rng.random((16, 16)).astype(np.float32)
    previous = fusion.binarize(score, 0.1)
    for tau in (0.3, 0.5, 0.7, 0.9):
        current = fusion.binarize(score, tau)
        assert (current <= previous).all()
        previous = current

    # joint weight/threshold scaling leaves the mask unchanged when the
    # unclamped sums stay below 1 (c chosen exact in floating point)
    small = bundle(0.5)
    w = FusionWeights(0.5, 0.4, 0.3, 0.6)
    for c in (0.5, 0.25):
        cw = FusionWeights(c * w.alpha, c * w.beta, c * w.gamma, c * w.delta)
        np.testing.assert_array_equal(
            fusion.binarize(fusion.fuse(small, w), 0.4),
            fusion.binarize(fusion.fuse(small, cw), c * 0.4),
        )


def test_criterion_07_temporal_logic():
    cfg = temporal.TemporalConfig()

    def box(t, x0, y0, x1, y1, score=0.8):
        return BoxProposal(frame=t, x0=x0, y0=y0, x1=x1, y1=y1, score=score, id=0)

    # isolated single-frame box removed
    frames = [[] for _ in range(10)]
    frames[5] = [box(5, 10, 10, 20, 20)]
    assert all(not b for b in temporal.isolated_box_filter(frames, cfg))

    # persistent box retained
    frames = [[box(t, 10, 10, 20, 20)] for t in range(10)]
    filtered = temporal.isolated_box_filter(frames, cfg)
    assert all(len(b) == 1 for b in filtered)

    # filter idempotence
    rng = np.random.default_rng(707)
    for _ in range(25):
        table = []
        for t in range(10):
            table.append(
                [
                    box(
                        t,
                        int(rng.integers(0, 30)), int(rng.integers(0, 30)),
                        int(rng.integers(31, 60)), int(rng.integers(31, 60)),
                        score=float(rng.random()),
                    )
                    for _ in range(int(rng.integers(0, 3)))
                ]
            )
        once = temporal.isolated_box_filter(table, cfg)
        assert temporal.isolated_box_filter(once, cfg) == once

        # recovery never deletes
        recovered = temporal.temporal_recovery(once, cfg)
        for before, after in zip(once, recovered):
            assert all(b in after for b in before)

    # gap interpolation arithmetic on the worked example
    frames = [[] for _ in range(8)]
    frames[3] = [box(3, 10, 10, 20, 20, score=0.9)]
    frames[6] = [box(6, 14, 10, 24, 20, score=0.7)]
    out = temporal.temporal_recovery(frames, cfg)
    assert [b.box for b in out[4]] == [(11, 10, 21, 20)]
    assert [b.box for b in out[5]] == [(13, 10, 23, 20)]
    assert out[4][0].score == 0.7


def test_criterion_08_end_to_end_synthetic_benchmark(bench_root, bench_run):
    _, multi_report = bench_run
    multi_miou = multi_report.videos[0].miou
    assert multi_miou >= 0.5

    motion_cfg = _bench_config(bench_root, "motion_only", MOTION_ONLY)
    motion_report = pipeline.run(motion_cfg)
    assert multi_miou > motion_report.videos[0].miou


def test_criterion_09_stage_replay(bench_root, bench_run):
    cfg, _ = bench_run
    paths = pipeline.paths_for(cfg)
    masks_before = [p.read_bytes() for p in sorted(paths.masks_dir.glob("*.png"))]
    prompts_before = paths.prompts_path.read_bytes()

    pipeline.run(cfg, stage="propose")
    pipeline.run(cfg, stage="refine")
    assert paths.prompts_path.read_bytes() == prompts_before
    masks_after = [p.read_bytes() for p in sorted(paths.masks_dir.glob("*.png"))]
    assert masks_before and masks_after == masks_before

    pipeline.run(cfg, stage="refine")  # refine alone, from dumped prompts
    masks_again = [p.read_bytes() for p in sorted(paths.masks_dir.glob("*.png"))]
    assert masks_again == masks_before


def test_criterion_10_file_format_round_trips(tmp_path):
    rng = np.random.default_rng(1010)
    for i in range(30):
        h, w = int(rng.integers(1, 12)), int(rng.integers(1, 12))
        field = rng.normal(scale=30, size=(h, w, 2)).astype(np.float32)
        frameio.write_flow(field, tmp_path / "f.flo")
        np.testing.assert_array_equal(frameio.read_flow(tmp_path / "f.flo"), field)

        score = rng.random((h, w)).astype(np.float32)
        frameio.write_score_map(score, tmp_path / "s.pfm")
        np.testing.assert_array_equal(
            frameio.read_score_map(tmp_path / "s.pfm"), score
        )

        mask = (rng.random((h, w)) < 0.5).astype(np.uint8)
        frameio.write_mask(mask, tmp_path / "m.png")
        np.testing.assert_array_equal(frameio.read_mask(tmp_path / "m.png"), mask)

    for _ in range(10):
        table = []
        for t in range(int(rng.integers(1, 6))):
            boxes = []
            for i in range(int(rng.integers(0, 4))):
                x0, y0 = int(rng.integers(0, 20)), int(rng.integers(0, 20))
                boxes.append(
                    BoxProposal(
                        frame=t,
                        x0=x0, y0=y0,
                        x1=x0 + int(rng.integers(1, 10)),
                        y1=y0 + int(rng.integers(1, 10)),
                        score=float(rng.random()),
                        id=i,
                    )
                )
            table.append(boxes)
        refine.export_prompts(table, tmp_path / "p.jsonl")
        assert refine.parse_prompts(tmp_path / "p.jsonl") == table
