"""Cross-component contract: adapter outputs must parse with the pipeline's
own loaders and satisfy the behavioral guarantees the pipeline assumes."""

import json

import numpy as np
import pytest

from turbseg import frameio, refine as turbseg_refine
from turbseg_adapters import fileio, flow, refiner, semantic


@pytest.fixture
def rng():
    return np.random.default_rng(77)


def write_frames(directory, frames):
    directory.mkdir(parents=True, exist_ok=True)
    import cv2

    for t, frame in enumerate(frames):
        cv2.imwrite(str(directory / f"frame_{t:06}.png"), frame)


def textured_frames(rng, count, shape=(48, 64)):
    base = rng.integers(40, 200, shape).astype(np.uint8)
    import cv2

    base = cv2.GaussianBlur(base, (5, 5), 1.5)
    return [base.copy() for _ in range(count)]


class TestFlowAdapter:
    def test_adjacent_file_count_for_three_frames(self, tmp_path, rng):
        write_frames(tmp_path / "frames", textured_frames(rng, 3))
        n = flow.run_flow_adapter(tmp_path / "frames", tmp_path / "out", k=1)
        files = sorted((tmp_path / "out").glob("*.flo"))
        assert n == len(files) == 2
        assert [f.name for f in files] == ["flow_000000_000001.flo", "flow_000001_000002.flo"]

    def test_skip_pairs_match_pipeline_lookup(self, tmp_path, rng):
        from turbseg import motion

        write_frames(tmp_path / "frames", textured_frames(rng, 8))
        flow.run_flow_adapter(tmp_path / "frames", tmp_path / "out", k=5)
        for t in range(8):
            for k in (1, 5):
                src, dst = motion.skip_pair(t, k, 8)
                assert (tmp_path / "out" / f"flow_{src:06}_{dst:06}.flo").exists()

    def test_constant_frames_give_near_zero_flow(self, tmp_path, rng):
        write_frames(tmp_path / "frames", textured_frames(rng, 4))
        flow.run_flow_adapter(tmp_path / "frames", tmp_path / "out", k=2)
        for path in (tmp_path / "out").glob("*.flo"):
            field = frameio.read_flow(path)  # parses with the primary loader
            magnitude = np.hypot(field[..., 0], field[..., 1])
            assert np.median(magnitude) < 0.5

    def test_manifest_written(self, tmp_path, rng):
        write_frames(tmp_path / "frames", textured_frames(rng, 3))
        flow.run_flow_adapter(tmp_path / "frames", tmp_path / "out", k=1)
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "ok"
        assert manifest["adapter"] == "flow"
        assert manifest["parameters"]["k"] == 1

    def test_shifted_content_recovered(self, tmp_path, rng):
        frames = textured_frames(rng, 1, shape=(64, 96))
        a = frames[0]
        b = np.roll(a, 4, axis=1)
        write_frames(tmp_path / "frames", [a, b])
        flow.run_flow_adapter(tmp_path / "frames", tmp_path / "out", k=1)
        field = frameio.read_flow(tmp_path / "out" / "flow_000000_000001.flo")
        interior = field[16:-16, 16:-16, 0]
        assert abs(np.median(interior) - 4.0) <= 1.0


class TestSemanticAdapter:
    def test_maps_in_unit_range_with_frame_dims(self, tmp_path, rng):
        frames = textured_frames(rng, 3, shape=(40, 56))
        frames[1][10:25, 20:40] = 230  # one object-ish region
        write_frames(tmp_path / "frames", frames)
        n = semantic.run_semantic_adapter(tmp_path / "frames", tmp_path / "out")
        assert n == 3
        for t in range(3):
            values = frameio.read_score_map(tmp_path / "out" / f"frame_{t:06}.pfm")
            assert values.shape == (40, 56)
            assert values.min() >= 0.0 and values.max() <= 1.0

    def test_uniform_frame_is_near_uniform(self, tmp_path):
        write_frames(tmp_path / "frames", [np.full((48, 64), 128, np.uint8)])
        semantic.run_semantic_adapter(tmp_path / "frames", tmp_path / "out")
        values = frameio.read_score_map(tmp_path / "out" / "frame_000000.pfm")
        spread = np.percentile(values, 95) - np.percentile(values, 5)
        assert spread < 0.3

    def test_bright_object_gets_salient(self, tmp_path, rng):
        frame = np.full((48, 64), 90, np.uint8)
        frame[18:30, 24:40] = 220
        write_frames(tmp_path / "frames", [frame])
        semantic.run_semantic_adapter(tmp_path / "frames", tmp_path / "out")
        values = frameio.read_score_map(tmp_path / "out" / "frame_000000.pfm")
        inside = values[18:30, 24:40].mean()
        outside = values[np.ix_(range(0, 10), range(0, 10))].mean()
        assert inside > outside


class TestRefinerAdapter:
    def test_empty_prompts_give_all_zero_masks(self, tmp_path, rng):
        write_frames(tmp_path / "frames", textured_frames(rng, 3))
        prompts = tmp_path / "prompts.jsonl"
        prompts.write_text(
            "\n".join(json.dumps({"frame": t, "boxes": []}) for t in range(3)) + "\n"
        )
        n = refiner.run_refiner_adapter(tmp_path / "frames", prompts, tmp_path / "out")
        assert n == 3
        masks = turbseg_refine.import_refined(tmp_path / "out", (48, 64), 3)
        for mask in masks:
            assert mask.sum() == 0

    def test_high_contrast_object_refined_inside_box(self, tmp_path):
        frame = np.full((64, 80), 60, np.uint8)
        frame[20:36, 30:50] = 220
        write_frames(tmp_path / "frames", [frame])
        record = {
            "frame": 0,
            "boxes": [{"id": 0, "x0": 26, "y0": 16, "x1": 54, "y1": 40, "score": 0.9}],
        }
        prompts = tmp_path / "prompts.jsonl"
        prompts.write_text(json.dumps(record) + "\n")
        refiner.run_refiner_adapter(tmp_path / "frames", prompts, tmp_path / "out")
        (mask,) = turbseg_refine.import_refined(tmp_path / "out", (64, 80), 1)
        assert mask.sum() > 0
        inside = mask[16:40, 26:54].sum()
        assert inside / mask.sum() >= 0.5

    def test_prompt_frame_count_mismatch(self, tmp_path, rng):
        write_frames(tmp_path / "frames", textured_frames(rng, 2))
        prompts = tmp_path / "prompts.jsonl"
        prompts.write_text(json.dumps({"frame": 0, "boxes": []}) + "\n")
        with pytest.raises(ValueError, match="frames vs"):
            refiner.run_refiner_adapter(tmp_path / "frames", prompts, tmp_path / "out")
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "failed"


class TestEndToEndWithPipeline:
    def test_adapter_cues_and_refinement_drive_the_pipeline(self, tmp_path):
        """Full circle: adapter flow + semantic cues in, pipeline prompts
        out, adapter refinement back in as external masks."""
        import dataclasses

        from turbseg import config, pipeline, synth
        from turbseg.fusion import FusionWeights

        frames, gt = synth.generate_sequence(
            synth.SynthConfig(width=96, height=64, frames=10, start_y=24)
        )
        synth.write_sequence(frames, gt, tmp_path / "frames", tmp_path / "gt")

        flow.run_flow_adapter(tmp_path / "frames", tmp_path / "cue_flow", k=5)
        semantic.run_semantic_adapter(tmp_path / "frames", tmp_path / "cue_sem")

        cfg = config.PipelineConfig(base_dir=tmp_path)
        cfg.input.frames_dir = "frames"
        cfg.eval.gt_dir = "gt"
        cfg.output.out_dir = "out"
        cfg.cue_sources["motion"] = config.CueSourceConfig(origin="files", directory="cue_flow")
        cfg.cue_sources["skip_motion"] = config.CueSourceConfig(origin="files", directory="cue_flow")
        cfg.cue_sources["semantic"] = config.CueSourceConfig(
            origin="files", directory="cue_sem", optional=True
        )
        cfg = dataclasses.replace(
            cfg,
            fusion=dataclasses.replace(
                cfg.fusion, weights=FusionWeights(0.2, 0.4, 0.1, 0.4), tau=0.55
            ),
        )
        pipeline.run(cfg, stage="cues")
        pipeline.run(cfg, stage="propose")

        paths = pipeline.paths_for(cfg)
        refiner.run_refiner_adapter(
            tmp_path / "frames", paths.prompts_path, tmp_path / "refined"
        )
        cfg = dataclasses.replace(
            cfg, refine=config.RefineConfig(mode="external", refined_dir="refined")
        )
        masks = pipeline.run_refine(cfg, paths)
        assert len(masks) == 10
        report = pipeline.run_eval(cfg, paths)
        assert report.final_miou >= 0.0  # scored, structurally sound
