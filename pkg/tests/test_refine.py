import json
import logging

import numpy as np
import pytest

from turbseg import frameio, refine
from turbseg.errors import FormatError
from turbseg.proposal import BoxProposal


def box(t, x0, y0, x1, y1, score=0.5, id=0):
    return BoxProposal(frame=t, x0=x0, y0=y0, x1=x1, y1=y1, score=score, id=id)


class TestPromptFile:
    def test_empty_frames_still_emit_lines(self, tmp_path):
        path = tmp_path / "p.jsonl"
        refine.export_prompts([[], [], []], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 3
        for t, line in enumerate(lines):
            assert json.loads(line) == {"frame": t, "boxes": []}

    def test_round_trip(self, tmp_path, rng):
        frames = []
        for t in range(5):
            frames.append(
                [
                    box(t, i, i, i + int(rng.integers(2, 9)), i + 5, score=float(rng.random()), id=i)
                    for i in range(int(rng.integers(0, 4)))
                ]
            )
        path = tmp_path / "p.jsonl"
        refine.export_prompts(frames, path)
        assert refine.parse_prompts(path) == frames

    def test_non_integer_coordinates_rejected(self, tmp_path):
        bad = BoxProposal(frame=0, x0=1.5, y0=0, x1=3, y1=3, score=0.5, id=0)
        with pytest.raises(ValueError, match="integer"):
            refine.export_prompts([[bad]], tmp_path / "p.jsonl")

    def test_invalid_extent_rejected(self, tmp_path):
        bad = box(0, 5, 0, 5, 3)
        with pytest.raises(ValueError, match="extent"):
            refine.export_prompts([[bad]], tmp_path / "p.jsonl")

    def test_out_of_order_parse_rejected(self, tmp_path):
        path = tmp_path / "p.jsonl"
        path.write_text('{"frame": 1, "boxes": []}\n')
        with pytest.raises(FormatError, match="out of order"):
            refine.parse_prompts(path)


class TestImportRefined:
    def test_all_frames_present(self, tmp_path, rng):
        for t in range(4):
            mask = (rng.random((6, 8)) < 0.5).astype(np.uint8)
            frameio.write_mask(mask, tmp_path / f"refined_{t:06}.png")
        masks = refine.import_refined(tmp_path, (6, 8), 4)
        assert len(masks) == 4

    def test_missing_frame_named(self, tmp_path):
        frameio.write_mask(np.zeros((4, 4), np.uint8), tmp_path / "refined_000000.png")
        with pytest.raises(FormatError, match="frame 1"):
            refine.import_refined(tmp_path, (4, 4), 2)

    def test_wrong_size_rejected(self, tmp_path):
        frameio.write_mask(np.zeros((4, 4), np.uint8), tmp_path / "refined_000000.png")
        with pytest.raises(FormatError, match="expected"):
            refine.import_refined(tmp_path, (5, 5), 1)


class TestFallbackRefine:
    def test_no_boxes_all_zero(self):
        s = np.ones((8, 8), np.float32)
        assert refine.fallback_refine(s, [], 0.5).sum() == 0

    def test_saturated_box_equals_interior(self):
        s = np.ones((10, 10), np.float32)
        mask = refine.fallback_refine(s, [box(0, 2, 3, 6, 7)], 0.5)
        want = np.zeros((10, 10), np.uint8)
        want[3:7, 2:6] = 1
        np.testing.assert_array_equal(mask, want)

    def test_empty_box_filled(self):
        s = np.zeros((10, 10), np.float32)
        mask = refine.fallback_refine(s, [box(0, 2, 3, 6, 7)], 0.5)
        assert mask[3:7, 2:6].all()
        assert mask.sum() == 16

    def test_threshold_inside_box(self):
        s = np.zeros((8, 8), np.float32)
        s[2, 2] = 0.9
        s[3, 3] = 0.2
        mask = refine.fallback_refine(s, [box(0, 0, 0, 8, 8)], 0.5)
        assert mask[2, 2] == 1 and mask[3, 3] == 0

    def test_mask_always_inside_boxes(self, rng):
        for _ in range(10):
            s = rng.random((16, 16)).astype(np.float32)
            boxes = [box(0, 1, 2, 9, 9), box(0, 8, 8, 15, 14, id=1)]
            mask = refine.fallback_refine(s, boxes, 0.6)
            assert refine.containment_fraction(mask, boxes) == 1.0


class TestContainmentAudit:
    def test_empty_mask_is_vacuously_contained(self):
        assert refine.containment_fraction(np.zeros((5, 5), np.uint8), []) == 1.0

    def test_bleeding_mask_logged(self, caplog):
        mask = np.ones((10, 10), np.uint8)
        boxes = [box(0, 0, 0, 3, 3)]
        with caplog.at_level(logging.WARNING):
            frac = refine.audit_containment(mask, boxes, frame=4)
        assert frac == pytest.approx(0.09)
        assert "frame 4" in caplog.text

    def test_contained_mask_not_logged(self, caplog):
        mask = np.zeros((10, 10), np.uint8)
        mask[1:3, 1:3] = 1
        with caplog.at_level(logging.WARNING):
            refine.audit_containment(mask, [box(0, 0, 0, 5, 5)], frame=0)
        assert not caplog.records
