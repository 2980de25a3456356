import numpy as np
import pytest

from turbseg import fusion
from turbseg.cues import CueBundle
from turbseg.errors import ConfigError


def bundle_of(m, m_skip=None, p_sem=None, b=None, shape=(4, 5)):
    zero = np.zeros(shape, np.float32)

    def arr(v):
        if v is None:
            return zero
        return np.full(shape, v, np.float32) if np.isscalar(v) else v

    return CueBundle(t=0, m=arr(m), m_skip=arr(m_skip), p_sem=arr(p_sem), b=arr(b))


def random_bundle(rng, shape=(8, 8), scale=1.0):
    return CueBundle(
        t=0,
        m=(rng.random(shape) * scale).astype(np.float32),
        m_skip=(rng.random(shape) * scale).astype(np.float32),
        p_sem=(rng.random(shape) * scale).astype(np.float32),
        b=(rng.random(shape) * scale).astype(np.float32),
    )


class TestFuse:
    def test_unit_weight_identity(self, rng):
        bundle = random_bundle(rng)
        s = fusion.fuse(bundle, fusion.FusionWeights(1, 0, 0, 0))
        np.testing.assert_array_equal(s, bundle.m)

    def test_weighted_average(self):
        bundle = bundle_of(0.5, 1.0)
        s = fusion.fuse(bundle, fusion.FusionWeights(0.5, 0.5, 0, 0))
        np.testing.assert_array_equal(s, 0.75)

    def test_clamp_to_one(self):
        bundle = bundle_of(1.0, 1.0, 1.0, 1.0)
        s = fusion.fuse(bundle, fusion.FusionWeights(1, 1, 1, 1))
        np.testing.assert_array_equal(s, 1.0)

    def test_output_in_unit_range(self, rng):
        for _ in range(10):
            s = fusion.fuse(random_bundle(rng), fusion.FusionWeights(2.0, 1.5, 1.0, 3.0))
            assert s.min() >= 0.0 and s.max() <= 1.0

    def test_prescale_linearity(self, rng):
        # with unclamped sums <= 1, halving the weights halves the output
        bundle = random_bundle(rng, scale=0.5)
        w = fusion.FusionWeights(0.5, 0.5, 0.5, 0.5)
        half = fusion.FusionWeights(0.25, 0.25, 0.25, 0.25)
        np.testing.assert_array_equal(
            fusion.fuse(bundle, half), 0.5 * fusion.fuse(bundle, w)
        )

    def test_weight_invariants(self):
        with pytest.raises(ConfigError, match="nonnegative"):
            fusion.FusionWeights(-0.1, 0, 0, 0)
        with pytest.raises(ConfigError, match="positive"):
            fusion.FusionWeights(0, 0, 0, 0)


class TestBinarize:
    def test_inclusive_threshold(self):
        mask = fusion.binarize(np.full((3, 3), 0.5, np.float32), 0.5)
        np.testing.assert_array_equal(mask, 1)

    def test_unreachable_threshold(self):
        s = np.full((3, 3), 0.99, np.float32)
        np.testing.assert_array_equal(fusion.binarize(s, 1.0), 0)

    def test_antitone_in_tau(self, rng):
        s = rng.random((16, 16)).astype(np.float32)
        hi = fusion.binarize(s, 0.6)
        lo = fusion.binarize(s, 0.4)
        assert (hi <= lo).all()

    def test_joint_weight_tau_scaling(self, rng):
        # scaling weights and tau by the same power of two (exact in
        # floating point) leaves the binarized mask unchanged when no
        # pixel clamps
        bundle = random_bundle(rng, scale=0.5)
        w = fusion.FusionWeights(0.5, 0.5, 0.4, 0.6)
        for c in (0.5, 0.25):
            scaled = fusion.FusionWeights(c * w.alpha, c * w.beta, c * w.gamma, c * w.delta)
            m1 = fusion.binarize(fusion.fuse(bundle, w), 0.4)
            m2 = fusion.binarize(fusion.fuse(bundle, scaled), c * 0.4)
            np.testing.assert_array_equal(m1, m2)


class TestPregate:
    def test_epsilon_floor(self):
        m = np.full((2, 2), 0.8, np.float32)
        p = np.zeros((2, 2), np.float32)
        gated = fusion.pregate_motion(m, p, 0.3)
        np.testing.assert_allclose(gated, 0.8 * 0.3, rtol=1e-6)

    def test_full_support_passes_through(self):
        m = np.full((2, 2), 0.8, np.float32)
        p = np.ones((2, 2), np.float32)
        np.testing.assert_allclose(fusion.pregate_motion(m, p, 0.3), 0.8, rtol=1e-6)

    def test_fuse_config_applies_pregate(self, rng):
        bundle = random_bundle(rng)
        cfg = fusion.FusionConfig(
            weights=fusion.FusionWeights(1, 0, 0, 0),
            tau=0.5,
            semantic_pregate=True,
            pregate_epsilon=0.25,
        )
        expected = fusion.fuse(
            bundle.with_motion(fusion.pregate_motion(bundle.m, bundle.p_sem, 0.25)),
            cfg.weights,
        )
        np.testing.assert_array_equal(fusion.fuse_config(bundle, cfg), expected)

    def test_config_invariants(self):
        with pytest.raises(ConfigError, match="tau"):
            fusion.FusionConfig(tau=0.0)
        with pytest.raises(ConfigError, match="epsilon"):
            fusion.FusionConfig(pregate_epsilon=1.5)
