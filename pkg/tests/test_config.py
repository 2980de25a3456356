import dataclasses

import pytest

from turbseg import config
from turbseg.errors import ConfigError


class TestRoundTrip:
    def test_default_config_round_trips(self, tmp_path):
        cfg = config.PipelineConfig(base_dir=tmp_path)
        path = tmp_path / "run.toml"
        config.save_config(cfg, path)
        loaded = config.load_config(path)
        assert config.config_to_dict(loaded) == config.config_to_dict(cfg)

    def test_modified_values_survive(self, tmp_path):
        cfg = config.PipelineConfig(base_dir=tmp_path)
        cfg = dataclasses.replace(
            cfg,
            seed=99,
            fusion=dataclasses.replace(cfg.fusion, tau=0.6),
        )
        cfg.cue_sources["semantic"].directory = "cues/semantic"
        path = tmp_path / "run.toml"
        config.save_config(cfg, path)
        loaded = config.load_config(path)
        assert loaded.seed == 99
        assert loaded.fusion.tau == 0.6
        assert loaded.cue_sources["semantic"].directory == "cues/semantic"

    def test_base_dir_resolution(self, tmp_path):
        cfg = config.PipelineConfig(base_dir=tmp_path)
        assert cfg.resolve("frames") == tmp_path / "frames"
        assert cfg.resolve("/abs/frames") == dataclasses.replace(cfg).resolve("/abs/frames")


class TestValidation:
    def test_negative_weight_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[fusion]\ngamma = -1.0\n")
        with pytest.raises(ConfigError):
            config.load_config(path)

    def test_zero_tau_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[fusion]\ntau = 0.0\n")
        with pytest.raises(ConfigError):
            config.load_config(path)

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("[vibe]\nsample_count = 3\n")
        with pytest.raises(ConfigError, match="bad config key"):
            config.load_config(path)

    def test_invalid_toml_rejected(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text("seed = = 3\n")
        with pytest.raises(ConfigError, match="invalid TOML"):
            config.load_config(path)

    def test_bad_refine_mode(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('[refine]\nmode = "never"\n')
        with pytest.raises(ConfigError):
            config.load_config(path)

    def test_empty_convention_guard(self):
        with pytest.raises(ConfigError):
            config.EvalConfig(empty_convention="sometimes")


class TestDerivedValues:
    def test_tau_box_inherits_fusion_tau(self):
        cfg = config.PipelineConfig()
        assert cfg.tau_box() == cfg.fusion.tau
        cfg = dataclasses.replace(
            cfg, refine=config.RefineConfig(tau_box=0.7)
        )
        assert cfg.tau_box() == 0.7

    def test_sources_reflect_roles(self, tmp_path):
        cfg = config.PipelineConfig(base_dir=tmp_path)
        sources = cfg.sources()
        assert [s.role for s in sources] == list(config.ROLES)
        semantic = sources[2]
        assert semantic.origin == "files" and semantic.optional

    def test_seed_feeds_vibe_params(self):
        cfg = config.PipelineConfig(seed=1234)
        assert cfg.vibe.params(cfg.seed).rng_seed == 1234
