"""
Tests for run and corpus configuration
"""

import json
from pathlib import Path

import pytest

from adenet.config import RunConfig, flatten_config, load_run_config, parse_run_config, scaled_model_config
from adenet.errors import ConfigError
from adenet.signalio import load_corpus_config

DEMO_DATA = Path(__file__).resolve().parents[1] / "demo-data"


@pytest.mark.unit
class TestRunConfig:
    def test_defaults(self):
        config = parse_run_config({}, env={})
        assert config.model.d == 128
        assert config.model.heads == 8
        assert config.model.mln_position == "ln"
        assert config.model.fusion.resample_scale == 32
        assert config.optim.lr == pytest.approx(1e-4)
        assert config.optim.lr_decay_per_epoch == pytest.approx(0.95)
        assert config.loss.lambda1 == config.loss.lambda2 == 1.0
        assert config.tracking.mlflow_uri is None

    def test_unknown_key_is_rejected(self):
        with pytest.raises(ConfigError):
            parse_run_config({"optim": {"learning_rate": 0.1}}, env={})

    def test_seed_from_environment(self):
        assert parse_run_config({}, env={"ADENET_SEED": "17"}).optim.seed == 17

    def test_bad_seed_from_environment(self):
        with pytest.raises(ConfigError):
            parse_run_config({}, env={"ADENET_SEED": "abc"})

    def test_inconsistent_dims(self):
        with pytest.raises(ConfigError):
            parse_run_config({"model": {"encoder": {"d": 64, "C_se": 64}}}, env={})

    def test_heads_must_divide_d(self):
        with pytest.raises(ConfigError):
            parse_run_config({"model": {"heads": 3}}, env={})

    def test_fixed_snr_mode_needs_one_level(self):
        with pytest.raises(ConfigError):
            parse_run_config({"data": {"snr_mode": "fixed"}}, env={})

    def test_scaled_model_config_is_consistent(self):
        config = scaled_model_config(d=16, heads=4)
        assert config.context.C_se == config.fusion.d == config.encoder.C_se == 16

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_run_config(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_flatten(self):
        flat = flatten_config(RunConfig())
        assert flat["model.encoder.d"] == 128
        assert flat["model.fusion.ablate_a_to_s"] is False
        assert flat["optim.betas"] == [0.9, 0.999]
        assert json.dumps(flat)


@pytest.mark.unit
@pytest.mark.parametrize(
    "name", ["adenet-config.json", "tiny-config.json", "overfit-config.json", "ablation-config.json"]
)
def test_demo_run_configs_load(name):
    config = load_run_config(DEMO_DATA / name, env={})
    assert config.model.encoder.C_se == config.model.d


@pytest.mark.unit
@pytest.mark.parametrize("name", ["corpus-config.json", "overfit-corpus.json", "ablation-corpus.json"])
def test_demo_corpus_configs_load(name):
    config = load_corpus_config(DEMO_DATA / name)
    assert sum(config.counts.values()) > 0
