"""
Run Configuration - pydantic models for the model graph, optimizer and data
Loaded from JSON files in demo-data/ with environment overrides
"""

import json
import os
from pathlib import Path
from typing import Any, Literal, Mapping

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from adenet.errors import ConfigError

SAMPLE_RATE = 16000
VIDEO_FPS = 25
MFCC_RATE = 100
FACE_SIZE = 112

MlnPosition = Literal["none", "ffn1", "cma", "conv", "ffn2", "ln"]
CmaVariant = Literal["self_keyed", "cross_keyed"]
AudioInput = Literal["mfcc", "raw"]
ContextVariant = Literal["conformer", "tcn"]
ModelVariant = Literal["adenet", "aclnet"]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EncoderConfig(_Section):
    """Front-end networks: speech temporal, visual temporal and SE encoder/decoder"""

    d: int = Field(128, ge=1)
    se_stage_blocks: list[int] = Field(default_factory=lambda: [3, 4, 6, 3])
    se_stage_channels: list[int] = Field(default_factory=lambda: [16, 32, 64, 128])
    se_reduction: int = Field(16, ge=1)
    visual_stage_channels: list[int] = Field(default_factory=lambda: [16, 32, 64, 128])
    visual_temporal_kernel: int = Field(5, ge=1)
    C_se: int = Field(128, ge=1)
    K: int = Field(40, ge=2)
    S: int = Field(20, ge=1)
    vtcn_depth: int = Field(5, ge=1)
    scale: float = Field(1.0, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self) -> "EncoderConfig":
        if self.K != 2 * self.S:
            raise ValueError(f"kernel K={self.K} must equal 2*S={2 * self.S}")
        if self.C_se != self.d:
            raise ValueError(f"C_se={self.C_se} must equal d={self.d}")
        if len(self.se_stage_blocks) != len(self.se_stage_channels):
            raise ValueError("se_stage_blocks and se_stage_channels differ in length")
        if len(self.se_stage_channels) != 4 or len(self.visual_stage_channels) != 4:
            raise ValueError("encoders use exactly four residual stages")
        if self.visual_temporal_kernel % 2 == 0:
            raise ValueError("visual_temporal_kernel must be odd")
        return self

    def scaled(self, channels: int) -> int:
        return max(1, int(round(channels * self.scale)))


class ContextNetConfig(_Section):
    num_blocks: int = Field(4, ge=1)
    C_se: int = Field(128, ge=1)
    heads: int = Field(8, ge=1)
    variant: ContextVariant = "conformer"
    tcn_dilations: list[int] = Field(default_factory=lambda: [1, 2, 4, 8])


class FusionConfig(_Section):
    resample_scale: int = Field(32, ge=1)
    ablate_a_to_s: bool = False
    ablate_s_to_a: bool = False
    d: int = Field(128, ge=1)
    C_se: int = Field(128, ge=1)


class ModelConfig(_Section):
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    context: ContextNetConfig = Field(default_factory=ContextNetConfig)
    fusion: FusionConfig = Field(default_factory=FusionConfig)
    heads: int = Field(8, ge=1)
    mln_position: MlnPosition = "ln"
    cma_variant: CmaVariant = "self_keyed"
    use_cmc: bool = True
    audio_input: AudioInput = "mfcc"
    variant: ModelVariant = "adenet"
    ffn_expansion: int = Field(4, ge=1)
    conv_kernel: int = Field(15, ge=1)
    dropout: float = Field(0.0, ge=0.0, lt=1.0)

    @model_validator(mode="after")
    def _check(self) -> "ModelConfig":
        d = self.encoder.d
        if self.context.C_se != d or self.fusion.d != d or self.fusion.C_se != d:
            raise ValueError("encoder.d, context.C_se, fusion.d and fusion.C_se must agree")
        if d % self.heads or d % self.context.heads:
            raise ValueError(f"d={d} must be divisible by the attention head counts")
        if self.conv_kernel % 2 == 0:
            raise ValueError("conv_kernel must be odd")
        expected_scale = SAMPLE_RATE // (self.encoder.S * VIDEO_FPS)
        if self.fusion.resample_scale != expected_scale:
            raise ValueError(
                f"resample_scale={self.fusion.resample_scale} but the audio/video step "
                f"ratio is {expected_scale}"
            )
        return self

    @property
    def d(self) -> int:
        return self.encoder.d


class OptimConfig(_Section):
    lr: float = Field(1e-4, gt=0.0)
    weight_decay: float = Field(1e-4, ge=0.0)
    lr_decay_per_epoch: float = Field(0.95, gt=0.0, le=1.0)
    betas: tuple[float, float] = (0.9, 0.999)
    epochs: int = Field(20, ge=1)
    batch_size: int = Field(4, ge=1)
    seed: int = 0
    grad_clip: float = Field(5.0, gt=0.0)
    max_steps: int | None = Field(None, ge=1)
    device: str = "cpu"
    num_workers: int = Field(0, ge=0)
    prefetch_factor: int = Field(2, ge=1)


class DataConfig(_Section):
    corpus_dir: str = "corpus"
    train_split: str = "train"
    val_split: str = "val"
    snr_list: list[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0])
    snr_mode: Literal["mixed", "fixed"] = "mixed"
    augment: bool = True
    negative_mix_prob: float = Field(0.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self) -> "DataConfig":
        if not self.snr_list:
            raise ValueError("snr_list must not be empty")
        if self.snr_mode == "fixed" and len(self.snr_list) != 1:
            raise ValueError("snr_mode=fixed trains on exactly one SNR level")
        return self


class LossWeights(_Section):
    lambda1: float = Field(1.0, ge=0.0)
    lambda2: float = Field(1.0, ge=0.0)


class TrackingConfig(_Section):
    mlflow_uri: str | None = None
    experiment: str = "adenet"


class RunConfig(_Section):
    model: ModelConfig = Field(default_factory=ModelConfig)
    optim: OptimConfig = Field(default_factory=OptimConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    loss: LossWeights = Field(default_factory=LossWeights)
    tracking: TrackingConfig = Field(default_factory=TrackingConfig)


def scaled_model_config(
    d: int = 8,
    heads: int = 2,
    scale: float = 0.25,
    num_blocks: int = 1,
    **overrides: Any,
) -> ModelConfig:
    """Small model with consistent dims, used by tests and the overfit experiment"""
    encoder = EncoderConfig(d=d, C_se=d, scale=scale)
    context = ContextNetConfig(num_blocks=num_blocks, C_se=d, heads=heads)
    fusion = FusionConfig(d=d, C_se=d)
    return ModelConfig(encoder=encoder, context=context, fusion=fusion, heads=heads, **overrides)


def parse_run_config(data: Mapping[str, Any], env: Mapping[str, str] | None = None) -> RunConfig:
    """Validate a config mapping and apply environment overrides"""
    try:
        config = RunConfig.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(f"invalid run config: {e}") from e

    env = os.environ if env is None else env
    seed = env.get("ADENET_SEED")
    if seed:
        try:
            config.optim.seed = int(seed)
        except ValueError as e:
            raise ConfigError(f"ADENET_SEED must be an integer, got {seed!r}") from e
    return config


def load_run_config(path: str | Path, env: Mapping[str, str] | None = None) -> RunConfig:
    """Load a RunConfig from a JSON file"""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_run_config(data, env)


def flatten_config(config: BaseModel, prefix: str = "") -> dict[str, Any]:
    """Dotted key -> value view of a config, used for tracking and config diffs"""
    flat: dict[str, Any] = {}
    for key, value in config.model_dump(mode="json").items():
        _flatten_into(flat, f"{prefix}{key}", value)
    return flat


def _flatten_into(flat: dict[str, Any], key: str, value: Any) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten_into(flat, f"{key}.{k}", v)
    else:
        flat[key] = value
