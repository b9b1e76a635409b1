"""
Shared fixtures - tiny model configs, synthetic clips and a session-wide corpus
"""

from pathlib import Path

import numpy as np
import pytest
import torch

from adenet.config import (
    ContextNetConfig,
    EncoderConfig,
    FusionConfig,
    ModelConfig,
    OptimConfig,
    RunConfig,
)
from adenet.harness.checkpoint import Checkpoint, save_checkpoint
from adenet.model import build_model
from adenet.signalio import ClipSpec, CorpusConfig, SpeakerKind, gen_clip, gen_corpus


def tiny_model_config(d: int = 8, heads: int = 2, **overrides: object) -> ModelConfig:
    """d=8, C_se=8, two heads, one block everywhere"""
    encoder = EncoderConfig(
        d=d, C_se=d, scale=0.25, se_stage_blocks=[1, 1, 1, 1], se_reduction=4, vtcn_depth=2
    )
    return ModelConfig(
        encoder=encoder,
        context=ContextNetConfig(num_blocks=1, C_se=d, heads=heads),
        fusion=FusionConfig(d=d, C_se=d),
        heads=heads,
        conv_kernel=3,
        ffn_expansion=2,
        **overrides,
    )


def tiny_run_config(**optim: object) -> RunConfig:
    settings = {"epochs": 1, "batch_size": 2, "lr": 1e-3, "seed": 0}
    settings.update(optim)
    return RunConfig(model=tiny_model_config(), optim=OptimConfig(**settings))


def random_inputs(t_v: int, batch: int = 1, seed: int = 0, dtype: torch.dtype = torch.float32) -> dict[str, torch.Tensor]:
    gen = torch.Generator().manual_seed(seed)
    return {
        "mfcc": torch.randn(batch, 4 * t_v, 13, generator=gen).to(dtype),
        "faces": torch.rand(batch, t_v, 112, 112, generator=gen).to(dtype),
        "mixture": (0.1 * torch.randn(batch, 640 * t_v, generator=gen)).to(dtype),
    }


@pytest.fixture
def tiny_config() -> ModelConfig:
    return tiny_model_config()


@pytest.fixture
def speaking_clip():
    return gen_clip(3, ClipSpec(duration_s=1.2, speaker_kind=SpeakerKind.SPEAKING, snr_db=5.0), "speak")


@pytest.fixture
def chewing_clip():
    return gen_clip(4, ClipSpec(duration_s=1.2, speaker_kind=SpeakerKind.SILENT_CHEWING, snr_db=5.0), "chew")


@pytest.fixture
def static_clip():
    return gen_clip(5, ClipSpec(duration_s=1.2, speaker_kind=SpeakerKind.SILENT_STATIC, snr_db=5.0), "static")


@pytest.fixture(scope="session")
def corpus_root(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Small three-split corpus shared by the harness tests"""
    root = tmp_path_factory.mktemp("corpus")
    gen_corpus(
        CorpusConfig(
            counts={"train": 4, "val": 2, "test": 4},
            master_seed=1,
            output_dir=str(root),
            duration_range_s=(1.0, 1.2),
        )
    )
    return root


@pytest.fixture(scope="session")
def tiny_checkpoint(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Untrained tiny model saved as a checkpoint"""
    config = RunConfig(model=tiny_model_config())
    model = build_model(config.model, seed=0)
    path = tmp_path_factory.mktemp("ckpt") / "tiny.pt"
    save_checkpoint(path, Checkpoint(model.state_dict(), {}, 0, config))
    return path


@pytest.fixture(autouse=True)
def _seed() -> None:
    torch.manual_seed(0)
    np.random.seed(0)


@pytest.fixture(scope="session")
def aclnet_checkpoint(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Untrained detection-only model"""
    config = RunConfig(model=tiny_model_config(variant="aclnet"))
    model = build_model(config.model, seed=0)
    path = tmp_path_factory.mktemp("ckpt") / "aclnet.pt"
    save_checkpoint(path, Checkpoint(model.state_dict(), {}, 0, config))
    return path
