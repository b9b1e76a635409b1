"""
Checkpoints - weights, optimizer state, epoch, config snapshot and metric history
Stored with torch.save as plain containers so they load with weights_only=True
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import torch

from adenet.config import RunConfig
from adenet.errors import ConfigError
from adenet.model import ADENet, build_model

CHECKPOINT_FORMAT = 1


@dataclass
class Checkpoint:
    model_state: dict[str, torch.Tensor]
    optimizer_state: dict[str, Any]
    epoch: int
    config: RunConfig
    history: list[dict[str, Any]] = field(default_factory=list)
    best_epoch: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": CHECKPOINT_FORMAT,
            "model": self.model_state,
            "optimizer": self.optimizer_state,
            "epoch": self.epoch,
            "config": self.config.model_dump(mode="json"),
            "history": self.history,
            "best_epoch": self.best_epoch,
        }


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(ckpt.to_dict(), path)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    try:
        data = torch.load(Path(path), map_location="cpu", weights_only=True)
    except (OSError, RuntimeError) as e:
        raise ConfigError(f"cannot load checkpoint {path}: {e}") from e
    if not isinstance(data, dict) or data.get("format") != CHECKPOINT_FORMAT:
        raise ConfigError(f"{path}: not an adenet checkpoint")
    return Checkpoint(
        model_state=data["model"],
        optimizer_state=data["optimizer"],
        epoch=int(data["epoch"]),
        config=RunConfig.model_validate(data["config"]),
        history=list(data["history"]),
        best_epoch=data["best_epoch"],
    )


def model_from_checkpoint(ckpt: Checkpoint | str | Path, dtype: torch.dtype = torch.float32) -> ADENet:
    """Rebuild the model in eval mode; weights that do not fit the config raise ConfigError"""
    if not isinstance(ckpt, Checkpoint):
        ckpt = load_checkpoint(ckpt)
    model = build_model(ckpt.config.model, dtype=dtype)
    try:
        model.load_state_dict(ckpt.model_state)
    except RuntimeError as e:
        raise ConfigError(f"checkpoint weights do not fit the configured model: {e}") from e
    return model.eval()
