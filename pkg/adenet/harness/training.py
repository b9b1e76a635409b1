"""
Training - Adam with per-epoch exponential decay, joint loss, per-epoch checkpoints
"""

import copy
import json
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator

import numpy as np
import torch
from torch.nn.utils import clip_grad_norm_
from torch.optim import Adam
from torch.optim.lr_scheduler import ExponentialLR
from torch.utils.data import DataLoader

from adenet.config import OptimConfig, RunConfig, flatten_config
from adenet.errors import ConfigError, TrainingDivergedError, UndefinedMetricError
from adenet.features import negative_mix
from adenet.harness.checkpoint import Checkpoint, save_checkpoint
from adenet.harness.data import Batch, make_loader, set_loader_epoch
from adenet.harness.evaluation import evaluate_model
from adenet.log import get_logger
from adenet.model import ADENet, ModelOutput, build_model
from adenet.objectives import asd_loss, si_sdr_loss, total_loss
from adenet.signalio import CorpusManifest, derive_seed, read_manifest

logger = get_logger(__name__)


def lr_at_epoch(optim: OptimConfig, epoch: int) -> float:
    """lr_e = lr_0 * decay^e"""
    return optim.lr * optim.lr_decay_per_epoch**epoch


def seed_everything(seed: int) -> None:
    torch.manual_seed(seed)
    np.random.seed(seed % 2**32)


def forward_batch(model: ADENet, batch: Batch, mixture: torch.Tensor | None = None) -> ModelOutput:
    mfcc = batch.mfcc if model.config.audio_input == "mfcc" else None
    return model(mfcc, batch.faces, batch.mixture if mixture is None else mixture)


def batch_losses(out: ModelOutput, batch: Batch) -> tuple[torch.Tensor, torch.Tensor]:
    """(L_se, L_asd); L_se averages over speaking clips only"""
    l_asd = asd_loss(out.scores, batch.labels).mean()
    speaking = batch.speaking
    if out.enhanced is None or not bool(speaking.any()):
        return out.scores.new_zeros(()), l_asd
    l_se = si_sdr_loss(out.enhanced[speaking], batch.clean[speaking]).mean()
    return l_se, l_asd


def parameter_norms(model: ADENet) -> dict[str, float]:
    return {name: float(p.detach().norm()) for name, p in model.named_parameters()}


@contextmanager
def _tracking(config: RunConfig) -> Iterator[Any]:
    """Yields the mlflow module inside an active run, or None when tracking is off"""
    if not config.tracking.mlflow_uri:
        yield None
        return
    try:
        import mlflow
    except ImportError as e:
        raise ConfigError("tracking.mlflow_uri is set but mlflow is not installed") from e
    mlflow.set_tracking_uri(config.tracking.mlflow_uri)
    mlflow.set_experiment(config.tracking.experiment)
    with mlflow.start_run():
        mlflow.log_params(flatten_config(config))
        yield mlflow


@torch.no_grad()
def validation_loss(model: ADENet, loader: DataLoader, config: RunConfig, dtype: torch.dtype) -> dict[str, float]:
    model.eval()
    totals = {"l_se": 0.0, "l_asd": 0.0, "loss": 0.0}
    batches = 0
    for batch in loader:
        batch = batch.to(config.optim.device, dtype)
        l_se, l_asd = batch_losses(forward_batch(model, batch), batch)
        totals["l_se"] += float(l_se)
        totals["l_asd"] += float(l_asd)
        totals["loss"] += float(total_loss(l_se, l_asd, config.loss))
        batches += 1
    return {k: v / max(batches, 1) for k, v in totals.items()}


def _val_metrics(model: ADENet, manifest: CorpusManifest) -> dict[str, float | None]:
    try:
        report = evaluate_model(model, manifest)
    except UndefinedMetricError:
        return {}
    return {"val_map": report.map, "val_auc": report.auc, "val_si_sdri_db": report.si_sdri_db}


def _diverged(out_path: Path, payload: dict[str, Any]) -> TrainingDivergedError:
    dump = out_path.with_suffix(".diverged.json")
    dump.parent.mkdir(parents=True, exist_ok=True)
    dump.write_text(json.dumps(payload, indent=2))
    logger.error("training_diverged", epoch=payload["epoch"], step=payload["step"], dump=str(dump))
    return TrainingDivergedError(f"non-finite loss at epoch {payload['epoch']} step {payload['step']}; see {dump}")


def train(
    config: RunConfig,
    out_path: str | Path,
    train_manifest: CorpusManifest | None = None,
    val_manifest: CorpusManifest | None = None,
    dtype: torch.dtype = torch.float32,
    on_step: Callable[[int, ModelOutput], None] | None = None,
) -> Checkpoint:
    """Train on the configured corpus and write per-epoch and final checkpoints.

    Epoch checkpoints go next to ``out_path`` as ``<stem>.epochNNN.pt``. The best
    epoch is the one with the lowest validation loss (training loss without a
    validation split).
    """
    out_path = Path(out_path)
    optim_cfg = config.optim
    seed_everything(optim_cfg.seed)

    if train_manifest is None:
        train_manifest = read_manifest(config.data.corpus_dir, config.data.train_split)
    if val_manifest is None and (Path(config.data.corpus_dir) / f"{config.data.val_split}.jsonl").exists():
        val_manifest = read_manifest(config.data.corpus_dir, config.data.val_split)

    model = build_model(config.model, seed=optim_cfg.seed, dtype=dtype).to(optim_cfg.device)
    optimizer = Adam(
        model.parameters(), lr=optim_cfg.lr, betas=optim_cfg.betas, weight_decay=optim_cfg.weight_decay
    )
    scheduler = ExponentialLR(optimizer, gamma=optim_cfg.lr_decay_per_epoch)
    train_loader = make_loader(train_manifest, config.data, optim_cfg, train_mode=True)
    val_loader = make_loader(val_manifest, config.data, optim_cfg, train_mode=False) if val_manifest else None
    mix_rng = np.random.default_rng(derive_seed(optim_cfg.seed, "negative_mix"))

    history: list[dict[str, Any]] = []
    best_epoch: int | None = None
    best_loss = math.inf
    step = 0
    ckpt: Checkpoint | None = None

    logger.info(
        "training_started",
        clips=len(train_manifest),
        epochs=optim_cfg.epochs,
        batch_size=optim_cfg.batch_size,
        variant=config.model.variant,
        seed=optim_cfg.seed,
    )
    with _tracking(config) as tracker:
        for epoch in range(optim_cfg.epochs):
            set_loader_epoch(train_loader, epoch)
            model.train()
            lr = optimizer.param_groups[0]["lr"]
            sums = {"l_se": 0.0, "l_asd": 0.0, "loss": 0.0}
            batches = 0

            for batch in train_loader:
                batch = batch.to(optim_cfg.device, dtype)
                mixture = negative_mix(batch.mixture, mix_rng, config.data.negative_mix_prob)
                out = forward_batch(model, batch, mixture)
                l_se, l_asd = batch_losses(out, batch)
                loss = total_loss(l_se, l_asd, config.loss)

                if not bool(torch.isfinite(loss)):
                    raise _diverged(
                        out_path,
                        {
                            "epoch": epoch,
                            "step": step,
                            "batch": batch.clip_ids,
                            "l_se": float(l_se),
                            "l_asd": float(l_asd),
                            "parameter_norms": parameter_norms(model),
                        },
                    )

                optimizer.zero_grad()
                loss.backward()
                clip_grad_norm_(model.parameters(), optim_cfg.grad_clip)
                optimizer.step()
                if on_step is not None:
                    on_step(step, out)

                sums["l_se"] += float(l_se)
                sums["l_asd"] += float(l_asd)
                sums["loss"] += float(loss)
                batches += 1
                step += 1
                if optim_cfg.max_steps is not None and step >= optim_cfg.max_steps:
                    break

            record: dict[str, Any] = {"epoch": epoch, "lr": lr, "steps": step}
            record.update({k: v / max(batches, 1) for k, v in sums.items()})
            selection = record["loss"]
            if val_loader is not None and val_manifest is not None:
                val = validation_loss(model, val_loader, config, dtype)
                record.update({f"val_{k}": v for k, v in val.items()})
                record.update(_val_metrics(model, val_manifest))
                selection = val["loss"]
            if selection < best_loss:
                best_loss, best_epoch = selection, epoch
            history.append(record)
            scheduler.step()

            logger.info("epoch_completed", **record)
            if tracker is not None:
                tracker.log_metrics({k: float(v) for k, v in record.items() if v is not None}, step=epoch)

            ckpt = Checkpoint(
                model_state={k: v.detach().clone() for k, v in model.state_dict().items()},
                optimizer_state=copy.deepcopy(optimizer.state_dict()),
                epoch=epoch,
                config=config,
                history=list(history),
                best_epoch=best_epoch,
            )
            save_checkpoint(out_path.with_name(f"{out_path.stem}.epoch{epoch:03d}.pt"), ckpt)
            if optim_cfg.max_steps is not None and step >= optim_cfg.max_steps:
                break

    assert ckpt is not None
    save_checkpoint(out_path, ckpt)
    logger.info("training_finished", checkpoint=str(out_path), steps=step, best_epoch=best_epoch)
    return ckpt
