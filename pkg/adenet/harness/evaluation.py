"""
Evaluation - run detection and enhancement over a manifest and aggregate metrics
pooled over frames, with a per-SNR breakdown
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Protocol

import numpy as np
import pandas as pd
import torch

from adenet.errors import UndefinedMetricError
from adenet.harness.checkpoint import Checkpoint, load_checkpoint, model_from_checkpoint
from adenet.harness.data import ClipTensors, collate_clips, prepare_clip
from adenet.log import get_logger
from adenet.model import ADENet
from adenet.objectives import (
    EvalReport,
    SnrBreakdown,
    average_precision,
    f1_at_threshold,
    roc_auc,
    sdr_metric,
    si_sdr_improvement,
    si_sdr_metric,
    silent_suppression_db,
)
from adenet.signalio import CorpusManifest, load_clip

logger = get_logger(__name__)


@dataclass
class Prediction:
    scores: np.ndarray
    enhanced: np.ndarray | None


class Predictor(Protocol):
    def predict(self, clip: ClipTensors) -> Prediction: ...


class ModelPredictor:
    """Single-clip inference with a trained model in eval mode"""

    def __init__(self, model: ADENet, device: str = "cpu") -> None:
        self.model = model.eval().to(device)
        self.device = device
        self.dtype = next(model.parameters()).dtype

    @torch.no_grad()
    def predict(self, clip: ClipTensors) -> Prediction:
        batch = collate_clips([clip]).to(self.device, self.dtype)
        mfcc = batch.mfcc if self.model.config.audio_input == "mfcc" else None
        out = self.model(mfcc, batch.faces, batch.mixture)
        enhanced = None if out.enhanced is None else out.enhanced[0].double().cpu().numpy()
        return Prediction(out.scores[0].double().cpu().numpy(), enhanced)


def iter_eval_clips(manifest: CorpusManifest) -> Iterable[ClipTensors]:
    for entry in manifest.records:
        yield prepare_clip(load_clip(manifest, entry), train_mode=False)


def _ranking(
    fn: Callable[[np.ndarray, np.ndarray], float], scores: np.ndarray, labels: np.ndarray
) -> float | None:
    try:
        return fn(scores, labels)
    except UndefinedMetricError:
        return None


def _mean(series: pd.Series) -> float | None:
    series = series.dropna()
    return None if series.empty else float(series.mean())


def evaluate_predictor(
    predictor: Predictor,
    manifest: CorpusManifest,
    best_epoch: int | None = None,
) -> EvalReport:
    """Pooled-frame mAP/AUC/F1, speaking-clip SDR/SI-SDR and silent-clip suppression"""
    rows = []
    frames = []
    for clip in iter_eval_clips(manifest):
        pred = predictor.predict(clip)
        labels = clip.labels.numpy().astype(np.int64)
        frames.append(pd.DataFrame({"snr_db": clip.snr_db, "score": pred.scores, "label": labels}))

        row = {"clip_id": clip.clip_id, "snr_db": clip.snr_db, "speaking": clip.speaking, "frames": len(labels)}
        if pred.enhanced is not None:
            mixture = clip.mixture.double().numpy()
            if clip.speaking:
                clean = clip.clean.double().numpy()
                row["sdr_db"] = sdr_metric(pred.enhanced, clean)
                row["si_sdr_db"] = si_sdr_metric(pred.enhanced, clean)
                row["si_sdri_db"] = si_sdr_improvement(pred.enhanced, clean, mixture)
            else:
                row["suppression_db"] = silent_suppression_db(pred.enhanced, mixture)
        rows.append(row)

    clips = pd.DataFrame(rows)
    for column in ("sdr_db", "si_sdr_db", "si_sdri_db", "suppression_db"):
        if column not in clips:
            clips[column] = np.nan
    pooled = pd.concat(frames, ignore_index=True)

    scores, labels = pooled["score"].to_numpy(), pooled["label"].to_numpy()
    ap, auc = average_precision(scores, labels), roc_auc(scores, labels)

    per_snr = []
    for snr, group in clips.groupby("snr_db", sort=True):
        snr_frames = pooled[pooled["snr_db"] == snr]
        s, y = snr_frames["score"].to_numpy(), snr_frames["label"].to_numpy()
        speaking = group[group["speaking"]]
        per_snr.append(
            SnrBreakdown(
                snr_db=float(snr),
                clip_count=len(group),
                frame_count=len(snr_frames),
                map=_ranking(average_precision, s, y),
                auc=_ranking(roc_auc, s, y),
                f1=f1_at_threshold(s, y),
                sdr_db=_mean(speaking["sdr_db"]),
                si_sdr_db=_mean(speaking["si_sdr_db"]),
                si_sdri_db=_mean(speaking["si_sdri_db"]),
            )
        )

    speaking = clips[clips["speaking"]]
    report = EvalReport(
        map=ap,
        auc=auc,
        f1=f1_at_threshold(scores, labels),
        sdr_db=_mean(speaking["sdr_db"]),
        si_sdr_db=_mean(speaking["si_sdr_db"]),
        si_sdri_db=_mean(speaking["si_sdri_db"]),
        silent_suppression_db=_mean(clips["suppression_db"]),
        clip_count=len(clips),
        frame_count=len(pooled),
        speaking_clips=len(speaking),
        silent_clips=len(clips) - len(speaking),
        best_epoch=best_epoch,
        per_snr=per_snr,
    )
    logger.info("evaluation_completed", split=manifest.split, clips=report.clip_count, map=report.map, auc=report.auc)
    return report


def evaluate_model(model: ADENet, manifest: CorpusManifest, best_epoch: int | None = None) -> EvalReport:
    was_training = model.training
    try:
        return evaluate_predictor(ModelPredictor(model, str(next(model.parameters()).device)), manifest, best_epoch)
    finally:
        model.train(was_training)


def evaluate(ckpt: Checkpoint | str | Path, manifest: CorpusManifest) -> EvalReport:
    """Evaluate a checkpoint on every clip of a manifest"""
    if not isinstance(ckpt, Checkpoint):
        ckpt = load_checkpoint(ckpt)
    return evaluate_model(model_from_checkpoint(ckpt), manifest, ckpt.best_epoch)


def write_report(path: str | Path, report: EvalReport) -> None:
    Path(path).write_text(report.to_text())
