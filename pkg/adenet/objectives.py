"""
Objectives - training losses (SI-SDR, frame cross-entropy, weighted sum)
and evaluation metrics (AP, AUC, F1, SDR) plus the EvalReport container
"""

from typing import Sequence

import numpy as np
import torch
from pydantic import BaseModel, Field

from adenet.config import LossWeights
from adenet.errors import DegenerateInputError, SequenceLengthError, UndefinedMetricError

SI_SDR_EPS = 1e-8
BCE_LOG_FLOOR = 1e-12
SDR_EPS = 1e-20
SDR_CAP_DB = 160.0


# ---------------------------------------------------------------------------
# Losses (torch, differentiable)


def si_sdr_loss(est: torch.Tensor, ref: torch.Tensor, eps: float = SI_SDR_EPS) -> torch.Tensor:
    """
    Negative SI-SDR in dB over the last axis; one value per leading index.

    The projection divides by the exact reference energy. A residual below
    ``10 ** (-SDR_CAP_DB / 20)`` of the target norm is reported as
    ``-SDR_CAP_DB``, so an exact estimate always scores the cap.
    """
    if est.shape != ref.shape:
        raise SequenceLengthError(f"estimate {tuple(est.shape)} and reference {tuple(ref.shape)} differ")
    est = est - est.mean(dim=-1, keepdim=True)
    ref = ref - ref.mean(dim=-1, keepdim=True)
    ref_energy = (ref**2).sum(dim=-1, keepdim=True)
    if bool((ref_energy == 0).any()):
        raise DegenerateInputError("SI-SDR is undefined for an all-zero reference")

    s_target = (est * ref).sum(dim=-1, keepdim=True) / ref_energy * ref
    e_noise = est - s_target
    s_norm = torch.linalg.vector_norm(s_target, dim=-1)
    e_norm = torch.linalg.vector_norm(e_noise, dim=-1)
    loss = -20.0 * torch.log10(s_norm / (e_norm + eps))
    exact = e_norm < s_norm * 10.0 ** (-SDR_CAP_DB / 20.0)
    return torch.where(exact, torch.full_like(loss, -SDR_CAP_DB), loss.clamp_min(-SDR_CAP_DB))


def asd_loss(pred: torch.Tensor, gt: torch.Tensor) -> torch.Tensor:
    """Frame-averaged binary cross-entropy with log clamped at 1e-12"""
    if pred.shape != gt.shape:
        raise SequenceLengthError(f"predictions {tuple(pred.shape)} and labels {tuple(gt.shape)} differ")
    gt = gt.to(pred.dtype)
    log_p = torch.log(pred.clamp_min(BCE_LOG_FLOOR))
    log_q = torch.log((1.0 - pred).clamp_min(BCE_LOG_FLOOR))
    return -(gt * log_p + (1.0 - gt) * log_q).mean(dim=-1)


def total_loss(l_se: torch.Tensor | float, l_asd: torch.Tensor | float, weights: LossWeights) -> torch.Tensor | float:
    return weights.lambda1 * l_se + weights.lambda2 * l_asd


# ---------------------------------------------------------------------------
# Detection metrics (numpy)


def _check_scores(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).astype(np.int64).ravel()
    if s.shape != y.shape:
        raise SequenceLengthError(f"{s.size} scores for {y.size} labels")
    if s.size == 0:
        raise SequenceLengthError("no scores to evaluate")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    return s, y


def _threshold_curve(s: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative true/false positives at each distinct score threshold, descending"""
    if y.min() == y.max():
        raise UndefinedMetricError("ranking metrics need at least one positive and one negative label")
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    ends = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(y)[ends]
    fps = ends + 1 - tps
    return tps.astype(np.float64), fps.astype(np.float64)


def average_precision(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """Sum over thresholds of (R_k - R_{k-1}) * P_k; tied scores form one threshold"""
    tps, fps = _threshold_curve(*_check_scores(scores, labels))
    precision = tps / (tps + fps)
    recall = tps / tps[-1]
    return float(min(1.0, np.sum(np.diff(np.r_[0.0, recall]) * precision)))


def roc_auc(scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray) -> float:
    """Trapezoidal area under the ROC curve"""
    tps, fps = _threshold_curve(*_check_scores(scores, labels))
    tpr = np.r_[0.0, tps / tps[-1]]
    fpr = np.r_[0.0, fps / fps[-1]]
    return float(min(1.0, np.trapezoid(tpr, fpr)))


def f1_at_threshold(
    scores: Sequence[float] | np.ndarray, labels: Sequence[int] | np.ndarray, threshold: float = 0.5
) -> float:
    """F1 of ``score >= threshold``; 0 when there are no true positives"""
    s, y = _check_scores(scores, labels)
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    if tp == 0:
        return 0.0
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    return 2 * tp / (2 * tp + fp + fn)


# ---------------------------------------------------------------------------
# Enhancement metrics


def _as_array(x: np.ndarray | torch.Tensor | Sequence[float]) -> np.ndarray:
    if isinstance(x, torch.Tensor):
        x = x.detach().cpu().numpy()
    return np.asarray(x, dtype=np.float64).ravel()


def sdr_metric(est: np.ndarray | torch.Tensor, ref: np.ndarray | torch.Tensor, eps: float = SDR_EPS) -> float:
    """10*log10(|ref|^2 / (|ref - est|^2 + eps)), capped at 160 dB"""
    e, r = _as_array(est), _as_array(ref)
    if e.shape != r.shape:
        raise SequenceLengthError(f"estimate ({e.size}) and reference ({r.size}) lengths differ")
    ref_energy = float(np.sum(r**2))
    if ref_energy == 0.0:
        raise DegenerateInputError("SDR is undefined for an all-zero reference")
    value = 10.0 * np.log10(ref_energy / (float(np.sum((r - e) ** 2)) + eps))
    return float(min(value, SDR_CAP_DB))


def si_sdr_metric(est: np.ndarray | torch.Tensor, ref: np.ndarray | torch.Tensor) -> float:
    """SI-SDR in dB (float64), capped at 160 dB"""
    e = torch.from_numpy(_as_array(est))
    r = torch.from_numpy(_as_array(ref))
    return float(min(-si_sdr_loss(e, r).item(), SDR_CAP_DB))


def si_sdr_improvement(
    est: np.ndarray | torch.Tensor, ref: np.ndarray | torch.Tensor, mixture: np.ndarray | torch.Tensor
) -> float:
    return si_sdr_metric(est, ref) - si_sdr_metric(mixture, ref)


def silent_suppression_db(
    est: np.ndarray | torch.Tensor, mixture: np.ndarray | torch.Tensor, eps: float = SDR_EPS
) -> float:
    """-10*log10(|est|^2 / |mixture|^2 + eps) for clips whose target is silence"""
    e, m = _as_array(est), _as_array(mixture)
    mix_energy = float(np.sum(m**2))
    if mix_energy == 0.0:
        raise DegenerateInputError("suppression ratio needs a non-silent mixture")
    value = -10.0 * np.log10(float(np.sum(e**2)) / mix_energy + eps)
    return float(min(value, SDR_CAP_DB))


# ---------------------------------------------------------------------------
# Report


class SnrBreakdown(BaseModel):
    snr_db: float
    clip_count: int
    frame_count: int
    map: float | None = None
    auc: float | None = None
    f1: float | None = None
    sdr_db: float | None = None
    si_sdr_db: float | None = None
    si_sdri_db: float | None = None


class EvalReport(BaseModel):
    """Pooled detection metrics and speaking-clip enhancement metrics"""

    map: float = Field(ge=0.0, le=1.0)
    auc: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)
    sdr_db: float | None = None
    si_sdr_db: float | None = None
    si_sdri_db: float | None = None
    silent_suppression_db: float | None = None
    clip_count: int = Field(ge=0)
    frame_count: int = Field(ge=0)
    speaking_clips: int = 0
    silent_clips: int = 0
    best_epoch: int | None = None
    per_snr: list[SnrBreakdown] = Field(default_factory=list)

    def flat(self) -> dict[str, float | int | None]:
        flat: dict[str, float | int | None] = {
            k: v for k, v in self.model_dump().items() if k != "per_snr"
        }
        for row in self.per_snr:
            prefix = f"snr_{row.snr_db:g}db"
            for key, value in row.model_dump().items():
                if key != "snr_db":
                    flat[f"{prefix}.{key}"] = value
        return flat

    def to_text(self) -> str:
        """Flat ``key=value`` lines"""
        return "".join(f"{k}={_fmt(v)}\n" for k, v in self.flat().items())

    def to_table(self) -> str:
        """Aligned summary table: one overall row plus one row per SNR level"""
        columns = ["snr", "clips", "frames", "mAP", "AUC", "F1", "SDR", "SI-SDR", "SI-SDRi"]
        rows = [
            ["all", self.clip_count, self.frame_count, self.map, self.auc, self.f1,
             self.sdr_db, self.si_sdr_db, self.si_sdri_db]
        ]
        for r in self.per_snr:
            rows.append(
                [f"{r.snr_db:g}dB", r.clip_count, r.frame_count, r.map, r.auc, r.f1,
                 r.sdr_db, r.si_sdr_db, r.si_sdri_db]
            )
        cells = [columns] + [[_fmt(v) for v in row] for row in rows]
        widths = [max(len(str(row[i])) for row in cells) for i in range(len(columns))]
        return "\n".join("  ".join(str(c).rjust(w) for c, w in zip(row, widths)) for row in cells) + "\n"


def _fmt(value: object) -> str:
    if value is None:
        return "na"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)
