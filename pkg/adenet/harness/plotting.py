"""
Plots - embedding statistics, detection score overlays and waveform renders
"""

from pathlib import Path
from typing import Iterator

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import torch  # noqa: E402
from sklearn.decomposition import PCA  # noqa: E402

from adenet.config import SAMPLE_RATE  # noqa: E402
from adenet.errors import UnknownPlotKindError  # noqa: E402
from adenet.harness.checkpoint import Checkpoint, model_from_checkpoint  # noqa: E402
from adenet.harness.data import ClipTensors, collate_clips  # noqa: E402
from adenet.harness.evaluation import iter_eval_clips  # noqa: E402
from adenet.log import get_logger  # noqa: E402
from adenet.model import ADENet, ModelOutput  # noqa: E402
from adenet.signalio import CorpusManifest  # noqa: E402

logger = get_logger(__name__)

PLOT_KINDS = ("embed_stats", "scores", "waveforms")
PNG_METADATA = {"Software": None}


def _save(fig: plt.Figure, path: Path) -> Path:
    fig.savefig(path, dpi=100, metadata=PNG_METADATA)
    plt.close(fig)
    return path


@torch.no_grad()
def _run(
    model: ADENet, manifest: CorpusManifest, max_clips: int | None
) -> Iterator[tuple[ClipTensors, ModelOutput]]:
    dtype = next(model.parameters()).dtype
    for i, clip in enumerate(iter_eval_clips(manifest)):
        if max_clips is not None and i >= max_clips:
            break
        batch = collate_clips([clip]).to("cpu", dtype)
        mfcc = batch.mfcc if model.config.audio_input == "mfcc" else None
        yield clip, model(mfcc, batch.faces, batch.mixture)


def plot_embed_stats(model: ADENet, manifest: CorpusManifest, out_dir: Path, max_clips: int | None, seed: int) -> list[Path]:
    """Per-channel mean/variance before and after the final norm, plus a 2-D PCA scatter"""
    collected: dict[str, list[np.ndarray]] = {k: [] for k in ("audio_pre_norm", "visual_pre_norm", "audio_xmodal", "visual_xmodal")}
    for _, out in _run(model, manifest, max_clips):
        for key in collected:
            collected[key].append(out.intermediates[key][0].double().numpy())
    stacked = {k: np.concatenate(v, axis=0) for k, v in collected.items()}

    lines = ["stream stage channel mean var"]
    for stream in ("audio", "visual"):
        for stage, key in (("before", f"{stream}_pre_norm"), ("after", f"{stream}_xmodal")):
            x = stacked[key]
            for c, (m, v) in enumerate(zip(x.mean(axis=0), x.var(axis=0))):
                lines.append(f"{stream} {stage} {c} {m:.6f} {v:.6f}")
    stats_path = out_dir / "embed_stats.txt"
    stats_path.write_text("\n".join(lines) + "\n")

    fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
    for ax, stage, (a_key, v_key) in zip(
        axes, ("before norm", "after norm"), (("audio_pre_norm", "visual_pre_norm"), ("audio_xmodal", "visual_xmodal"))
    ):
        joint = np.concatenate([stacked[a_key], stacked[v_key]], axis=0)
        points = PCA(n_components=2, svd_solver="full", random_state=seed).fit_transform(joint)
        n_audio = stacked[a_key].shape[0]
        ax.scatter(points[:n_audio, 0], points[:n_audio, 1], s=6, label="audio")
        ax.scatter(points[n_audio:, 0], points[n_audio:, 1], s=6, label="visual")
        ax.set_title(stage)
        ax.legend()
    fig.tight_layout()
    return [stats_path, _save(fig, out_dir / "embed_projection.png")]


def plot_scores(model: ADENet, manifest: CorpusManifest, out_dir: Path, max_clips: int | None) -> list[Path]:
    """Per-frame scores against labels; text rows are `clip_id frame score label`"""
    lines = ["clip_id frame score label"]
    paths = []
    for clip, out in _run(model, manifest, max_clips):
        scores = out.scores[0].double().numpy()
        labels = clip.labels.numpy()
        lines += [f"{clip.clip_id} {t} {s:.6f} {int(y)}" for t, (s, y) in enumerate(zip(scores, labels))]

        fig, ax = plt.subplots(figsize=(8, 3))
        ax.step(np.arange(len(labels)), labels, where="post", label="label")
        ax.plot(scores, label="score")
        ax.set_ylim(-0.05, 1.05)
        ax.set_xlabel("frame")
        ax.set_title(clip.clip_id)
        ax.legend()
        fig.tight_layout()
        paths.append(_save(fig, out_dir / f"scores_{clip.clip_id}.png"))
    scores_path = out_dir / "scores.txt"
    scores_path.write_text("\n".join(lines) + "\n")
    return [scores_path, *paths]


def plot_waveforms(model: ADENet, manifest: CorpusManifest, out_dir: Path, max_clips: int | None) -> list[Path]:
    paths = []
    for clip, out in _run(model, manifest, max_clips):
        t = np.arange(clip.mixture.shape[0]) / SAMPLE_RATE
        traces = [("mixture", clip.mixture.numpy()), ("clean", clip.clean.numpy())]
        if out.enhanced is not None:
            traces.append(("enhanced", out.enhanced[0].double().numpy()))
        fig, axes = plt.subplots(len(traces), 1, figsize=(8, 2 * len(traces)), sharex=True, sharey=True)
        for ax, (name, samples) in zip(np.atleast_1d(axes), traces):
            ax.plot(t, samples, linewidth=0.5)
            ax.set_ylabel(name)
        np.atleast_1d(axes)[-1].set_xlabel("seconds")
        fig.suptitle(clip.clip_id)
        fig.tight_layout()
        paths.append(_save(fig, out_dir / f"waveforms_{clip.clip_id}.png"))
    return paths


def plot(
    ckpt: Checkpoint | str | Path,
    manifest: CorpusManifest,
    kind: str,
    out_dir: str | Path,
    seed: int = 0,
    max_clips: int | None = None,
) -> list[Path]:
    if kind not in PLOT_KINDS:
        raise UnknownPlotKindError(f"unknown plot kind {kind!r}; choose from {', '.join(PLOT_KINDS)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = model_from_checkpoint(ckpt)

    if kind == "embed_stats":
        paths = plot_embed_stats(model, manifest, out_dir, max_clips, seed)
    elif kind == "scores":
        paths = plot_scores(model, manifest, out_dir, max_clips)
    else:
        paths = plot_waveforms(model, manifest, out_dir, max_clips)
    logger.info("plots_written", kind=kind, files=len(paths), out_dir=str(out_dir))
    return paths
