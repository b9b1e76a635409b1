"""
Inference - per-clip detection scores and enhanced waveforms from a trained model
"""

from pathlib import Path

import numpy as np

from adenet.errors import ConfigError
from adenet.harness.data import ClipTensors, prepare_clip
from adenet.harness.evaluation import ModelPredictor
from adenet.model import ADENet
from adenet.signalio import CorpusManifest, Waveform, load_clip, save_wav


def _clip(manifest: CorpusManifest, clip_id: str) -> ClipTensors:
    return prepare_clip(load_clip(manifest, manifest.entry(clip_id)), train_mode=False)


def detect_clip(model: ADENet, manifest: CorpusManifest, clip_id: str) -> np.ndarray:
    """Per-frame speaking probability for one clip"""
    return ModelPredictor(model).predict(_clip(manifest, clip_id)).scores


def enhance_clip(model: ADENet, manifest: CorpusManifest, clip_id: str, out_path: str | Path) -> Waveform:
    """Write the enhanced waveform of one clip as 16-bit PCM and return it"""
    prediction = ModelPredictor(model).predict(_clip(manifest, clip_id))
    if prediction.enhanced is None:
        raise ConfigError("this model has no enhancement branch")
    wave = Waveform(np.clip(prediction.enhanced, -1.0, 1.0))
    save_wav(out_path, wave)
    return wave


def format_scores(scores: np.ndarray) -> str:
    """`frame_index, score` lines"""
    return "".join(f"{t}, {s:.6f}\n" for t, s in enumerate(scores))
