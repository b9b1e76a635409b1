"""
Features - MFCC front-end, face preprocessing/augmentation and stream alignment
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from scipy.fft import dct
from scipy.ndimage import rotate
from scipy.signal import get_window

from adenet.config import FACE_SIZE, MFCC_RATE, SAMPLE_RATE
from adenet.errors import AlignmentError, SequenceLengthError, ShapeError, UnsupportedAudioError
from adenet.signalio import FaceClip, Waveform

WIN_LENGTH = 400
HOP_LENGTH = 160
N_FFT = 512
N_MELS = 40
N_MFCC = 13
LOG_FLOOR = 1e-10
MFCC_PER_VIDEO_FRAME = MFCC_RATE // 25

MAX_ROTATION_DEG = 15.0


@dataclass(frozen=True)
class MfccSequence:
    coeffs: np.ndarray
    frame_rate: int = MFCC_RATE

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 2 or coeffs.shape[1] != N_MFCC:
            raise ShapeError(f"expected T x {N_MFCC} coefficients, got {coeffs.shape}")
        if coeffs.shape[0] == 0:
            raise SequenceLengthError("mfcc sequence is empty")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("mfcc coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    def __len__(self) -> int:
        return int(self.coeffs.shape[0])


def hz_to_mel(hz: np.ndarray | float) -> np.ndarray:
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def mel_to_hz(mel: np.ndarray | float) -> np.ndarray:
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


@lru_cache(maxsize=4)
def mel_filterbank(
    n_filters: int = N_MELS,
    n_fft: int = N_FFT,
    sample_rate: int = SAMPLE_RATE,
    fmin: float = 0.0,
    fmax: float = SAMPLE_RATE / 2,
) -> np.ndarray:
    """Triangular HTK-mel filters evaluated at FFT bin centres, shape (n_filters, n_fft//2+1)"""
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_filters + 2))
    bins = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    bank = np.zeros((n_filters, bins.size))
    for m in range(n_filters):
        lo, centre, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bins - lo) / (centre - lo)
        falling = (hi - bins) / (hi - centre)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    bank.setflags(write=False)
    return bank


def frame_count(num_samples: int) -> int:
    return 1 + (num_samples - WIN_LENGTH) // HOP_LENGTH


def mfcc(wave: Waveform) -> MfccSequence:
    """13 MFCCs per 25 ms window with a 10 ms hop"""
    if wave.sample_rate != SAMPLE_RATE:
        raise UnsupportedAudioError(f"mfcc expects {SAMPLE_RATE} Hz audio, got {wave.sample_rate}")
    if len(wave) < WIN_LENGTH:
        raise SequenceLengthError(f"need at least {WIN_LENGTH} samples, got {len(wave)}")

    frames = np.lib.stride_tricks.sliding_window_view(wave.samples, WIN_LENGTH)[::HOP_LENGTH]
    window = get_window("hann", WIN_LENGTH)
    spectrum = np.abs(np.fft.rfft(frames * window, n=N_FFT, axis=1))
    energies = spectrum @ mel_filterbank().T
    log_mel = np.log(np.maximum(energies, LOG_FLOOR))
    coeffs = dct(log_mel, type=2, norm="ortho", axis=1)[:, :N_MFCC]
    return MfccSequence(coeffs)


def dump_mfcc(path: str | Path, seq: MfccSequence) -> None:
    """Text dump, one frame per row"""
    np.savetxt(path, seq.coeffs, fmt="%.6f")


@dataclass(frozen=True)
class FaceAugmentation:
    flip: bool
    angle_deg: float


def draw_augmentation(seed: int) -> FaceAugmentation:
    """Per-clip transform: horizontal flip with p=0.5, rotation uniform in +-15 degrees"""
    rng = np.random.default_rng(seed)
    flip = bool(rng.random() < 0.5)
    angle = float(rng.uniform(-MAX_ROTATION_DEG, MAX_ROTATION_DEG))
    return FaceAugmentation(flip, angle)


def augment_faces(frames: np.ndarray, aug: FaceAugmentation) -> np.ndarray:
    """Apply one rotation and flip to every frame of a T x H x W clip"""
    out = frames
    if aug.angle_deg != 0.0:
        out = rotate(out, aug.angle_deg, axes=(2, 1), reshape=False, order=1, mode="nearest")
    if aug.flip:
        out = out[:, :, ::-1]
    return np.clip(np.ascontiguousarray(out), 0.0, 1.0).astype(np.float32)


def resize_faces(frames: np.ndarray, size: int = FACE_SIZE) -> np.ndarray:
    if frames.shape[1:] == (size, size):
        return frames.astype(np.float32)
    tensor = torch.from_numpy(np.ascontiguousarray(frames, dtype=np.float32)).unsqueeze(1)
    resized = F.interpolate(tensor, size=(size, size), mode="bilinear", align_corners=False)
    return resized.squeeze(1).numpy()


def preprocess_faces(raw: np.ndarray, train_mode: bool, seed: int = 0) -> FaceClip:
    """Resize raw face crops to 112x112 grayscale, augmenting per clip in train mode"""
    frames = np.asarray(raw)
    if frames.ndim not in (3, 4):
        raise ShapeError(f"expected T x H x W (x C) frames, got shape {frames.shape}")
    if frames.shape[0] == 0:
        raise SequenceLengthError("face clip has no frames")
    if frames.dtype == np.uint8:
        frames = frames.astype(np.float32) / 255.0
    if frames.ndim == 4:
        frames = frames.mean(axis=-1)

    frames = np.clip(resize_faces(frames), 0.0, 1.0)
    if train_mode:
        frames = augment_faces(frames, draw_augmentation(seed))
    return FaceClip(frames)


def align_streams(seq: MfccSequence, faces: FaceClip) -> tuple[MfccSequence, FaceClip]:
    """Trim/pad so the MFCC stream has exactly four rows per video frame.

    The streams may disagree by at most one video frame; trailing frames of the
    longer stream are dropped and a short MFCC tail is edge-padded.
    """
    t_mfcc, t_v = len(seq), len(faces)
    n_v = min(t_v, math.ceil(t_mfcc / MFCC_PER_VIDEO_FRAME))
    if t_v - n_v > 1:
        raise AlignmentError(f"video ({t_v} frames) outruns mfcc ({t_mfcc} rows) by more than one frame")
    target = MFCC_PER_VIDEO_FRAME * n_v

    coeffs = seq.coeffs
    if t_mfcc > target:
        if t_mfcc - target > MFCC_PER_VIDEO_FRAME:
            raise AlignmentError(f"mfcc ({t_mfcc} rows) outruns video ({t_v} frames) by more than one frame")
        coeffs = coeffs[:target]
    elif t_mfcc < target:
        coeffs = np.pad(coeffs, ((0, target - t_mfcc), (0, 0)), mode="edge")

    frames = faces.frames if n_v == t_v else faces.frames[:n_v]
    return MfccSequence(coeffs, seq.frame_rate), FaceClip(frames, faces.frame_rate)


def negative_mix(
    mixtures: torch.Tensor,
    rng: np.random.Generator,
    prob: float,
    gain_range: tuple[float, float] = (0.1, 0.5),
) -> torch.Tensor:
    """Add another batch element's mixture as an off-screen interferer.

    Each row is selected with probability ``prob`` and receives the next row of the
    original batch scaled by a gain drawn from ``gain_range``. Targets are untouched.
    """
    batch = mixtures.shape[0]
    if batch < 2 or prob <= 0.0:
        return mixtures
    selected = rng.random(batch) < prob
    gains = rng.uniform(*gain_range, size=batch) * selected
    interferers = torch.roll(mixtures, shifts=-1, dims=0)
    scale = torch.as_tensor(gains, dtype=mixtures.dtype, device=mixtures.device).unsqueeze(1)
    return mixtures + scale * interferers
