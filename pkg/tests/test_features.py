"""
Tests for the MFCC front-end, face preprocessing and stream alignment
"""

import numpy as np
import pytest
import torch

from adenet.errors import AlignmentError, SequenceLengthError, UnsupportedAudioError
from adenet.features import (
    N_MFCC,
    FaceAugmentation,
    MfccSequence,
    align_streams,
    augment_faces,
    draw_augmentation,
    dump_mfcc,
    frame_count,
    mel_filterbank,
    mfcc,
    negative_mix,
    preprocess_faces,
)
from adenet.signalio import FaceClip, Waveform


def oracle_mfcc(samples: np.ndarray) -> np.ndarray:
    """Frame-by-frame MFCC with an explicit DFT, interpolated mel triangles and a DCT-II matrix"""
    win, hop, n_fft, n_mels, sr = 400, 160, 512, 40, 16000
    n = np.arange(win)
    hann = 0.5 - 0.5 * np.cos(2 * np.pi * n / win)
    k = np.arange(n_fft // 2 + 1)
    dft = np.exp(-2j * np.pi * np.outer(k, np.arange(win)) / n_fft)

    def mel(hz):
        return 2595.0 * np.log10(1.0 + hz / 700.0)

    edges_mel = np.linspace(0.0, mel(sr / 2), n_mels + 2)
    edges = 700.0 * (10.0 ** (edges_mel / 2595.0) - 1.0)
    freqs = k * sr / n_fft
    bank = np.stack(
        [np.interp(freqs, edges[m : m + 3], [0.0, 1.0, 0.0], left=0.0, right=0.0) for m in range(n_mels)]
    )
    i = np.arange(n_mels)
    basis = np.sqrt(2.0 / n_mels) * np.cos(np.pi * np.outer(np.arange(13), 2 * i + 1) / (2 * n_mels))
    basis[0] /= np.sqrt(2.0)

    rows = []
    for start in range(0, len(samples) - win + 1, hop):
        magnitude = np.abs(dft @ (samples[start : start + win] * hann))
        rows.append(basis @ np.log(np.maximum(bank @ magnitude, 1e-10)))
    return np.array(rows)


@pytest.mark.unit
class TestMfcc:
    def test_frame_count(self):
        wave = Waveform(np.random.default_rng(0).standard_normal(16000) * 0.1)
        seq = mfcc(wave)
        assert seq.coeffs.shape == (98, N_MFCC)
        assert len(seq) == frame_count(16000)

    def test_filterbank_shape_and_partition(self):
        bank = mel_filterbank()
        assert bank.shape == (40, 257)
        assert bank.min() >= 0.0 and bank.max() <= 1.0
        assert not bank.flags.writeable

    def test_silence_hits_log_floor(self):
        seq = mfcc(Waveform(np.zeros(1600)))
        assert np.all(np.isfinite(seq.coeffs))
        assert np.allclose(seq.coeffs[:, 1:], 0.0, atol=1e-9)

    def test_louder_tone_raises_c0(self):
        tone = np.sin(2 * np.pi * 440 * np.arange(8000) / 16000)
        quiet, loud = mfcc(Waveform(0.01 * tone)), mfcc(Waveform(0.5 * tone))
        assert np.all(loud.coeffs[:, 0] > quiet.coeffs[:, 0])
        assert np.allclose(loud.coeffs[:, 1:], quiet.coeffs[:, 1:], atol=1e-6)

    def test_short_input(self):
        with pytest.raises(SequenceLengthError):
            mfcc(Waveform(np.ones(399)))

    def test_wrong_rate(self):
        with pytest.raises(UnsupportedAudioError):
            mfcc(Waveform(np.ones(8000), sample_rate=8000))

    def test_dump(self, tmp_path):
        seq = mfcc(Waveform(np.random.default_rng(1).standard_normal(3200) * 0.1))
        dump_mfcc(tmp_path / "m.txt", seq)
        back = np.loadtxt(tmp_path / "m.txt")
        assert back.shape == seq.coeffs.shape
        assert np.allclose(back, seq.coeffs, atol=1e-6)

    def test_matches_direct_oracle(self):
        samples = np.random.default_rng(2).standard_normal(4000) * 0.2
        samples += 0.3 * np.sin(2 * np.pi * 700 * np.arange(4000) / 16000)
        expected = oracle_mfcc(samples)
        got = mfcc(Waveform(samples)).coeffs
        assert got.shape == expected.shape
        assert np.max(np.abs(got - expected)) < 1e-3

    def test_tones_are_separable(self):
        t = np.arange(8000) / 16000
        low = mfcc(Waveform(0.3 * np.sin(2 * np.pi * 1000 * t))).coeffs
        high = mfcc(Waveform(0.3 * np.sin(2 * np.pi * 3000 * t))).coeffs
        c_low, c_high = low.mean(axis=0), high.mean(axis=0)
        assert np.linalg.norm(c_low - c_high) > 1.0
        for rows, own, other in ((low, c_low, c_high), (high, c_high, c_low)):
            assert np.all(np.linalg.norm(rows - own, axis=1) < np.linalg.norm(rows - other, axis=1))

    def test_hop_shift_moves_rows_by_one(self):
        rng = np.random.default_rng(3)
        samples = rng.standard_normal(8000) * 0.1
        shifted = np.concatenate([rng.standard_normal(160) * 0.1, samples])
        base, moved = mfcc(Waveform(samples)).coeffs, mfcc(Waveform(shifted)).coeffs
        assert len(moved) == len(base) + 1
        assert np.max(np.abs(moved[1:-1] - base[:-1])) < 1e-6


@pytest.mark.unit
class TestFaces:
    def test_uint8_color_input(self):
        raw = np.full((5, 64, 64, 3), 255, dtype=np.uint8)
        faces = preprocess_faces(raw, train_mode=False)
        assert faces.frames.shape == (5, 112, 112)
        assert np.allclose(faces.frames, 1.0)

    def test_eval_mode_is_identity_at_112(self, speaking_clip):
        faces = preprocess_faces(speaking_clip.faces.frames, train_mode=False)
        assert np.array_equal(faces.frames, speaking_clip.faces.frames)

    def test_augmentation_is_per_clip(self, speaking_clip):
        frames = speaking_clip.faces.frames
        aug = FaceAugmentation(flip=True, angle_deg=0.0)
        out = augment_faces(frames, aug)
        assert np.array_equal(out, frames[:, :, ::-1])

    def test_augmentation_preserves_range_and_shape(self, speaking_clip):
        out = preprocess_faces(speaking_clip.faces.frames, train_mode=True, seed=7)
        assert out.frames.shape == speaking_clip.faces.frames.shape
        assert out.frames.min() >= 0.0 and out.frames.max() <= 1.0

    def test_same_rotation_every_frame(self):
        frame = np.random.default_rng(0).random((112, 112)).astype(np.float32)
        frames = np.stack([frame, frame, frame])
        out = augment_faces(frames, FaceAugmentation(flip=False, angle_deg=10.0))
        assert np.array_equal(out[0], out[1]) and np.array_equal(out[1], out[2])
        assert not np.array_equal(out[0], frame)

    def test_draw_augmentation(self):
        draws = [draw_augmentation(s) for s in range(200)]
        assert all(abs(d.angle_deg) <= 15.0 for d in draws)
        assert 50 < sum(d.flip for d in draws) < 150
        assert draw_augmentation(3) == draw_augmentation(3)


@pytest.mark.unit
class TestAlignment:
    def _seq(self, rows: int) -> MfccSequence:
        return MfccSequence(np.arange(rows * N_MFCC, dtype=np.float64).reshape(rows, N_MFCC))

    def _faces(self, frames: int) -> FaceClip:
        return FaceClip(np.zeros((frames, 112, 112), dtype=np.float32))

    def test_pads_short_mfcc_tail(self):
        seq, faces = align_streams(self._seq(38), self._faces(10))
        assert len(seq) == 40 and len(faces) == 10
        assert np.array_equal(seq.coeffs[-1], seq.coeffs[37])

    def test_trims_long_mfcc(self):
        seq, faces = align_streams(self._seq(43), self._faces(10))
        assert len(seq) == 40 and len(faces) == 10

    def test_drops_one_extra_video_frame(self):
        seq, faces = align_streams(self._seq(40), self._faces(11))
        assert len(seq) == 40 and len(faces) == 10

    def test_rejects_large_mismatch(self):
        with pytest.raises(AlignmentError):
            align_streams(self._seq(20), self._faces(10))
        with pytest.raises(AlignmentError):
            align_streams(self._seq(60), self._faces(10))

    def test_clip_streams_align(self, speaking_clip):
        seq, faces = align_streams(mfcc(speaking_clip.mixture), speaking_clip.faces)
        assert len(seq) == 4 * len(faces) == 4 * len(speaking_clip.faces)


@pytest.mark.unit
class TestNegativeMix:
    def test_off_by_default(self):
        x = torch.randn(3, 100)
        assert negative_mix(x, np.random.default_rng(0), 0.0) is x

    def test_adds_scaled_neighbour(self):
        x = torch.randn(3, 100, dtype=torch.float64)
        out = negative_mix(x, np.random.default_rng(0), 1.0)
        for i in range(3):
            residual = out[i] - x[i]
            neighbour = x[(i + 1) % 3]
            gain = float(residual @ neighbour / (neighbour @ neighbour))
            assert 0.1 <= gain <= 0.5
            assert torch.allclose(residual, gain * neighbour)

    def test_deterministic(self):
        x = torch.randn(4, 50)
        a = negative_mix(x, np.random.default_rng(5), 0.5)
        b = negative_mix(x, np.random.default_rng(5), 0.5)
        assert torch.equal(a, b)
