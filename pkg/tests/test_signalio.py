"""
Tests for WAV I/O, SNR mixing and synthetic clip/corpus generation
"""

import json

import numpy as np
import pytest
import soundfile as sf
from scipy.signal import chirp, resample_poly

from adenet import signalio
from adenet.errors import (
    ClipSpecError,
    CorpusIOError,
    DegenerateInputError,
    SequenceLengthError,
    UnknownClipError,
    UnsupportedAudioError,
    WavFormatError,
)
from adenet.signalio import (
    SAMPLES_PER_FRAME,
    ClipSpec,
    CorpusConfig,
    SpeakerKind,
    Waveform,
    derive_seed,
    gen_clip,
    gen_corpus,
    kind_counts,
    load_clip,
    load_wav,
    mix_at_snr,
    read_manifest,
    resample_linear,
    save_wav,
)


@pytest.mark.unit
class TestWav:
    def test_save_load_quantization(self, tmp_path):
        x = 0.5 * np.sin(np.linspace(0, 40 * np.pi, 16000))
        path = tmp_path / "tone.wav"
        save_wav(path, Waveform(x))
        loaded = load_wav(path)
        assert len(loaded) == 16000
        assert np.max(np.abs(loaded.samples - x)) <= 1 / 32768

    def test_stereo_is_averaged(self, tmp_path):
        left = np.full(800, 1000, dtype=np.int16)
        right = np.full(800, 3000, dtype=np.int16)
        path = tmp_path / "stereo.wav"
        sf.write(str(path), np.stack([left, right], axis=1), 16000, subtype="PCM_16")
        assert np.allclose(load_wav(path).samples, 2000 / 32768)

    def test_resamples_to_16k(self, tmp_path):
        path = tmp_path / "low.wav"
        sf.write(str(path), np.zeros(8000, dtype=np.int16), 8000, subtype="PCM_16")
        wave = load_wav(path)
        assert wave.sample_rate == 16000
        assert len(wave) == 16000

    def test_resampler_tracks_polyphase_on_sweep(self, tmp_path):
        t = np.arange(2 * 8000) / 8000.0
        sweep = 0.5 * chirp(t, f0=50.0, t1=t[-1], f1=400.0)
        path = tmp_path / "sweep.wav"
        sf.write(str(path), sweep, 8000, subtype="PCM_16")
        reference = resample_poly(sf.read(str(path))[0], 2, 1)
        for ours in (resample_linear(sweep, 8000, 16000), load_wav(path).samples):
            core = slice(400, -400)
            err = ours[core] - reference[core]
            snr_db = 10 * np.log10(np.sum(reference[core] ** 2) / np.sum(err**2))
            assert snr_db > 30.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "absent.wav")

    def test_not_a_wav(self, tmp_path):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"this is not audio at all" * 10)
        with pytest.raises(WavFormatError):
            load_wav(path)

    def test_float_codec_rejected(self, tmp_path):
        path = tmp_path / "float.wav"
        sf.write(str(path), np.zeros(1600, dtype=np.float32), 16000, subtype="FLOAT")
        with pytest.raises(UnsupportedAudioError):
            load_wav(path)


@pytest.mark.unit
class TestMixing:
    @pytest.mark.parametrize("snr_db", [0.0, 5.0, 10.0, -3.0])
    def test_achieved_snr(self, snr_db):
        rng = np.random.default_rng(0)
        speech = Waveform(0.3 * rng.standard_normal(4000))
        noise = Waveform(rng.standard_normal(4000))
        mixture, scaled = mix_at_snr(speech, noise, snr_db)
        achieved = 10 * np.log10(speech.power / scaled.power)
        assert achieved == pytest.approx(snr_db, abs=1e-9)
        assert np.allclose(mixture.samples, speech.samples + scaled.samples)

    def test_silent_speech_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            mix_at_snr(Waveform(np.zeros(100)), Waveform(np.ones(100)), 5.0)

    def test_length_mismatch(self):
        with pytest.raises(SequenceLengthError):
            mix_at_snr(Waveform(np.ones(100)), Waveform(np.ones(99)), 5.0)


@pytest.mark.unit
class TestGenClip:
    def test_deterministic(self):
        spec = ClipSpec(duration_s=1.0, speaker_kind=SpeakerKind.SPEAKING, snr_db=10.0)
        a, b = gen_clip(11, spec), gen_clip(11, spec)
        assert np.array_equal(a.mixture.samples, b.mixture.samples)
        assert np.array_equal(a.faces.frames, b.faces.frames)
        assert not np.array_equal(a.mixture.samples, gen_clip(12, spec).mixture.samples)

    def test_seeds_give_distinct_clips(self):
        spec = ClipSpec(duration_s=1.0, speaker_kind=SpeakerKind.SPEAKING, snr_db=5.0)
        mixtures = [gen_clip(seed, spec).mixture.samples for seed in range(60)]
        pairs = [(a, b) for a in range(60) for b in range(a + 1, 60)]
        distinct = sum(not np.array_equal(mixtures[a], mixtures[b]) for a, b in pairs)
        assert distinct >= 0.99 * len(pairs)

    def test_speaking_clip(self, speaking_clip):
        assert speaking_clip.is_speaking
        assert len(speaking_clip.faces) == 30
        assert len(speaking_clip.mixture) == 30 * SAMPLES_PER_FRAME
        assert speaking_clip.asd_labels.any()
        assert speaking_clip.clean_target.power > 0
        assert np.max(np.abs(speaking_clip.mixture.samples)) <= 0.95 + 1e-12

    def test_speaking_snr(self):
        spec = ClipSpec(duration_s=2.0, speaker_kind=SpeakerKind.SPEAKING, snr_db=5.0)
        clip = gen_clip(2, spec)
        achieved = 10 * np.log10(clip.clean_target.power / clip.noise.power)
        assert achieved == pytest.approx(5.0, abs=1e-6)

    def test_mouth_tracks_labels(self, speaking_clip):
        heights = speaking_clip.mouth_heights
        labels = speaking_clip.asd_labels.astype(bool)
        assert heights[labels].mean() > heights[~labels].mean()

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_mouth_height_follows_envelope(self, seed, mocker):
        envelope = mocker.spy(signalio, "frame_means")
        spec = ClipSpec(duration_s=2.0, speaker_kind=SpeakerKind.SPEAKING, snr_db=5.0)
        clip = gen_clip(seed, spec)
        frame_env = envelope.spy_return
        assert frame_env.shape == clip.mouth_heights.shape
        assert np.corrcoef(clip.mouth_heights, frame_env)[0, 1] >= 0.9
        # darkening of the centre column against skin below the mouth
        faces = clip.faces.frames.astype(np.float64)
        opening = (faces[:, 100:101, 56] - faces[:, 64:100, 56]).sum(axis=1)
        assert np.corrcoef(opening, frame_env)[0, 1] >= 0.9

    def test_silent_clips(self, chewing_clip, static_clip):
        for clip in (chewing_clip, static_clip):
            assert not clip.is_speaking
            assert not clip.asd_labels.any()
            assert not clip.clean_target.samples.any()
            assert clip.mixture.power > 0
        assert np.ptp(chewing_clip.mouth_heights) > 2.0
        assert np.ptp(static_clip.mouth_heights) == 0.0

    def test_faces_in_unit_range(self, speaking_clip):
        frames = speaking_clip.faces.frames
        assert frames.shape == (30, 112, 112)
        assert frames.min() >= 0.0 and frames.max() <= 1.0

    @pytest.mark.parametrize(
        "spec",
        [
            {"duration_s": 0.5},
            {"duration_s": 5.0},
            {"snr_db": 7.0},
            {"speaker_kind": "whispering"},
        ],
    )
    def test_invalid_spec(self, spec):
        with pytest.raises(ClipSpecError):
            gen_clip(0, spec)

    def test_derive_seed_is_stable(self):
        assert derive_seed("a", 1) == derive_seed("a", 1)
        assert derive_seed("a", 1) != derive_seed("a", 2)
        assert 0 <= derive_seed("x") < 2**63


@pytest.mark.unit
def test_kind_counts_largest_remainder():
    ratios = {
        SpeakerKind.SPEAKING: 0.5,
        SpeakerKind.SILENT_CHEWING: 0.25,
        SpeakerKind.SILENT_STATIC: 0.25,
    }
    assert kind_counts(8, ratios) == {
        SpeakerKind.SPEAKING: 4,
        SpeakerKind.SILENT_CHEWING: 2,
        SpeakerKind.SILENT_STATIC: 2,
    }
    counts = kind_counts(5, ratios)
    assert sum(counts.values()) == 5
    assert counts[SpeakerKind.SPEAKING] == 3


@pytest.mark.integration
class TestCorpus:
    def test_manifests(self, corpus_root):
        corpus = json.loads((corpus_root / "corpus.json").read_text())
        assert corpus["master_seed"] == 1
        for split, count in (("train", 4), ("val", 2), ("test", 4)):
            manifest = read_manifest(corpus_root, split)
            assert len(manifest) == count
            assert len({r.clip_id for r in manifest.records}) == count

    def test_load_clip_matches_manifest(self, corpus_root):
        manifest = read_manifest(corpus_root, "test")
        entry = manifest.records[0]
        clip = load_clip(manifest, entry)
        assert clip.clip_id == entry.clip_id
        assert clip.snr_db == entry.snr_db
        assert len(clip.faces) == round(entry.duration_s * 25)
        assert len(clip.asd_labels) == len(clip.faces)

    def test_regeneration_is_identical(self, corpus_root, tmp_path):
        gen_corpus(
            CorpusConfig(
                counts={"train": 4, "val": 2, "test": 4},
                master_seed=1,
                output_dir=str(tmp_path),
                duration_range_s=(1.0, 1.2),
                workers=2,
            )
        )
        for name in ("train.jsonl", "test/test-00001.mixture.wav", "test/test-00001.faces.f32"):
            assert (tmp_path / name).read_bytes() == (corpus_root / name).read_bytes()

    def test_missing_file_detected(self, corpus_root, tmp_path):
        gen_corpus(CorpusConfig(counts={"test": 2}, output_dir=str(tmp_path), duration_range_s=(1.0, 1.0)))
        (tmp_path / "test" / "test-00000.labels.txt").unlink()
        with pytest.raises(CorpusIOError):
            read_manifest(tmp_path, "test")

    def test_unknown_split(self, corpus_root):
        with pytest.raises(CorpusIOError):
            read_manifest(corpus_root, "dev")

    def test_unknown_clip_id(self, corpus_root):
        manifest = read_manifest(corpus_root, "test")
        with pytest.raises(UnknownClipError, match="test-99999"):
            manifest.entry("test-99999")
        with pytest.raises(UnknownClipError):
            load_clip(manifest, "test-99999")
