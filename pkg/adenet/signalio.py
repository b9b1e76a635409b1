"""
Signal I/O - waveform loading, SNR mixing and the synthetic audio-visual corpus
Generates deterministic talking-face clips that stand in for real ASD/AVSE datasets
"""

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np
import soundfile as sf
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.signal import butter, lfilter
from scipy.signal.windows import tukey

from adenet.config import FACE_SIZE, SAMPLE_RATE, VIDEO_FPS
from adenet.errors import (
    ClipSpecError,
    ConfigError,
    CorpusIOError,
    DegenerateInputError,
    SequenceLengthError,
    ShapeError,
    UnknownClipError,
    UnsupportedAudioError,
    WavFormatError,
)
from adenet.log import get_logger

logger = get_logger(__name__)

SAMPLES_PER_FRAME = SAMPLE_RATE // VIDEO_FPS
ENVELOPE_ACTIVE_THRESHOLD = 0.1
# mean-square level silent clips' noise is referenced to when applying snr_db
REFERENCE_SPEECH_POWER = 0.02
PEAK_LIMIT = 0.95

MOUTH_CENTER_Y = 82.0
MOUTH_HALF_WIDTH = 15
MOUTH_MIN_HEIGHT = 2.0
MOUTH_MAX_HEIGHT = 18.0
MOUTH_SHADE = 0.05


class SpeakerKind(str, Enum):
    SPEAKING = "speaking"
    SILENT_STATIC = "silent_static"
    SILENT_CHEWING = "silent_chewing"


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples in [-1, 1] at a given sample rate"""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ShapeError(f"waveform must be 1-D, got shape {samples.shape}")
        if samples.size == 0:
            raise SequenceLengthError("waveform is empty")
        if not np.all(np.isfinite(samples)):
            raise DegenerateInputError("waveform contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValueError(f"invalid sample rate {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate

    @property
    def power(self) -> float:
        return float(np.mean(self.samples**2))


@dataclass(frozen=True)
class FaceClip:
    """Grayscale face crops, T_v x 112 x 112, values in [0, 1] at 25 fps"""

    frames: np.ndarray
    frame_rate: int = VIDEO_FPS

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 3:
            raise ShapeError(f"face clip must be T x H x W, got shape {frames.shape}")
        if frames.shape[0] == 0:
            raise SequenceLengthError("face clip has no frames")
        if frames.shape[1:] != (FACE_SIZE, FACE_SIZE):
            raise ShapeError(f"face frames must be {FACE_SIZE}x{FACE_SIZE}, got {frames.shape[1:]}")
        if frames.min() < 0.0 or frames.max() > 1.0:
            raise ValueError("face pixel values must lie in [0, 1]")
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return int(self.frames.shape[0])


@dataclass(frozen=True)
class ClipRecord:
    """One training example: mixture, clean target, face track and frame labels"""

    mixture: Waveform
    clean_target: Waveform
    noise: Waveform
    faces: FaceClip
    asd_labels: np.ndarray
    speaker_kind: SpeakerKind
    clip_id: str
    snr_db: float
    mouth_heights: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        labels = np.asarray(self.asd_labels, dtype=np.int64)
        object.__setattr__(self, "asd_labels", labels)
        if not len(self.mixture) == len(self.clean_target) == len(self.noise):
            raise ShapeError("mixture, clean target and noise differ in length")
        if labels.shape != (len(self.faces),):
            raise ShapeError(f"expected {len(self.faces)} labels, got {labels.shape}")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("asd labels must be 0 or 1")
        if self.speaker_kind is not SpeakerKind.SPEAKING:
            if labels.any() or np.any(self.clean_target.samples != 0.0):
                raise ValueError("silent clips carry zero labels and an all-zero target")

    @property
    def is_speaking(self) -> bool:
        return self.speaker_kind is SpeakerKind.SPEAKING


# ---------------------------------------------------------------------------
# WAV I/O


def resample_linear(samples: np.ndarray, src_rate: int, dst_rate: int) -> np.ndarray:
    """Linear-interpolation resampler; within 30 dB of a polyphase filter only for content under ~5% of the source rate"""
    if src_rate == dst_rate:
        return np.asarray(samples, dtype=np.float64)
    n_out = int(round(len(samples) * dst_rate / src_rate))
    positions = np.arange(n_out) * (src_rate / dst_rate)
    return np.interp(positions, np.arange(len(samples)), samples)


def load_wav(path: str | Path) -> Waveform:
    """Read a 16-bit PCM RIFF/WAVE file as mono 16 kHz audio in [-1, 1]"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        info = sf.info(str(path))
    except RuntimeError as e:
        raise WavFormatError(f"{path}: not a readable RIFF/WAVE file ({e})") from e

    if info.format != "WAV":
        raise WavFormatError(f"{path}: container {info.format} is not RIFF/WAVE")
    if info.subtype != "PCM_16":
        raise UnsupportedAudioError(f"{path}: codec {info.subtype} is not 16-bit PCM")
    if info.channels not in (1, 2):
        raise UnsupportedAudioError(f"{path}: {info.channels} channels not supported")

    try:
        data, rate = sf.read(str(path), dtype="int16", always_2d=True)
    except RuntimeError as e:
        raise WavFormatError(f"{path}: corrupt sample data ({e})") from e

    samples = data.astype(np.float64).mean(axis=1) / 32768.0
    return Waveform(resample_linear(samples, rate, SAMPLE_RATE), SAMPLE_RATE)


def save_wav(path: str | Path, wave: Waveform) -> None:
    """Write 16-bit PCM mono; quantization inverts load_wav's 1/32768 scaling"""
    pcm = np.clip(np.round(wave.samples * 32768.0), -32768, 32767).astype(np.int16)
    try:
        sf.write(str(path), pcm, wave.sample_rate, subtype="PCM_16", format="WAV")
    except (RuntimeError, OSError) as e:
        raise CorpusIOError(f"cannot write {path}: {e}") from e


# ---------------------------------------------------------------------------
# Mixing


def _noise_gain(speech_power: float, noise_power: float, snr_db: float) -> float:
    if speech_power <= 0.0 or noise_power <= 0.0:
        raise DegenerateInputError("speech and noise must both have positive power")
    return float(np.sqrt(speech_power / (noise_power * 10.0 ** (snr_db / 10.0))))


def mix_at_snr(speech: Waveform, noise: Waveform, snr_db: float) -> tuple[Waveform, Waveform]:
    """Scale noise so that 10*log10(P_speech / P_noise) == snr_db and add it to speech"""
    if len(speech) != len(noise):
        raise SequenceLengthError(f"speech ({len(speech)}) and noise ({len(noise)}) lengths differ")
    g = _noise_gain(speech.power, noise.power, snr_db)
    scaled = noise.samples * g
    return (
        Waveform(speech.samples + scaled, speech.sample_rate),
        Waveform(scaled, noise.sample_rate),
    )


# ---------------------------------------------------------------------------
# Synthetic clips


class ClipSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    duration_s: float = Field(2.0, ge=1.0, le=4.0)
    speaker_kind: SpeakerKind = SpeakerKind.SPEAKING
    snr_db: float = 10.0

    @field_validator("snr_db")
    @classmethod
    def _snr_level(cls, v: float) -> float:
        if v not in (0.0, 5.0, 10.0):
            raise ValueError(f"snr_db must be one of 0, 5, 10 (got {v})")
        return v

    @property
    def num_samples(self) -> int:
        return int(round(self.duration_s * SAMPLE_RATE))

    @property
    def num_frames(self) -> int:
        return int(round(self.duration_s * VIDEO_FPS))


def derive_seed(*parts: Any) -> int:
    """Stable 63-bit seed from arbitrary parts (independent of PYTHONHASHSEED)"""
    key = ":".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1


def speech_envelope(rng: np.random.Generator, num_samples: int) -> np.ndarray:
    """Piecewise envelope in [0, 1]: tapered voiced bursts separated by pauses"""
    env = np.zeros(num_samples)
    t = int(rng.uniform(0.05, 0.3) * SAMPLE_RATE)
    while t < num_samples:
        length = int(rng.uniform(0.15, 0.6) * SAMPLE_RATE)
        burst = rng.uniform(0.6, 1.0) * tukey(length, alpha=0.5)
        end = min(num_samples, t + length)
        env[t:end] = burst[: end - t]
        t = end + int(rng.uniform(0.1, 0.4) * SAMPLE_RATE)
    return env


def harmonic_carrier(rng: np.random.Generator, num_samples: int) -> np.ndarray:
    """Harmonic tone stack with f0 in [100, 250] Hz and slight vibrato, peak 1"""
    f0 = rng.uniform(100.0, 250.0)
    t = np.arange(num_samples) / SAMPLE_RATE
    vibrato = 1.0 + 0.03 * np.sin(2 * np.pi * rng.uniform(2.0, 5.0) * t + rng.uniform(0, 2 * np.pi))
    phase = 2 * np.pi * np.cumsum(f0 * vibrato) / SAMPLE_RATE
    n_harmonics = max(1, min(12, int(3800 // (f0 * 1.03))))
    carrier = np.zeros(num_samples)
    for k in range(1, n_harmonics + 1):
        carrier += np.sin(k * phase + rng.uniform(0, 2 * np.pi)) / k
    return carrier / np.max(np.abs(carrier))


def filtered_noise(rng: np.random.Generator, num_samples: int) -> np.ndarray:
    """Low-pass filtered Gaussian noise with a random cutoff"""
    white = rng.standard_normal(num_samples)
    cutoff = rng.uniform(1000.0, 6000.0)
    b, a = butter(4, cutoff / (SAMPLE_RATE / 2), btype="low")
    noise = lfilter(b, a, white)
    return noise / np.sqrt(np.mean(noise**2)) * 0.1


def frame_means(signal: np.ndarray, num_frames: int) -> np.ndarray:
    """Mean of a per-sample signal over each 40 ms video frame"""
    usable = signal[: num_frames * SAMPLES_PER_FRAME]
    padded = np.zeros(num_frames * SAMPLES_PER_FRAME)
    padded[: usable.size] = usable
    return padded.reshape(num_frames, SAMPLES_PER_FRAME).mean(axis=1)


def render_faces(mouth_open: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Procedural faces; mouth height is linear in mouth_open with sub-pixel coverage"""
    yy, xx = np.mgrid[0:FACE_SIZE, 0:FACE_SIZE].astype(np.float64) + 0.5
    background = rng.uniform(0.1, 0.25)
    skin = rng.uniform(0.55, 0.75)

    base = np.full((FACE_SIZE, FACE_SIZE), background)
    head = ((xx - 56.0) / 40.0) ** 2 + ((yy - 58.0) / 48.0) ** 2 <= 1.0
    base[head] = skin
    for cx in (40.0, 72.0):
        eye = (xx - cx) ** 2 + (yy - 44.0) ** 2 <= 36.0
        base[eye] = 0.1

    heights = MOUTH_MIN_HEIGHT + (MOUTH_MAX_HEIGHT - MOUTH_MIN_HEIGHT) * np.clip(mouth_open, 0, 1)
    rows = np.arange(FACE_SIZE, dtype=np.float64)
    cols = slice(56 - MOUTH_HALF_WIDTH, 56 + MOUTH_HALF_WIDTH)
    frames = np.empty((len(heights), FACE_SIZE, FACE_SIZE), dtype=np.float32)
    for i, h in enumerate(heights):
        top, bottom = MOUTH_CENTER_Y - h / 2, MOUTH_CENTER_Y + h / 2
        coverage = np.clip(np.minimum(rows + 1, bottom) - np.maximum(rows, top), 0.0, 1.0)
        frame = base.copy()
        frame[:, cols] -= coverage[:, None] * (skin - MOUTH_SHADE)
        frames[i] = frame
    return frames, heights


def gen_clip(seed: int, spec: ClipSpec | Mapping[str, Any], clip_id: str | None = None) -> ClipRecord:
    """Deterministic synthetic clip for (seed, spec)"""
    if not isinstance(spec, ClipSpec):
        try:
            spec = ClipSpec.model_validate(dict(spec))
        except ValidationError as e:
            raise ClipSpecError(str(e)) from e

    rng = np.random.default_rng(
        derive_seed(seed, spec.speaker_kind.value, f"{spec.duration_s:.4f}", f"{spec.snr_db:g}")
    )
    n, n_frames = spec.num_samples, spec.num_frames
    frame_time = np.arange(n_frames) / VIDEO_FPS

    if spec.speaker_kind is SpeakerKind.SPEAKING:
        env = speech_envelope(rng, n)
        speech = 0.5 * env * harmonic_carrier(rng, n)
        frame_env = frame_means(env, n_frames)
        labels = (frame_env > ENVELOPE_ACTIVE_THRESHOLD).astype(np.int64)
        mouth_open = frame_env
    elif spec.speaker_kind is SpeakerKind.SILENT_CHEWING:
        speech = np.zeros(n)
        labels = np.zeros(n_frames, dtype=np.int64)
        rate = rng.uniform(1.5, 3.0)
        mouth_open = 0.3 + 0.3 * np.sin(2 * np.pi * rate * frame_time + rng.uniform(0, 2 * np.pi))
    else:
        speech = np.zeros(n)
        labels = np.zeros(n_frames, dtype=np.int64)
        mouth_open = np.full(n_frames, rng.uniform(0.0, 0.2))

    frames, heights = render_faces(mouth_open, rng)
    raw_noise = Waveform(filtered_noise(rng, n))

    if spec.speaker_kind is SpeakerKind.SPEAKING:
        mixture, noise = mix_at_snr(Waveform(speech), raw_noise, spec.snr_db)
        mix, noise_samples = mixture.samples, noise.samples
    else:
        g = _noise_gain(REFERENCE_SPEECH_POWER, raw_noise.power, spec.snr_db)
        noise_samples = raw_noise.samples * g
        mix = speech + noise_samples

    peak = np.max(np.abs(mix))
    if peak > PEAK_LIMIT:
        factor = PEAK_LIMIT / peak
        speech, noise_samples, mix = speech * factor, noise_samples * factor, mix * factor

    return ClipRecord(
        mixture=Waveform(mix),
        clean_target=Waveform(speech),
        noise=Waveform(noise_samples),
        faces=FaceClip(frames),
        asd_labels=labels,
        speaker_kind=spec.speaker_kind,
        clip_id=clip_id or f"clip-{seed}",
        snr_db=spec.snr_db,
        mouth_heights=heights,
    )


# ---------------------------------------------------------------------------
# Corpus


class CorpusConfig(BaseModel):
    """Synthetic corpus layout.

    Kind counts per split use largest-remainder rounding of ``count * ratio``;
    ties go to kinds in ``kind_ratios`` order. SNR levels cycle by clip index.
    """

    model_config = ConfigDict(extra="forbid")

    counts: dict[str, int] = Field(default_factory=lambda: {"train": 8, "val": 4, "test": 4})
    kind_ratios: dict[SpeakerKind, float] = Field(
        default_factory=lambda: {
            SpeakerKind.SPEAKING: 0.5,
            SpeakerKind.SILENT_CHEWING: 0.25,
            SpeakerKind.SILENT_STATIC: 0.25,
        }
    )
    master_seed: int = 0
    output_dir: str = "corpus"
    duration_range_s: tuple[float, float] = (1.0, 4.0)
    snr_levels: list[float] = Field(default_factory=lambda: [0.0, 5.0, 10.0])
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self) -> "CorpusConfig":
        if abs(sum(self.kind_ratios.values()) - 1.0) > 1e-6:
            raise ValueError("kind_ratios must sum to 1")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("split counts must be non-negative")
        lo, hi = self.duration_range_s
        if not 1.0 <= lo <= hi <= 4.0:
            raise ValueError("duration_range_s must lie within [1, 4] seconds")
        return self


def load_corpus_config(path: str | Path, **overrides: Any) -> CorpusConfig:
    try:
        with open(path, "r") as f:
            data = json.load(f)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return CorpusConfig.model_validate(data)
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise ConfigError(f"invalid corpus config {path}: {e}") from e


def kind_counts(total: int, ratios: Mapping[SpeakerKind, float]) -> dict[SpeakerKind, int]:
    """Largest-remainder apportionment of ``total`` clips over speaker kinds"""
    raw = {k: total * r for k, r in ratios.items()}
    counts = {k: int(np.floor(v)) for k, v in raw.items()}
    order = sorted(ratios, key=lambda k: -(raw[k] - counts[k]))
    for k in order[: total - sum(counts.values())]:
        counts[k] += 1
    return counts


class ManifestEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    clip_id: str
    mixture_path: str
    clean_path: str
    noise_path: str
    faces_path: str
    labels_path: str
    kind: SpeakerKind
    snr_db: float
    duration_s: float
    seed: int


class CorpusManifest(BaseModel):
    records: list[ManifestEntry]
    generator_seed: int
    split: str
    root: Path

    @model_validator(mode="after")
    def _unique(self) -> "CorpusManifest":
        ids = [r.clip_id for r in self.records]
        if len(ids) != len(set(ids)):
            raise ValueError(f"duplicate clip ids in split {self.split}")
        return self

    def __len__(self) -> int:
        return len(self.records)

    def verify(self) -> None:
        """Raise CorpusIOError when a referenced file is missing"""
        for r in self.records:
            for rel in (r.mixture_path, r.clean_path, r.noise_path, r.faces_path, r.labels_path):
                if not (self.root / rel).exists():
                    raise CorpusIOError(f"{r.clip_id}: missing {rel}")
            if not (self.root / f"{r.faces_path}.txt").exists():
                raise CorpusIOError(f"{r.clip_id}: missing face header for {r.faces_path}")

    def entry(self, clip_id: str) -> ManifestEntry:
        for r in self.records:
            if r.clip_id == clip_id:
                return r
        raise UnknownClipError(f"clip {clip_id!r} is not in split {self.split}")


def save_faces(path: Path, faces: FaceClip) -> None:
    """Flat little-endian float32 tensor plus a `T_v H W C` sidecar header"""
    t, h, w = faces.frames.shape
    faces.frames.astype("<f4").tofile(path)
    Path(f"{path}.txt").write_text(f"{t} {h} {w} 1\n")


def load_faces(path: Path) -> FaceClip:
    t, h, w, c = (int(v) for v in Path(f"{path}.txt").read_text().split())
    frames = np.fromfile(path, dtype="<f4").reshape(t, h, w, c)
    return FaceClip(frames.mean(axis=-1))


def save_labels(path: Path, labels: np.ndarray) -> None:
    path.write_text("".join(f"{int(v)}\n" for v in labels))


def load_labels(path: Path) -> np.ndarray:
    return np.array([int(line) for line in path.read_text().split()], dtype=np.int64)


def _write_clip(root: Path, split: str, index: int, kind: SpeakerKind, cfg: CorpusConfig) -> ManifestEntry:
    seed = derive_seed(cfg.master_seed, split, index)
    rng = np.random.default_rng(seed)
    lo, hi = cfg.duration_range_s
    n_frames = int(rng.integers(int(round(lo * VIDEO_FPS)), int(round(hi * VIDEO_FPS)) + 1))
    snr = cfg.snr_levels[index % len(cfg.snr_levels)]
    spec = ClipSpec(duration_s=n_frames / VIDEO_FPS, speaker_kind=kind, snr_db=snr)
    clip_id = f"{split}-{index:05d}"
    record = gen_clip(seed, spec, clip_id=clip_id)

    rel = Path(split)
    paths = {
        "mixture_path": rel / f"{clip_id}.mixture.wav",
        "clean_path": rel / f"{clip_id}.clean.wav",
        "noise_path": rel / f"{clip_id}.noise.wav",
        "faces_path": rel / f"{clip_id}.faces.f32",
        "labels_path": rel / f"{clip_id}.labels.txt",
    }
    try:
        save_wav(root / paths["mixture_path"], record.mixture)
        save_wav(root / paths["clean_path"], record.clean_target)
        save_wav(root / paths["noise_path"], record.noise)
        save_faces(root / paths["faces_path"], record.faces)
        save_labels(root / paths["labels_path"], record.asd_labels)
    except OSError as e:
        raise CorpusIOError(f"cannot write clip {clip_id}: {e}") from e

    return ManifestEntry(
        clip_id=clip_id,
        kind=kind,
        snr_db=snr,
        duration_s=spec.duration_s,
        seed=seed,
        **{k: v.as_posix() for k, v in paths.items()},
    )


def gen_corpus(config: CorpusConfig) -> dict[str, CorpusManifest]:
    """Write every split of the synthetic corpus plus its manifests"""
    root = Path(config.output_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
        for split in config.counts:
            (root / split).mkdir(exist_ok=True)
        (root / "corpus.json").write_text(config.model_dump_json(indent=2))
    except OSError as e:
        raise CorpusIOError(f"cannot create corpus directory {root}: {e}") from e

    manifests: dict[str, CorpusManifest] = {}
    for split, count in config.counts.items():
        counts = kind_counts(count, config.kind_ratios)
        kinds = [k for k, c in counts.items() for _ in range(c)]
        np.random.default_rng(derive_seed(config.master_seed, split, "kinds")).shuffle(kinds)

        def work(index: int) -> ManifestEntry:
            return _write_clip(root, split, index, kinds[index], config)

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                entries = list(pool.map(work, range(count)))
        else:
            entries = [work(i) for i in range(count)]

        manifest = CorpusManifest(
            records=entries, generator_seed=config.master_seed, split=split, root=root
        )
        write_manifest(manifest)
        manifests[split] = manifest
        logger.info("split_generated", split=split, clips=count, kinds={k.value: c for k, c in counts.items()})
    return manifests


def write_manifest(manifest: CorpusManifest) -> None:
    lines = (entry.model_dump_json() for entry in manifest.records)
    try:
        (manifest.root / f"{manifest.split}.jsonl").write_text("".join(f"{line}\n" for line in lines))
    except OSError as e:
        raise CorpusIOError(f"cannot write manifest for {manifest.split}: {e}") from e


def read_manifest(root: str | Path, split: str) -> CorpusManifest:
    """Load and verify the manifest of one split"""
    root = Path(root)
    try:
        corpus = json.loads((root / "corpus.json").read_text())
        lines = (root / f"{split}.jsonl").read_text().splitlines()
    except (OSError, json.JSONDecodeError) as e:
        raise CorpusIOError(f"cannot read manifest {root}/{split}.jsonl: {e}") from e

    entries = [ManifestEntry.model_validate_json(line) for line in lines if line.strip()]
    manifest = CorpusManifest(
        records=entries, generator_seed=int(corpus["master_seed"]), split=split, root=root
    )
    manifest.verify()
    return manifest


def load_clip(manifest: CorpusManifest, entry: ManifestEntry | str) -> ClipRecord:
    """Materialize a ClipRecord from files referenced by the manifest"""
    if isinstance(entry, str):
        entry = manifest.entry(entry)
    root = manifest.root
    return ClipRecord(
        mixture=load_wav(root / entry.mixture_path),
        clean_target=load_wav(root / entry.clean_path),
        noise=load_wav(root / entry.noise_path),
        faces=load_faces(root / entry.faces_path),
        asd_labels=load_labels(root / entry.labels_path),
        speaker_kind=entry.kind,
        clip_id=entry.clip_id,
        snr_db=entry.snr_db,
    )


def iter_clips(manifest: CorpusManifest, entries: Iterable[ManifestEntry] | None = None) -> Iterable[ClipRecord]:
    for entry in entries if entries is not None else manifest.records:
        yield load_clip(manifest, entry)
