"""
Training data - manifest-backed dataset, SNR-grouped batch sampler and collation
"""

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset, Sampler

from adenet.config import VIDEO_FPS, DataConfig, OptimConfig
from adenet.errors import ConfigError, ShapeError
from adenet.features import align_streams, mfcc, preprocess_faces
from adenet.signalio import SAMPLES_PER_FRAME, ClipRecord, CorpusManifest, derive_seed, load_clip


@dataclass
class ClipTensors:
    """Model-ready tensors for one clip, aligned to T_v video frames"""

    clip_id: str
    mfcc: torch.Tensor
    faces: torch.Tensor
    mixture: torch.Tensor
    clean: torch.Tensor
    labels: torch.Tensor
    speaking: bool
    snr_db: float

    @property
    def num_frames(self) -> int:
        return int(self.faces.shape[0])


@dataclass
class Batch:
    clip_ids: list[str]
    mfcc: torch.Tensor
    faces: torch.Tensor
    mixture: torch.Tensor
    clean: torch.Tensor
    labels: torch.Tensor
    speaking: torch.Tensor
    snr_db: torch.Tensor

    def __len__(self) -> int:
        return len(self.clip_ids)

    def to(self, device: str | torch.device, dtype: torch.dtype = torch.float32) -> "Batch":
        return Batch(
            clip_ids=self.clip_ids,
            mfcc=self.mfcc.to(device, dtype),
            faces=self.faces.to(device, dtype),
            mixture=self.mixture.to(device, dtype),
            clean=self.clean.to(device, dtype),
            labels=self.labels.to(device, dtype),
            speaking=self.speaking.to(device),
            snr_db=self.snr_db.to(device),
        )


def prepare_clip(record: ClipRecord, train_mode: bool = False, seed: int = 0) -> ClipTensors:
    """MFCC + preprocessed faces, aligned, with waveforms cut to 640 samples per frame"""
    seq, faces = align_streams(mfcc(record.mixture), preprocess_faces(record.faces.frames, train_mode, seed))
    t_v = len(faces)
    n = t_v * SAMPLES_PER_FRAME

    def wave(samples: np.ndarray) -> torch.Tensor:
        out = np.zeros(n, dtype=np.float32)
        out[: min(n, samples.size)] = samples[:n]
        return torch.from_numpy(out)

    return ClipTensors(
        clip_id=record.clip_id,
        mfcc=torch.from_numpy(seq.coeffs.astype(np.float32)),
        faces=torch.from_numpy(faces.frames),
        mixture=wave(record.mixture.samples),
        clean=wave(record.clean_target.samples),
        labels=torch.from_numpy(record.asd_labels[:t_v].astype(np.float32)),
        speaking=record.is_speaking,
        snr_db=record.snr_db,
    )


class ClipDataset(Dataset[ClipTensors]):
    """Clips of one manifest; augmentation is redrawn per (seed, clip, epoch)"""

    def __init__(self, manifest: CorpusManifest, train_mode: bool = False, seed: int = 0) -> None:
        self.manifest = manifest
        self.train_mode = train_mode
        self.seed = seed
        self.epoch = 0

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def __len__(self) -> int:
        return len(self.manifest)

    def __getitem__(self, index: int) -> ClipTensors:
        entry = self.manifest.records[index]
        record = load_clip(self.manifest, entry)
        aug_seed = derive_seed(self.seed, entry.clip_id, self.epoch)
        return prepare_clip(record, self.train_mode, aug_seed)


def collate_clips(items: Sequence[ClipTensors]) -> Batch:
    """Stack clips of one length; the sampler buckets clips by frame count"""
    lengths = sorted({item.num_frames for item in items})
    if len(lengths) != 1:
        raise ShapeError(f"a batch must hold clips of one length, got frame counts {lengths}")
    return Batch(
        clip_ids=[item.clip_id for item in items],
        mfcc=torch.stack([item.mfcc for item in items]),
        faces=torch.stack([item.faces for item in items]),
        mixture=torch.stack([item.mixture for item in items]),
        clean=torch.stack([item.clean for item in items]),
        labels=torch.stack([item.labels for item in items]),
        speaking=torch.tensor([item.speaking for item in items], dtype=torch.bool),
        snr_db=torch.tensor([item.snr_db for item in items], dtype=torch.float32),
    )


class SnrBatchSampler(Sampler[list[int]]):
    """Batches that each hold a single SNR level and a single clip length.

    ``mixed`` mode cycles through ``snr_list`` batch by batch; ``fixed`` mode keeps
    only clips at the one configured level. Within a level, clips are bucketed by
    ``lengths`` (video frames) so collation never crops. Order is a function of
    (seed, epoch).
    """

    def __init__(
        self,
        snr_levels: Sequence[float],
        batch_size: int,
        snr_list: Sequence[float],
        mode: str = "mixed",
        seed: int = 0,
        shuffle: bool = True,
        lengths: Sequence[int] | None = None,
    ) -> None:
        if lengths is not None and len(lengths) != len(snr_levels):
            raise ConfigError(f"{len(lengths)} clip lengths for {len(snr_levels)} SNR levels")
        self.batch_size = batch_size
        self.seed = seed
        self.shuffle = shuffle
        self.epoch = 0
        self.lengths = list(lengths) if lengths is not None else [0] * len(snr_levels)
        levels = list(snr_list[:1]) if mode == "fixed" else list(snr_list)
        self.groups = {
            level: [i for i, snr in enumerate(snr_levels) if snr == level] for level in levels
        }
        if not any(self.groups.values()):
            raise ConfigError(f"no clips at SNR levels {levels}")

    def set_epoch(self, epoch: int) -> None:
        self.epoch = epoch

    def _batches(self) -> list[list[list[int]]]:
        rng = np.random.default_rng(derive_seed(self.seed, "batches", self.epoch))
        per_level = []
        for indices in self.groups.values():
            order = [int(i) for i in rng.permutation(indices)] if self.shuffle else list(indices)
            buckets: dict[int, list[int]] = {}
            for i in order:
                buckets.setdefault(self.lengths[i], []).append(i)
            batches = [
                bucket[k : k + self.batch_size]
                for bucket in buckets.values()
                for k in range(0, len(bucket), self.batch_size)
            ]
            if self.shuffle:
                batches = [batches[j] for j in rng.permutation(len(batches))]
            per_level.append(batches)
        return per_level

    def __iter__(self) -> Iterator[list[int]]:
        per_level = self._batches()
        for step in range(max(len(b) for b in per_level)):
            for batches in per_level:
                if step < len(batches):
                    yield batches[step]

    def __len__(self) -> int:
        return sum(len(b) for b in self._batches())


def make_loader(
    manifest: CorpusManifest,
    data: DataConfig,
    optim: OptimConfig,
    train_mode: bool,
) -> DataLoader:
    """DataLoader over one split; background workers prefetch into a bounded queue"""
    dataset = ClipDataset(manifest, train_mode=train_mode and data.augment, seed=optim.seed)
    sampler = SnrBatchSampler(
        [r.snr_db for r in manifest.records],
        optim.batch_size,
        data.snr_list if train_mode else sorted({r.snr_db for r in manifest.records}),
        mode=data.snr_mode if train_mode else "mixed",
        seed=optim.seed,
        shuffle=train_mode,
        lengths=[int(round(r.duration_s * VIDEO_FPS)) for r in manifest.records],
    )
    extra = {"prefetch_factor": optim.prefetch_factor} if optim.num_workers > 0 else {}
    return DataLoader(
        dataset,
        batch_sampler=sampler,
        collate_fn=collate_clips,
        num_workers=optim.num_workers,
        **extra,
    )


def set_loader_epoch(loader: DataLoader, epoch: int) -> None:
    loader.dataset.set_epoch(epoch)
    loader.batch_sampler.set_epoch(epoch)
