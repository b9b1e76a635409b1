"""
Encoders - speech temporal (MFCC -> F_a), visual temporal (faces -> F_v)
and the 1-D speech-enhancement encoder/decoder pair (waveform <-> F_e)

Tensor layout: embeddings are (B, T, d); context features are (B, C_se, T_a).
"""

import math

import torch
import torch.nn.functional as F
from torch import nn

from adenet.config import FACE_SIZE, EncoderConfig
from adenet.errors import SequenceLengthError, ShapeError

MFCC_TIME_REDUCTION = 4


class SqueezeExcite(nn.Module):
    """Channel gate: global average pool -> bottleneck -> sigmoid"""

    def __init__(self, channels: int, reduction: int = 16) -> None:
        super().__init__()
        hidden = max(1, channels // reduction)
        self.fc1 = nn.Linear(channels, hidden)
        self.fc2 = nn.Linear(hidden, channels)
        self.bypass = False

    def gate(self, x: torch.Tensor) -> torch.Tensor:
        pooled = x.mean(dim=(2, 3))
        return torch.sigmoid(self.fc2(F.relu(self.fc1(pooled))))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if self.bypass:
            return x
        return x * self.gate(x)[:, :, None, None]


class ResidualBlock2d(nn.Module):
    """3x3 basic residual block with an optional squeeze-and-excitation gate"""

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        stride: int | tuple[int, int] = 1,
        se_reduction: int | None = None,
    ) -> None:
        super().__init__()
        self.conv1 = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.bn1 = nn.BatchNorm2d(out_ch)
        self.conv2 = nn.Conv2d(out_ch, out_ch, 3, padding=1, bias=False)
        self.bn2 = nn.BatchNorm2d(out_ch)
        self.se = SqueezeExcite(out_ch, se_reduction) if se_reduction else None

        self.shortcut: nn.Module = nn.Identity()
        if stride not in (1, (1, 1)) or in_ch != out_ch:
            self.shortcut = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out = F.relu(self.bn1(self.conv1(x)))
        out = self.bn2(self.conv2(out))
        if self.se is not None:
            out = self.se(out)
        return F.relu(out + self.shortcut(x))


def _stage(
    in_ch: int,
    out_ch: int,
    blocks: int,
    stride: int | tuple[int, int],
    se_reduction: int | None,
) -> nn.Sequential:
    layers = [ResidualBlock2d(in_ch, out_ch, stride, se_reduction)]
    layers += [ResidualBlock2d(out_ch, out_ch, 1, se_reduction) for _ in range(blocks - 1)]
    return nn.Sequential(*layers)


class SpeechTemporalEncoder(nn.Module):
    """SE-ResNet over the (time, coefficient) MFCC plane.

    Stage strides (time, freq): (1,1), (2,2), (2,2), (1,2); the cumulative x4 time
    reduction lands one output step on each video frame.
    """

    STAGE_STRIDES = ((1, 1), (2, 2), (2, 2), (1, 2))

    def __init__(self, config: EncoderConfig) -> None:
        super().__init__()
        channels = [config.scaled(c) for c in config.se_stage_channels]
        self.stem = nn.Sequential(
            nn.Conv2d(1, channels[0], 3, padding=1, bias=False),
            nn.BatchNorm2d(channels[0]),
            nn.ReLU(),
        )
        stages = []
        in_ch = channels[0]
        for out_ch, blocks, stride in zip(channels, config.se_stage_blocks, self.STAGE_STRIDES):
            stages.append(_stage(in_ch, out_ch, blocks, stride, config.se_reduction))
            in_ch = out_ch
        self.stages = nn.Sequential(*stages)
        self.proj = nn.Linear(in_ch, config.d)

    def se_gates(self) -> list[SqueezeExcite]:
        return [m for m in self.modules() if isinstance(m, SqueezeExcite)]

    def set_se_bypass(self, bypass: bool) -> None:
        for gate in self.se_gates():
            gate.bypass = bypass

    def forward(self, mfcc: torch.Tensor) -> torch.Tensor:
        """(B, T_mfcc, 13) -> (B, T_mfcc / 4, d)"""
        if mfcc.dim() != 3:
            raise ShapeError(f"expected (B, T, n_mfcc) input, got {tuple(mfcc.shape)}")
        if mfcc.shape[1] == 0 or mfcc.shape[1] % MFCC_TIME_REDUCTION:
            raise ShapeError(f"mfcc length {mfcc.shape[1]} is not a positive multiple of 4")
        x = self.stages(self.stem(mfcc.unsqueeze(1)))
        return self.proj(x.mean(dim=3).transpose(1, 2))


class TemporalConvBlock(nn.Module):
    """V-TCN residual unit: ReLU -> BN -> depthwise(k=3) -> pointwise"""

    def __init__(self, channels: int, kernel: int = 3) -> None:
        super().__init__()
        self.bn = nn.BatchNorm1d(channels)
        self.depthwise = nn.Conv1d(
            channels, channels, kernel, padding=kernel // 2, groups=channels, padding_mode="replicate"
        )
        self.pointwise = nn.Conv1d(channels, channels, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return x + self.pointwise(self.depthwise(self.bn(F.relu(x))))


class VisualTemporalEncoder(nn.Module):
    """3-D conv front, per-frame ResNet18 trunk, V-TCN and a pointwise projection"""

    def __init__(self, config: EncoderConfig) -> None:
        super().__init__()
        channels = [config.scaled(c) for c in config.visual_stage_channels]
        k = config.visual_temporal_kernel
        self.front = nn.Sequential(
            nn.Conv3d(
                1,
                channels[0],
                (k, 7, 7),
                stride=(1, 2, 2),
                padding=(k // 2, 3, 3),
                bias=False,
                padding_mode="replicate",
            ),
            nn.BatchNorm3d(channels[0]),
            nn.ReLU(),
            nn.MaxPool3d((1, 3, 3), stride=(1, 2, 2), padding=(0, 1, 1)),
        )
        stages = []
        in_ch = channels[0]
        for i, out_ch in enumerate(channels):
            stages.append(_stage(in_ch, out_ch, 2, 1 if i == 0 else 2, None))
            in_ch = out_ch
        self.trunk = nn.Sequential(*stages)
        self.vtcn = nn.Sequential(*[TemporalConvBlock(in_ch) for _ in range(config.vtcn_depth)])
        self.proj = nn.Conv1d(in_ch, config.d, 1)

    def forward(self, faces: torch.Tensor) -> torch.Tensor:
        """(B, T_v, 112, 112) -> (B, T_v, d)"""
        if faces.dim() != 4 or faces.shape[2:] != (FACE_SIZE, FACE_SIZE):
            raise ShapeError(f"expected (B, T_v, {FACE_SIZE}, {FACE_SIZE}) faces, got {tuple(faces.shape)}")
        b, t = faces.shape[:2]
        x = self.front(faces.unsqueeze(1))
        c, h, w = x.shape[1], x.shape[3], x.shape[4]
        x = x.transpose(1, 2).reshape(b * t, c, h, w)
        x = F.adaptive_avg_pool2d(self.trunk(x), 1).reshape(b, t, -1).transpose(1, 2)
        return self.proj(self.vtcn(x)).transpose(1, 2)


def context_length(num_samples: int, stride: int) -> int:
    return math.ceil(num_samples / stride)


class SpeechEnhancementEncoder(nn.Module):
    """Conv1d (kernel K, stride S) + ReLU with padding so T_a == ceil(T / S)"""

    def __init__(self, channels: int, kernel: int, stride: int) -> None:
        super().__init__()
        self.kernel, self.stride = kernel, stride
        self.left_pad = (kernel - stride) // 2
        self.conv = nn.Conv1d(1, channels, kernel, stride=stride)

    def padding(self, num_samples: int) -> tuple[int, int]:
        t_a = context_length(num_samples, self.stride)
        total = (t_a - 1) * self.stride + self.kernel
        return self.left_pad, total - num_samples - self.left_pad

    def forward(self, wave: torch.Tensor) -> torch.Tensor:
        """(B, T) -> (B, C_se, ceil(T / S))"""
        if wave.shape[-1] == 0:
            raise SequenceLengthError("cannot encode an empty waveform")
        x = F.pad(wave.unsqueeze(1), self.padding(wave.shape[-1]))
        return F.relu(self.conv(x))


class SpeechEnhancementDecoder(nn.Module):
    """ConvTranspose1d back to samples, cropped to the encoder's original length"""

    def __init__(self, channels: int, kernel: int, stride: int) -> None:
        super().__init__()
        self.left_pad = (kernel - stride) // 2
        self.deconv = nn.ConvTranspose1d(channels, 1, kernel, stride=stride)

    def forward(self, feature: torch.Tensor, num_samples: int) -> torch.Tensor:
        """(B, C_se, T_a) -> (B, num_samples)"""
        out = self.deconv(feature).squeeze(1)
        if out.shape[-1] < self.left_pad + num_samples:
            raise ShapeError(f"{feature.shape[-1]} steps cannot cover {num_samples} samples")
        return out[:, self.left_pad : self.left_pad + num_samples]


class RawAudioEncoder(nn.Module):
    """Waveform front-end replacing MFCCs: SE-style encoder, x32 average pool, pointwise to d"""

    def __init__(self, config: EncoderConfig, pool: int) -> None:
        super().__init__()
        self.encoder = SpeechEnhancementEncoder(config.C_se, config.K, config.S)
        self.pool = pool
        self.proj = nn.Conv1d(config.C_se, config.d, 1)

    def forward(self, wave: torch.Tensor) -> torch.Tensor:
        """(B, T) -> (B, T_a / 32, d)"""
        feature = self.encoder(wave)
        if feature.shape[-1] % self.pool:
            raise ShapeError(f"{feature.shape[-1]} encoder steps do not divide into x{self.pool} pooling")
        pooled = F.avg_pool1d(feature, self.pool)
        return self.proj(pooled).transpose(1, 2)
