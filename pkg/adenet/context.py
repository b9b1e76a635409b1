"""
Audio contextual learning - separation network mapping F_e to F'_e
"""

import torch
from torch import nn

from adenet.config import ContextNetConfig, ModelConfig
from adenet.errors import ShapeError
from adenet.xmodal import ConformerBlock, LayerNorm


class DilatedTemporalBlock(nn.Module):
    """Residual pointwise -> dilated depthwise (k=3) -> pointwise unit with per-step channel LN"""

    def __init__(self, channels: int, dilation: int, kernel: int = 3) -> None:
        super().__init__()
        self.pointwise1 = nn.Conv1d(channels, channels, 1)
        self.act1 = nn.PReLU()
        self.norm1 = LayerNorm(channels)
        self.depthwise = nn.Conv1d(
            channels, channels, kernel, padding=dilation * (kernel // 2), dilation=dilation, groups=channels
        )
        self.act2 = nn.PReLU()
        self.norm2 = LayerNorm(channels)
        self.pointwise2 = nn.Conv1d(channels, channels, 1)

    def _norm(self, norm: LayerNorm, x: torch.Tensor) -> torch.Tensor:
        return norm(x.transpose(1, 2)).transpose(1, 2)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self._norm(self.norm1, self.act1(self.pointwise1(x)))
        h = self._norm(self.norm2, self.act2(self.depthwise(h)))
        return x + self.pointwise2(h)


class SeparationNetwork(nn.Module):
    """Conformer stack over (B, C_se, T_a) features, or a dilated TCN stack"""

    def __init__(self, context: ContextNetConfig, model: ModelConfig | None = None) -> None:
        super().__init__()
        expansion = model.ffn_expansion if model else 4
        kernel = model.conv_kernel if model else 15
        dropout = model.dropout if model else 0.0
        self.channels = context.C_se
        self.variant = context.variant

        if context.variant == "tcn":
            self.blocks = nn.Sequential(
                *[
                    DilatedTemporalBlock(context.C_se, dilation)
                    for _ in range(context.num_blocks)
                    for dilation in context.tcn_dilations
                ]
            )
        else:
            self.blocks = nn.Sequential(
                *[
                    ConformerBlock(context.C_se, context.heads, expansion, kernel, dropout)
                    for _ in range(context.num_blocks)
                ]
            )

    def receptive_field(self) -> int | None:
        """One-sided reach in steps for the TCN stack; None (global) for conformers"""
        if self.variant != "tcn":
            return None
        return sum(block.depthwise.dilation[0] for block in self.blocks)

    def forward(self, fe: torch.Tensor) -> torch.Tensor:
        if fe.dim() != 3 or fe.shape[1] != self.channels:
            raise ShapeError(f"expected (B, {self.channels}, T_a) features, got {tuple(fe.shape)}")
        if self.variant == "tcn":
            return self.blocks(fe)
        return self.blocks(fe.transpose(1, 2)).transpose(1, 2)


def separate_context(fe: torch.Tensor, network: SeparationNetwork) -> torch.Tensor:
    """F_e -> F'_e, shape preserved"""
    return network(fe)

