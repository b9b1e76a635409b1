"""
Cross-modal conformer - layer norm / multi-modal layer norm, cross-modal attention
and the conformer building blocks shared with the context and fusion stages
"""

import math
from typing import NamedTuple

import torch
import torch.nn.functional as F
from torch import nn

from adenet.config import CmaVariant, ModelConfig
from adenet.errors import ConfigError, ShapeError

NORM_EPS = 1e-5
MLN_POSITIONS = ("none", "ffn1", "cma", "conv", "ffn2", "ln")


def _normalize(x: torch.Tensor, eps: float) -> torch.Tensor:
    mean = x.mean(dim=-1, keepdim=True)
    var = ((x - mean) ** 2).mean(dim=-1, keepdim=True)
    return (x - mean) / torch.sqrt(var + eps)


def layer_norm(
    x: torch.Tensor, gamma: torch.Tensor, beta: torch.Tensor, eps: float = NORM_EPS
) -> torch.Tensor:
    """(x - u) / sqrt(var + eps) * gamma + beta over the channel axis"""
    return _normalize(x, eps) * gamma + beta


def mln(
    x: torch.Tensor,
    y: torch.Tensor,
    gamma: torch.Tensor,
    beta: torch.Tensor,
    f_weight: torch.Tensor,
    f_bias: torch.Tensor,
    eps: float = NORM_EPS,
) -> torch.Tensor:
    """gamma * (normalized x + tanh(f(y))) + beta with f a per-channel affine map"""
    if x.shape != y.shape:
        raise ShapeError(f"mln operands differ in shape: {tuple(x.shape)} vs {tuple(y.shape)}")
    return gamma * (_normalize(x, eps) + torch.tanh(y * f_weight + f_bias)) + beta


class LayerNorm(nn.Module):
    def __init__(self, channels: int, eps: float = NORM_EPS) -> None:
        super().__init__()
        self.gamma = nn.Parameter(torch.ones(channels))
        self.beta = nn.Parameter(torch.zeros(channels))
        self.eps = eps

    def forward(self, x: torch.Tensor, y: torch.Tensor | None = None) -> torch.Tensor:
        return layer_norm(x, self.gamma, self.beta, self.eps)


class MultiModalLayerNorm(LayerNorm):
    """Layer norm conditioned on the opposite stream; f starts at zero so it begins as LN"""

    def __init__(self, channels: int, eps: float = NORM_EPS) -> None:
        super().__init__(channels, eps)
        self.f_weight = nn.Parameter(torch.zeros(channels))
        self.f_bias = nn.Parameter(torch.zeros(channels))

    def forward(self, x: torch.Tensor, y: torch.Tensor | None = None) -> torch.Tensor:
        if y is None:
            raise ShapeError("multi-modal layer norm needs a constraint tensor")
        return mln(x, y, self.gamma, self.beta, self.f_weight, self.f_bias, self.eps)


def channel_mean_gap(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """|mean_a - mean_b| per channel over all leading axes"""
    return (a.reshape(-1, a.shape[-1]).mean(0) - b.reshape(-1, b.shape[-1]).mean(0)).abs()


class FeedForward(nn.Module):
    """Pre-norm FFN: LN -> Linear(x expansion) -> SiLU -> Linear"""

    def __init__(self, d: int, expansion: int = 4, dropout: float = 0.0) -> None:
        super().__init__()
        self.norm = LayerNorm(d)
        self.fc1 = nn.Linear(d, d * expansion)
        self.fc2 = nn.Linear(d * expansion, d)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.dropout(F.silu(self.fc1(self.norm(x))))
        return self.dropout(self.fc2(h))


class ConvModule(nn.Module):
    """LN -> pointwise(2C) -> GLU -> depthwise(k) -> BN -> SiLU -> pointwise"""

    def __init__(self, d: int, kernel: int = 15, dropout: float = 0.0) -> None:
        super().__init__()
        if kernel % 2 == 0:
            raise ConfigError(f"depthwise kernel must be odd, got {kernel}")
        self.norm = LayerNorm(d)
        self.pointwise1 = nn.Conv1d(d, 2 * d, 1)
        self.depthwise = nn.Conv1d(d, d, kernel, padding=kernel // 2, groups=d)
        self.bn = nn.BatchNorm1d(d)
        self.pointwise2 = nn.Conv1d(d, d, 1)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.norm(x).transpose(1, 2)
        h = F.glu(self.pointwise1(h), dim=1)
        h = F.silu(self.bn(self.depthwise(h)))
        return self.dropout(self.pointwise2(h).transpose(1, 2))


def _split_heads(x: torch.Tensor, heads: int) -> torch.Tensor:
    b, t, d = x.shape
    return x.view(b, t, heads, d // heads).transpose(1, 2)


def _merge_heads(x: torch.Tensor) -> torch.Tensor:
    b, h, t, dh = x.shape
    return x.transpose(1, 2).reshape(b, t, h * dh)


def attend(q: torch.Tensor, k: torch.Tensor, v: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
    """Scaled dot-product attention over (B, H, T, d_h); returns output and row-stochastic weights"""
    scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
    weights = torch.softmax(scores, dim=-1)
    return weights @ v, weights


class MultiHeadAttention(nn.Module):
    def __init__(self, d: int, heads: int) -> None:
        super().__init__()
        if d % heads:
            raise ConfigError(f"d={d} is not divisible by heads={heads}")
        self.heads = heads
        self.q = nn.Linear(d, d)
        self.k = nn.Linear(d, d)
        self.v = nn.Linear(d, d)
        self.out = nn.Linear(d, d)

    def forward(
        self, query: torch.Tensor, key: torch.Tensor, value: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.heads
        out, weights = attend(
            _split_heads(self.q(query), h), _split_heads(self.k(key), h), _split_heads(self.v(value), h)
        )
        return self.out(_merge_heads(out)), weights


class CrossModalAttention(nn.Module):
    """Attention between frame-synchronous audio and visual streams.

    ``self_keyed``: each stream forms queries and keys from itself and reads values from
    the other stream. ``cross_keyed``: queries from the stream, keys and values from the
    other one.
    """

    def __init__(self, d: int, heads: int, variant: CmaVariant = "self_keyed") -> None:
        super().__init__()
        if d % heads:
            raise ConfigError(f"d={d} is not divisible by heads={heads}")
        if variant not in ("self_keyed", "cross_keyed"):
            raise ConfigError(f"unknown cross-modal attention variant {variant!r}")
        self.heads, self.variant = heads, variant
        self.w_a1, self.w_a2, self.w_a3 = nn.Linear(d, d), nn.Linear(d, d), nn.Linear(d, d)
        self.w_v1, self.w_v2, self.w_v3 = nn.Linear(d, d), nn.Linear(d, d), nn.Linear(d, d)
        self.out_a = nn.Linear(d, d)
        self.out_v = nn.Linear(d, d)

    def forward(
        self, fa: torch.Tensor, fv: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
        if fa.shape != fv.shape:
            raise ShapeError(f"audio {tuple(fa.shape)} and visual {tuple(fv.shape)} streams differ")
        h = self.heads
        q_a, k_a, v_a = (_split_heads(w(fa), h) for w in (self.w_a1, self.w_a2, self.w_a3))
        q_v, k_v, v_v = (_split_heads(w(fv), h) for w in (self.w_v1, self.w_v2, self.w_v3))

        if self.variant == "self_keyed":
            out_a, weights_a = attend(q_a, k_a, v_v)
            out_v, weights_v = attend(q_v, k_v, v_a)
        else:
            out_a, weights_a = attend(q_a, k_v, v_v)
            out_v, weights_v = attend(q_v, k_a, v_a)
        return self.out_a(_merge_heads(out_a)), self.out_v(_merge_heads(out_v)), weights_a, weights_v


class ConformerBlock(nn.Module):
    """x + FFN/2 -> self-attention -> conv module -> x + FFN/2 -> LN"""

    def __init__(
        self, d: int, heads: int, expansion: int = 4, kernel: int = 15, dropout: float = 0.0
    ) -> None:
        super().__init__()
        self.ffn1 = FeedForward(d, expansion, dropout)
        self.attn_norm = LayerNorm(d)
        self.attn = MultiHeadAttention(d, heads)
        self.attn_dropout = nn.Dropout(dropout)
        self.conv = ConvModule(d, kernel, dropout)
        self.ffn2 = FeedForward(d, expansion, dropout)
        self.norm = LayerNorm(d)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """(B, T, d) -> (B, T, d)"""
        if x.dim() != 3 or x.shape[-1] != self.norm.gamma.shape[0]:
            raise ShapeError(f"conformer block expects (B, T, {self.norm.gamma.shape[0]}), got {tuple(x.shape)}")
        x = x + 0.5 * self.ffn1(x)
        h = self.attn_norm(x)
        x = x + self.attn_dropout(self.attn(h, h, h)[0])
        x = x + self.conv(x)
        x = x + 0.5 * self.ffn2(x)
        return self.norm(x)


class CrossModalOutput(NamedTuple):
    audio: torch.Tensor
    visual: torch.Tensor
    audio_pre_norm: torch.Tensor
    visual_pre_norm: torch.Tensor
    attn_audio: torch.Tensor
    attn_visual: torch.Tensor


class StreamPair(nn.Module):
    """The same sublayer instantiated once per stream"""

    def __init__(self, audio: nn.Module, visual: nn.Module) -> None:
        super().__init__()
        self.audio = audio
        self.visual = visual


class CrossModalConformer(nn.Module):
    """FFN -> CMA -> conv -> FFN -> norm on both streams, sharing the CMA stage.

    The multi-modal layer norm sits at the final norm by default. Any other
    position inserts it right after that stage's residual add; the constraint
    for each stream is the opposite stream at the same point.
    """

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        if config.mln_position not in MLN_POSITIONS:
            raise ConfigError(f"unknown MLN position {config.mln_position!r}")
        d, heads = config.d, config.heads
        self.position = config.mln_position
        self.use_cmc = config.use_cmc

        def pair(factory: type[nn.Module], *args: object) -> StreamPair:
            return StreamPair(factory(*args), factory(*args))

        self.ffn1 = pair(FeedForward, d, config.ffn_expansion, config.dropout)
        self.attn_norm = pair(LayerNorm, d)
        if self.use_cmc:
            self.cma = CrossModalAttention(d, heads, config.cma_variant)
        else:
            self.self_attn = pair(MultiHeadAttention, d, heads)
        self.conv = pair(ConvModule, d, config.conv_kernel, config.dropout)
        self.ffn2 = pair(FeedForward, d, config.ffn_expansion, config.dropout)
        self.norm = pair(MultiModalLayerNorm if self.position == "ln" else LayerNorm, d)
        if self.position not in ("none", "ln"):
            self.mln = pair(MultiModalLayerNorm, d)

    def _maybe_mln(self, stage: str, a: torch.Tensor, v: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if stage != self.position:
            return a, v
        return self.mln.audio(a, v), self.mln.visual(v, a)

    def forward(self, fa: torch.Tensor, fv: torch.Tensor) -> CrossModalOutput:
        if fa.shape != fv.shape:
            raise ShapeError(f"audio {tuple(fa.shape)} and visual {tuple(fv.shape)} streams differ")
        a = fa + 0.5 * self.ffn1.audio(fa)
        v = fv + 0.5 * self.ffn1.visual(fv)
        a, v = self._maybe_mln("ffn1", a, v)

        a_n, v_n = self.attn_norm.audio(a), self.attn_norm.visual(v)
        if self.use_cmc:
            da, dv, w_a, w_v = self.cma(a_n, v_n)
        else:
            da, w_a = self.self_attn.audio(a_n, a_n, a_n)
            dv, w_v = self.self_attn.visual(v_n, v_n, v_n)
        a, v = a + da, v + dv
        a, v = self._maybe_mln("cma", a, v)

        a, v = a + self.conv.audio(a), v + self.conv.visual(v)
        a, v = self._maybe_mln("conv", a, v)

        a = a + 0.5 * self.ffn2.audio(a)
        v = v + 0.5 * self.ffn2.visual(v)
        a, v = self._maybe_mln("ffn2", a, v)

        out_a, out_v = self.norm.audio(a, v), self.norm.visual(v, a)
        return CrossModalOutput(out_a, out_v, a, v, w_a, w_v)
