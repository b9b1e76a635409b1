"""
Cross-modal circulant fusion - detection embeddings shape the enhancement mask,
the pooled mask gates the detection embeddings; plus both decoders' heads
"""

from typing import NamedTuple

import torch
import torch.nn.functional as F
from torch import nn

from adenet.config import ModelConfig
from adenet.errors import AlignmentError, ShapeError
from adenet.xmodal import ConformerBlock


def fuse_av(fa: torch.Tensor, fv: torch.Tensor, proj: nn.Linear) -> torch.Tensor:
    """Channel concat of the two streams, pointwise 2d -> d"""
    if fa.shape != fv.shape:
        raise ShapeError(f"cannot fuse streams of shape {tuple(fa.shape)} and {tuple(fv.shape)}")
    return proj(torch.cat([fa, fv], dim=-1))


def upsample_embed(f_av: torch.Tensor, t_a: int, scale: int) -> torch.Tensor:
    """(B, T_v, d) -> (B, d, T_a) by linear interpolation in time, edges replicated"""
    t_v = f_av.shape[1]
    if t_a != scale * t_v:
        raise AlignmentError(f"T_a={t_a} is not {scale} x T_v={t_v}")
    return F.interpolate(f_av.transpose(1, 2), size=t_a, mode="linear", align_corners=False)


def refine_av(
    mask: torch.Tensor, f_av: torch.Tensor, scale: int, ablate_s_to_a: bool = False
) -> tuple[torch.Tensor, torch.Tensor]:
    """Max-pool the mask x``scale`` in time and gate F'_av elementwise.

    Returns (F''_av, pooled mask). With ``ablate_s_to_a`` the pooled mask is all ones.
    """
    b, c, t_a = mask.shape
    t_v, d = f_av.shape[1], f_av.shape[2]
    if c != d:
        raise ShapeError(f"mask channels {c} differ from embedding dim {d}")
    if t_a != scale * t_v:
        raise AlignmentError(f"T_a={t_a} is not {scale} x T_v={t_v}")
    if ablate_s_to_a:
        pooled = torch.ones(b, c, t_v, dtype=f_av.dtype, device=f_av.device)
    else:
        pooled = F.max_pool1d(mask, kernel_size=scale, stride=scale)
    return pooled.transpose(1, 2) * f_av, pooled


def asd_decode(f_av: torch.Tensor, head: nn.Linear) -> torch.Tensor:
    """(B, T_v, d) -> per-frame speaking probability (B, T_v)"""
    return torch.sigmoid(head(f_av)).squeeze(-1)


def se_apply_mask(mask: torch.Tensor, fe: torch.Tensor) -> torch.Tensor:
    if mask.shape != fe.shape:
        raise ShapeError(f"mask {tuple(mask.shape)} and feature {tuple(fe.shape)} differ")
    return mask * fe


class FusionOutput(NamedTuple):
    scores: torch.Tensor
    mask: torch.Tensor | None
    f_av: torch.Tensor
    f_av_context: torch.Tensor
    f_av_refined: torch.Tensor
    pooled_mask: torch.Tensor | None


class CirculantFusion(nn.Module):
    """Bidirectional bridge between the detection and enhancement branches.

    Without an enhancement branch (detection-only model) the temporal model output
    goes straight to the detection head.
    """

    def __init__(self, config: ModelConfig, with_enhancement: bool = True) -> None:
        super().__init__()
        d, c = config.d, config.fusion.C_se
        block = dict(expansion=config.ffn_expansion, kernel=config.conv_kernel, dropout=config.dropout)
        self.scale = config.fusion.resample_scale
        self.ablate_a_to_s = config.fusion.ablate_a_to_s
        self.ablate_s_to_a = config.fusion.ablate_s_to_a
        self.with_enhancement = with_enhancement

        self.fuse = nn.Linear(2 * d, d)
        self.temporal = ConformerBlock(d, config.heads, **block)
        if with_enhancement:
            self.mask_fc = nn.Linear(c + d, c)
            self.mask_conformer = ConformerBlock(c, config.context.heads, **block)
        self.asd_head = nn.Linear(d, 1)

    def estimate_mask(self, fe_context: torch.Tensor, f_av: torch.Tensor) -> torch.Tensor:
        """M = ReLU(conformer(FC([F'_e ; Up(F'_av)]))), shape (B, C_se, T_a)"""
        up = upsample_embed(f_av, fe_context.shape[-1], self.scale)
        if self.ablate_a_to_s:
            up = torch.zeros_like(up)
        joint = torch.cat([fe_context, up], dim=1).transpose(1, 2)
        return F.relu(self.mask_conformer(self.mask_fc(joint))).transpose(1, 2)

    def forward(self, fa: torch.Tensor, fv: torch.Tensor, fe_context: torch.Tensor | None) -> FusionOutput:
        f_av = fuse_av(fa, fv, self.fuse)
        f_av_context = self.temporal(f_av)
        if not self.with_enhancement or fe_context is None:
            return FusionOutput(asd_decode(f_av_context, self.asd_head), None, f_av, f_av_context, f_av_context, None)

        mask = self.estimate_mask(fe_context, f_av_context)
        refined, pooled = refine_av(mask, f_av_context, self.scale, self.ablate_s_to_a)
        return FusionOutput(asd_decode(refined, self.asd_head), mask, f_av, f_av_context, refined, pooled)
