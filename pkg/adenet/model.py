"""
ADENet graph - encoders, cross-modal conformer, separation network and circulant fusion
wired into one module with a detection head and an enhancement decoder
"""

from dataclasses import dataclass, field

import torch
from torch import nn

from adenet.config import ModelConfig
from adenet.context import SeparationNetwork
from adenet.encoders import (
    RawAudioEncoder,
    SpeechEnhancementDecoder,
    SpeechEnhancementEncoder,
    SpeechTemporalEncoder,
    VisualTemporalEncoder,
)
from adenet.errors import AlignmentError, ConfigError, MaskInvariantError, ShapeError
from adenet.fusion import CirculantFusion, se_apply_mask
from adenet.log import get_logger
from adenet.xmodal import CrossModalConformer

logger = get_logger(__name__)


@dataclass
class ModelOutput:
    scores: torch.Tensor
    enhanced: torch.Tensor | None
    mask: torch.Tensor | None
    intermediates: dict[str, torch.Tensor] = field(default_factory=dict)


class ADENet(nn.Module):
    """Joint active speaker detection and audio-visual speech enhancement.

    Variant ``aclnet`` keeps only the detection path (no SE encoder, separator,
    mask or decoder).
    """

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        enc = config.encoder
        self.enhance = config.variant == "adenet"

        if config.audio_input == "mfcc":
            self.speech_encoder = SpeechTemporalEncoder(enc)
        else:
            self.raw_audio_encoder = RawAudioEncoder(enc, config.fusion.resample_scale)
        self.visual_encoder = VisualTemporalEncoder(enc)
        self.cross_modal = CrossModalConformer(config)
        self.fusion = CirculantFusion(config, with_enhancement=self.enhance)

        if self.enhance:
            self.se_encoder = SpeechEnhancementEncoder(enc.C_se, enc.K, enc.S)
            self.separator = SeparationNetwork(config.context, config)
            self.se_decoder = SpeechEnhancementDecoder(enc.C_se, enc.K, enc.S)

    def encode_audio(self, mfcc: torch.Tensor | None, mixture: torch.Tensor | None) -> torch.Tensor:
        if self.config.audio_input == "mfcc":
            if mfcc is None:
                raise ConfigError("audio_input=mfcc needs MFCC features")
            return self.speech_encoder(mfcc)
        if mixture is None:
            raise ConfigError("audio_input=raw needs the mixture waveform")
        return self.raw_audio_encoder(mixture)

    def forward(
        self,
        mfcc: torch.Tensor | None,
        faces: torch.Tensor,
        mixture: torch.Tensor | None,
    ) -> ModelOutput:
        """mfcc (B, 4T_v, 13), faces (B, T_v, 112, 112), mixture (B, T) -> ModelOutput"""
        fa = self.encode_audio(mfcc, mixture)
        fv = self.visual_encoder(faces)
        if fa.shape != fv.shape:
            raise ShapeError(f"audio embedding {tuple(fa.shape)} and visual {tuple(fv.shape)} misaligned")
        xm = self.cross_modal(fa, fv)

        intermediates = {
            "f_a": fa,
            "f_v": fv,
            "audio_pre_norm": xm.audio_pre_norm,
            "visual_pre_norm": xm.visual_pre_norm,
            "audio_xmodal": xm.audio,
            "visual_xmodal": xm.visual,
            "attn_audio": xm.attn_audio,
            "attn_visual": xm.attn_visual,
        }

        if not self.enhance or mixture is None:
            fused = self.fusion(xm.audio, xm.visual, None)
            intermediates["f_av"] = fused.f_av
            return ModelOutput(fused.scores, None, None, intermediates)

        num_samples = mixture.shape[-1]
        fe = self.se_encoder(mixture)
        scale = self.config.fusion.resample_scale
        if fe.shape[-1] != scale * fv.shape[1]:
            raise AlignmentError(
                f"T_a={fe.shape[-1]} from {num_samples} samples is not {scale} x T_v={fv.shape[1]}"
            )
        fe_context = self.separator(fe)
        fused = self.fusion(xm.audio, xm.visual, fe_context)
        mask = fused.mask
        if mask is None or not bool((mask >= 0).all()):
            raise MaskInvariantError("enhancement mask must be non-negative")

        enhanced = self.se_decoder(se_apply_mask(mask, fe), num_samples)
        intermediates.update(
            f_e=fe,
            f_e_context=fe_context,
            f_av=fused.f_av,
            f_av_context=fused.f_av_context,
            f_av_refined=fused.f_av_refined,
        )
        if fused.pooled_mask is not None:
            intermediates["pooled_mask"] = fused.pooled_mask
        return ModelOutput(fused.scores, enhanced, mask, intermediates)


def build_model(config: ModelConfig, seed: int | None = None, dtype: torch.dtype = torch.float32) -> ADENet:
    """Construct the graph; PyTorch's fan-in uniform init, norms at ones/zeros, MLN f at zero"""
    if seed is not None:
        torch.manual_seed(seed)
    model = ADENet(config).to(dtype)
    logger.debug(
        "model_built",
        variant=config.variant,
        audio_input=config.audio_input,
        parameters=sum(p.numel() for p in model.parameters()),
    )
    return model
