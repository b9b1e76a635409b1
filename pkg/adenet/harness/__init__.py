"""
Harness - data loading, training, evaluation, ablation, inference and plots
"""

from adenet.harness.ablation import ABLATION_AXES, ablate, config_diff
from adenet.harness.checkpoint import Checkpoint, load_checkpoint, model_from_checkpoint, save_checkpoint
from adenet.harness.evaluation import evaluate, evaluate_model, write_report
from adenet.harness.inference import detect_clip, enhance_clip
from adenet.harness.plotting import PLOT_KINDS, plot
from adenet.harness.training import train

__all__ = [
    "ABLATION_AXES",
    "Checkpoint",
    "PLOT_KINDS",
    "ablate",
    "config_diff",
    "detect_clip",
    "enhance_clip",
    "evaluate",
    "evaluate_model",
    "load_checkpoint",
    "model_from_checkpoint",
    "plot",
    "save_checkpoint",
    "train",
    "write_report",
]
