"""
Diagnostics - central-difference gradient checks for float64 models
"""

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import torch

from adenet.log import get_logger

logger = get_logger(__name__)


@dataclass
class GradSample:
    name: str
    index: int
    analytic: float
    numeric: float
    step: float

    @property
    def rel_error(self) -> float:
        return relative_error(self.analytic, self.numeric)


@dataclass
class GradCheckReport:
    samples: list[GradSample] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((s.rel_error for s in self.samples), default=0.0)

    def worst(self, n: int = 5) -> list[GradSample]:
        return sorted(self.samples, key=lambda s: s.rel_error, reverse=True)[:n]

    def passed(self, tol: float) -> bool:
        return self.max_rel_error < tol


def relative_error(a: float, b: float, floor: float = 1e-4) -> float:
    """|a - b| / max(|a|, |b|, floor); the floor keeps near-zero gradients from dominating"""
    return abs(a - b) / max(abs(a), abs(b), floor)


def scalar_projection(outputs: torch.Tensor, seed: int = 0) -> torch.Tensor:
    """Fixed random projection of a tensor to a scalar with O(1) magnitude"""
    gen = torch.Generator().manual_seed(seed)
    weights = torch.randn(outputs.shape, generator=gen, dtype=outputs.dtype)
    return (outputs * weights).sum() / outputs.numel() ** 0.5


def gradient_check(
    fn: Callable[[], torch.Tensor],
    tensors: Mapping[str, torch.Tensor],
    samples_per_tensor: int = 3,
    step: float = 1e-5,
    tol: float = 1e-4,
    min_step: float = 1e-7,
    seed: int = 0,
) -> GradCheckReport:
    """Compare autograd gradients of scalar ``fn()`` with central differences.

    ``tensors`` are float64 leaves read by ``fn``. A sampled entry whose error
    exceeds ``tol`` is re-measured with steps shrunk x10 down to ``min_step``, which
    handles samples straddling a ReLU or max-pool kink.
    """
    names = list(tensors)
    leaves = [tensors[n] for n in names]
    grads = torch.autograd.grad(fn(), leaves, allow_unused=True)

    rng = np.random.default_rng(seed)
    report = GradCheckReport()
    for name, leaf, grad in zip(names, leaves, grads):
        flat_grad = torch.zeros_like(leaf).view(-1) if grad is None else grad.reshape(-1)
        flat = leaf.detach().view(-1)
        picks = rng.choice(flat.numel(), size=min(samples_per_tensor, flat.numel()), replace=False)
        for index in picks:
            index = int(index)
            analytic = float(flat_grad[index])
            h = step
            while True:
                numeric = _central_difference(fn, flat, index, h)
                if relative_error(analytic, numeric) < tol or h / 10 < min_step:
                    break
                h /= 10
            report.samples.append(GradSample(name, index, analytic, numeric, h))

    logger.debug("gradient_check", tensors=len(names), samples=len(report.samples), max_rel_error=report.max_rel_error)
    return report


@torch.no_grad()
def _central_difference(fn: Callable[[], torch.Tensor], flat: torch.Tensor, index: int, h: float) -> float:
    original = float(flat[index])
    flat[index] = original + h
    plus = float(fn())
    flat[index] = original - h
    minus = float(fn())
    flat[index] = original
    return (plus - minus) / (2 * h)
