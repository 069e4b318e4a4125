"""Training objective: KLD + (1 - Pearson CC) + NSS over saliency heatmaps.

All statistics use the population convention. The KLD term operates on the
max-normalized maps exactly as given (no sum-normalization); a config switch
exposes the sum-normalized variant for experimentation but defaults off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import torch

from .types import DimensionError, SaliencyHeatmap, SamicError

EPS = 1e-6


class DegenerateVarianceError(SamicError, ValueError):
    """A constant map reached the correlation loss."""


class NoFixationError(SamicError, ValueError):
    """The ground-truth map yields an empty fixation set."""


class LossConfigurationError(SamicError, ValueError):
    """No loss component is enabled."""


def _as_tensor(x) -> torch.Tensor:
    if isinstance(x, SaliencyHeatmap):
        x = x.grid
    if isinstance(x, torch.Tensor):
        return x
    return torch.as_tensor(np.asarray(x, dtype=np.float64))


def _check_shapes(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"loss inputs differ in shape: {tuple(a.shape)} vs {tuple(b.shape)}")


def fixation_map(gt) -> torch.Tensor:
    """Binarize the ground-truth map at 0.5."""
    g = _as_tensor(gt)
    return (g >= 0.5).to(g.dtype)


def kld_loss(gt, pred, sum_normalize: bool = False) -> torch.Tensor:
    g, p = _as_tensor(gt), _as_tensor(pred)
    _check_shapes(g, p)
    if sum_normalize:
        g = g / (g.sum() + EPS)
        p = p / (p.sum() + EPS)
    return (g * torch.log(EPS + g / (p + EPS))).sum()


def cc_loss(gt, pred) -> torch.Tensor:
    g, p = _as_tensor(gt), _as_tensor(pred)
    _check_shapes(g, p)
    gc = g - g.mean()
    pc = p - p.mean()
    var_g = (gc * gc).mean()
    var_p = (pc * pc).mean()
    if float(var_g.detach()) < 1e-12 or float(var_p.detach()) < 1e-12:
        raise DegenerateVarianceError("correlation undefined on a constant map")
    cov = (gc * pc).mean()
    return 1.0 - cov / torch.sqrt(var_g * var_p)


def nss_loss(pred, gt) -> torch.Tensor:
    p, g = _as_tensor(pred), _as_tensor(gt)
    _check_shapes(g, p)
    fix = (g >= 0.5).to(g.dtype)
    n = fix.sum()
    if float(n) < 1:
        raise NoFixationError("ground truth has no fixation pixels")
    zg = (g - g.mean()) / (torch.sqrt(((g - g.mean()) ** 2).mean()) + EPS)
    zp = (p - p.mean()) / (torch.sqrt(((p - p.mean()) ** 2).mean()) + EPS)
    return ((zg - zp) * fix).sum() / n


@dataclass(frozen=True)
class LossFlags:
    kld: bool = True
    cc: bool = True
    nss: bool = True
    kld_sum_normalize: bool = False

    def __post_init__(self):
        if not (self.kld or self.cc or self.nss):
            raise LossConfigurationError("at least one loss component must be enabled")


@dataclass
class LossBreakdown:
    kld: float = 0.0
    cc: float = 0.0
    nss: float = 0.0
    total: float = 0.0
    flags: LossFlags = field(default_factory=LossFlags)

    def to_json(self, **extra) -> str:
        record = {"kld": self.kld, "cc": self.cc, "nss": self.nss, "total": self.total}
        record.update(extra)
        return json.dumps(record)


def total_loss(gt, pred, flags: LossFlags = LossFlags()) -> tuple[torch.Tensor, LossBreakdown]:
    """Sum of the enabled components; returns the differentiable total and a
    float breakdown for logging."""
    terms = {}
    if flags.kld:
        terms["kld"] = kld_loss(gt, pred, sum_normalize=flags.kld_sum_normalize)
    if flags.cc:
        terms["cc"] = cc_loss(gt, pred)
    if flags.nss:
        terms["nss"] = nss_loss(pred, gt)
    total = sum(terms.values())
    logged = {k: float(v.detach()) for k, v in terms.items()}
    breakdown = LossBreakdown(
        kld=logged.get("kld", 0.0),
        cc=logged.get("cc", 0.0),
        nss=logged.get("nss", 0.0),
        total=float(total.detach()),
        flags=flags,
    )
    return total, breakdown
