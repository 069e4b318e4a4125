"""In-context saliency prediction network.

Pipeline: frozen feature pyramid -> heatmap-masked context features ->
ReLU-cosine 4D hypercorrelation (layers of equal spatial size stacked as
channels) -> squeeze blocks (strided 4D convs reducing the context axes to
the coarsest resolution) -> top-down mix blocks (upsample target axes, add,
4D conv stack) -> mean over context axes -> 2D conv/upsample decoder with a
two-channel softmax head, foreground channel max-normalized.

Bilinear interpolation is half-pixel-centered (align_corners=False)
everywhere, both for heatmap masking and target-axis upsampling.
"""

from __future__ import annotations

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from ..config import ConfigurationError, NetConfig
from ..types import DimensionError, HeatmapConfig, PromptSet, SaliencyHeatmap
from .backbone import build_backbone, extract_feature_pyramid
from .conv4d import make_conv4d

COSINE_NORM_FLOOR = 1e-8

# Squeeze-path channel ramp per 4D-conv depth; the last entry is the working
# width of the mix blocks and the decoder input.
SQUEEZE_CHANNELS = {1: [32], 2: [24, 48], 3: [16, 32, 64], 4: [16, 32, 64, 96]}


def _squeeze_channels(depth: int) -> list[int]:
    if depth in SQUEEZE_CHANNELS:
        return list(SQUEEZE_CHANNELS[depth])
    return [16, 32, 64] + [96] * (depth - 3)


def mask_features(features: list[torch.Tensor], heatmap: torch.Tensor) -> list[torch.Tensor]:
    """Multiply every level by the heatmap resized to its size.

    `heatmap` is (B, H, W) at image resolution. Downsampling uses area
    averaging so a sharp peak keeps its mass instead of falling between
    sample points, and each level is re-max-normalized, matching the codec's
    convention that a non-empty saliency map peaks at 1. An all-zero map
    stays zero.
    """
    hm = heatmap.unsqueeze(1)
    out = []
    for feat in features:
        size = feat.shape[-2:]
        if size[0] <= hm.shape[-2] and size[1] <= hm.shape[-1]:
            scaled = F.interpolate(hm, size=size, mode="area")
        else:
            scaled = F.interpolate(hm, size=size, mode="bilinear",
                                   align_corners=False)
        peak = scaled.amax(dim=(2, 3), keepdim=True)
        scaled = scaled / peak.clamp_min(1e-8)
        out.append(feat * scaled)
    return out


def build_hypercorrelation(context_feats: list[torch.Tensor],
                           target_feats: list[torch.Tensor],
                           context_norm_feats: list[torch.Tensor] | None = None,
                           ) -> list[torch.Tensor]:
    """ReLU-clipped cosine similarity volumes, grouped by spatial size.

    Returns one tensor per distinct resolution, coarse to fine, shaped
    (B, L_p, Hc, Wc, Ht, Wt); zero-norm feature vectors yield similarity 0.

    When `context_norm_feats` is given, the context side is normalized by
    those features' norms instead of its own. Passing the unmasked pyramid
    there makes the volume for heatmap-masked context features equal to
    heatmap(p) * cosine(p, q): the saliency weight survives normalization
    rather than cancelling out of the scale-invariant cosine.
    """
    if len(context_feats) != len(target_feats):
        raise DimensionError("context and target pyramids are not level-aligned")
    if context_norm_feats is None:
        context_norm_feats = context_feats
    groups: dict[tuple[int, int], list[torch.Tensor]] = {}
    for fc, ft, fn in zip(context_feats, target_feats, context_norm_feats):
        if fc.shape != ft.shape:
            raise DimensionError("context/target feature shapes differ")
        b, c, h, w = fc.shape
        vc = fc.reshape(b, c, h * w)
        vt = ft.reshape(b, c, h * w)
        nc = fn.reshape(b, c, h * w).norm(dim=1)
        nt = vt.norm(dim=1)
        corr = torch.einsum("bci,bcj->bij", vc, vt)
        denom = nc.unsqueeze(2) * nt.unsqueeze(1)
        valid = (nc.unsqueeze(2) >= COSINE_NORM_FLOOR) & (nt.unsqueeze(1) >= COSINE_NORM_FLOOR)
        corr = torch.where(valid, corr / denom.clamp_min(COSINE_NORM_FLOOR ** 2),
                           torch.zeros_like(corr))
        corr = F.relu(corr).reshape(b, h, w, h, w)
        groups.setdefault((h, w), []).append(corr)
    sizes = sorted(groups, key=lambda s: s[0] * s[1])   # coarse -> fine
    return [torch.stack(groups[s], dim=1) for s in sizes]


def _upsample_target_axes(volume: torch.Tensor, size: tuple[int, int]) -> torch.Tensor:
    """Bilinear resize of the last two (target) axes."""
    b, c, h1, w1, h2, w2 = volume.shape
    flat = volume.reshape(b, c * h1 * w1, h2, w2)
    flat = F.interpolate(flat, size=size, mode="bilinear", align_corners=False)
    return flat.reshape(b, c, h1, w1, *size)


def _context_stride_plan(factor: int, depth: int) -> list[int]:
    """Distribute a power-of-two context reduction across `depth` convs."""
    if factor & (factor - 1):
        raise ConfigurationError(f"context reduction factor {factor} is not a power of two")
    plan = [1] * depth
    i = 0
    while factor > 1:
        plan[min(i, depth - 1)] *= 2
        factor //= 2
        i += 1
    return plan


class ConvBlock4d(nn.Module):
    """conv4d -> group norm -> ReLU, repeated; strides act on the context axes."""

    def __init__(self, in_channels: int, channels: list[int], context_strides: list[int],
                 groups: int, mode: str):
        super().__init__()
        layers = []
        prev = in_channels
        for ch, s in zip(channels, context_strides):
            layers.append(make_conv4d(mode, prev, ch, stride=(s, s, 1, 1)))
            layers.append(nn.GroupNorm(min(groups, ch), ch))
            layers.append(nn.ReLU(inplace=True))
            prev = ch
        self.body = nn.Sequential(*layers)

    def forward(self, x):
        return self.body(x)


class PyramidEncoder(nn.Module):
    """Squeeze each hypercorrelation level, merge top-down, pool over context."""

    def __init__(self, in_channels: list[int], level_sizes: list[tuple[int, int]],
                 config: NetConfig):
        super().__init__()
        depth = config.num_4dconv_layers
        channels = _squeeze_channels(depth)
        self.out_channels = channels[-1]
        coarsest = level_sizes[0][0]
        self.squeeze = nn.ModuleList()
        for inch, (h, _) in zip(in_channels, level_sizes):
            plan = _context_stride_plan(h // coarsest, depth)
            self.squeeze.append(ConvBlock4d(inch, channels, plan,
                                            config.group_norm_groups, config.conv4d_mode))
        self.mix = nn.ModuleList([
            ConvBlock4d(channels[-1], [channels[-1]] * depth, [1] * depth,
                        config.group_norm_groups, config.conv4d_mode)
            for _ in range(len(in_channels) - 1)
        ])

    def forward(self, pyramid: list[torch.Tensor]) -> torch.Tensor:
        squeezed = [blk(vol) for blk, vol in zip(self.squeeze, pyramid)]
        x = squeezed[0]
        for mix, lower in zip(self.mix, squeezed[1:]):
            x = _upsample_target_axes(x, lower.shape[-2:])
            x = mix(x + lower)
        return x.mean(dim=(2, 3))    # pool context axes -> (B, C, Ht, Wt)


class ContextDecoder(nn.Module):
    """2D convs with ReLU and x2 upsampling; two-channel softmax head."""

    def __init__(self, in_channels: int, code_size: int, output_size: int,
                 channels: list[int]):
        super().__init__()
        ratio = output_size // code_size
        n_up = max(int(round(np.log2(ratio))), 0)
        if code_size * 2 ** n_up != output_size:
            raise ConfigurationError(
                f"decoder cannot upsample {code_size} -> {output_size} by doubling")
        widths = [in_channels] + list(channels)
        widths += [widths[-1]] * max(0, n_up - len(channels))
        layers = []
        for i in range(n_up):
            layers.append(nn.Conv2d(widths[i], widths[i + 1], 3, padding=1))
            layers.append(nn.ReLU(inplace=True))
            layers.append(nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False))
        self.body = nn.Sequential(*layers)
        self.head = nn.Conv2d(widths[n_up], 2, 3, padding=1)

    def forward(self, code: torch.Tensor) -> torch.Tensor:
        logits = self.head(self.body(code))
        prob = torch.softmax(logits, dim=1)[:, 0]
        peak = prob.amax(dim=(1, 2), keepdim=True)
        return prob / peak.clamp_min(1e-12)


class CorrelationNet(nn.Module):
    """End-to-end in-context heatmap predictor."""

    def __init__(self, config: NetConfig = NetConfig(), backbone_weights: str | None = None):
        super().__init__()
        self.config = config
        torch.manual_seed(config.init_seed)
        self.backbone = build_backbone(config.backbone_id, backbone_weights)
        taps = self.backbone.taps_per_level           # fine -> coarse
        h, w = config.input_size
        if h != w:
            raise ConfigurationError("input_size must be square")
        with torch.no_grad():
            probe = torch.zeros(1, 3, h, w)
            feats = self.backbone(probe)
        sizes = sorted({tuple(f.shape[-2:]) for f in feats}, key=lambda s: s[0])
        self.level_sizes = sizes                      # coarse -> fine
        in_channels = list(reversed(taps))            # coarse -> fine
        self.encoder = PyramidEncoder(in_channels, sizes, config)
        self.decoder = ContextDecoder(self.encoder.out_channels, sizes[-1][0], h,
                                      config.decoder_channels)

    def trainable_parameters(self):
        return [p for p in self.parameters() if p.requires_grad]

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.trainable_parameters())

    def forward(self, context_image: torch.Tensor, context_heatmap: torch.Tensor,
                target_image: torch.Tensor) -> torch.Tensor:
        """All inputs batched: images (B,3,H,W), heatmap (B,H,W)."""
        ctx = extract_feature_pyramid(context_image, self.backbone, self.config.input_size)
        tgt = extract_feature_pyramid(target_image, self.backbone, self.config.input_size)
        masked = mask_features(ctx, context_heatmap)
        pyramid = build_hypercorrelation(masked, tgt, context_norm_feats=ctx)
        code = self.encoder(pyramid)
        return self.decoder(code)


def image_to_tensor(image: np.ndarray, size: tuple[int, int]) -> torch.Tensor:
    """HWC uint8 (or float in [0,1]) -> (1,3,H,W) float, resized to `size`."""
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        arr = arr.astype(np.float32) / 255.0
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    t = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1))).float().unsqueeze(0)
    if tuple(t.shape[-2:]) != tuple(size):
        t = F.interpolate(t, size=size, mode="bilinear", align_corners=False)
    return t


def predict_heatmap(model: CorrelationNet, context_image: np.ndarray,
                    context_prompts: PromptSet, target_image: np.ndarray,
                    heatmap_config: HeatmapConfig = HeatmapConfig()) -> SaliencyHeatmap:
    """Single-shot prediction from raw arrays and a prompt set."""
    from ..training.episodes import prompts_to_heatmap

    size = model.config.input_size
    context_prompts.require_nonempty()
    # Scale prompt coordinates to net resolution and encode there, so the
    # context map matches what the codec produces during training.
    scaled = prompts_to_heatmap(context_prompts, context_image.shape[:2],
                                size, heatmap_config)
    hm = torch.from_numpy(scaled.grid).float().unsqueeze(0)
    ci = image_to_tensor(context_image, size)
    ti = image_to_tensor(target_image, size)
    model.eval()
    with torch.no_grad():
        pred = model(ci, hm, ti)[0].cpu().numpy().astype(np.float64)
    peak = pred.max()
    if peak > 0:
        pred = pred / peak
    return SaliencyHeatmap(pred)
