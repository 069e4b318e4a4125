"""Frozen convolutional backbones producing the three-level feature pyramid.

Features are taken at the end of each stage block before its final ReLU.
Backbones are always frozen: parameters never receive gradients and the
module runs in eval mode.

`tiny` is a compact fixed-seed random convnet with stage strides {8, 16, 32};
it is the default for desk-scale runs where pretrained weights are
unavailable. `resnet50` builds the torchvision architecture and collects the
pre-ReLU bottleneck outputs of its last three stages; pass `weights_path` to
load pretrained weights.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..config import ConfigurationError
from ..types import DimensionError


class TinyBackbone(nn.Module):
    """Three stages at strides 8/16/32, two tapped blocks per stage."""

    stage_channels = (48, 64, 96)
    taps_per_level = (2, 2, 2)   # fine -> coarse

    def __init__(self, seed: int = 7):
        super().__init__()
        gen = torch.Generator().manual_seed(seed)
        self.stem = nn.Sequential(
            nn.Conv2d(3, 32, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
            nn.Conv2d(32, 32, 3, stride=2, padding=1),
            nn.ReLU(inplace=True),
        )
        chans = [32, *self.stage_channels]
        self.blocks = nn.ModuleList()
        for i in range(3):
            self.blocks.append(nn.Conv2d(chans[i], chans[i + 1], 3, stride=2, padding=1))
            self.blocks.append(nn.Conv2d(chans[i + 1], chans[i + 1], 3, stride=1, padding=1))
        for m in self.modules():
            if isinstance(m, nn.Conv2d):
                nn.init.kaiming_normal_(m.weight, generator=gen)
                nn.init.zeros_(m.bias)
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    def forward(self, x):
        feats = []
        x = self.stem(x)
        for i, block in enumerate(self.blocks):
            x = block(x)
            feats.append(x)          # pre-ReLU tap
            x = F.relu(x)
        return feats                 # fine -> coarse, two per level

    def train(self, mode: bool = True):  # stays frozen
        return super().train(False)


class ResNet50Backbone(nn.Module):
    """torchvision ResNet-50; taps the pre-ReLU output of every bottleneck in
    the last three stages (4 + 6 + 3 taps)."""

    taps_per_level = (4, 6, 3)

    def __init__(self, weights_path: str | None = None):
        super().__init__()
        from torchvision.models import resnet50

        net = resnet50(weights=None)
        if weights_path:
            net.load_state_dict(torch.load(weights_path, map_location="cpu"))
        self.stem = nn.Sequential(net.conv1, net.bn1, net.relu, net.maxpool, net.layer1)
        self.stages = nn.ModuleList([net.layer2, net.layer3, net.layer4])
        for p in self.parameters():
            p.requires_grad_(False)
        self.eval()

    @staticmethod
    def _bottleneck_pre_relu(block, x):
        out = block.conv1(x)
        out = block.bn1(out)
        out = block.relu(out)
        out = block.conv2(out)
        out = block.bn2(out)
        out = block.relu(out)
        out = block.conv3(out)
        out = block.bn3(out)
        identity = block.downsample(x) if block.downsample is not None else x
        return out + identity

    def forward(self, x):
        feats = []
        x = self.stem(x)
        for stage in self.stages:
            for block in stage:
                pre = self._bottleneck_pre_relu(block, x)
                feats.append(pre)
                x = F.relu(pre)
        return feats

    def train(self, mode: bool = True):
        return super().train(False)


def build_backbone(backbone_id: str, weights_path: str | None = None) -> nn.Module:
    if backbone_id == "tiny":
        return TinyBackbone()
    if backbone_id == "resnet50":
        return ResNet50Backbone(weights_path)
    raise ConfigurationError(f"unknown backbone_id {backbone_id!r}")


def extract_feature_pyramid(image: torch.Tensor, backbone: nn.Module,
                            input_size: tuple[int, int]) -> list[torch.Tensor]:
    """Run the frozen backbone; returns the tapped maps, fine to coarse."""
    if image.ndim != 4 or image.shape[1] != 3:
        raise DimensionError(f"expected (B,3,H,W) image batch, got {tuple(image.shape)}")
    if tuple(image.shape[-2:]) != tuple(input_size):
        raise DimensionError(
            f"image size {tuple(image.shape[-2:])} does not match configured {input_size}")
    with torch.no_grad():
        return backbone(image)
