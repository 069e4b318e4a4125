"""4D convolution over volumes shaped (B, C, H1, W1, H2, W2).

The first spatial pair indexes context positions, the last pair target
positions. `Conv4d` is the direct dense cross-correlation (same padding,
output = ceil(input/stride) per axis). `CenterPivotConv4d` is the factorized
variant: one 2D conv over each spatial pair, evaluated at the kernel center
of the other pair, summed. The factorized variant is an approximation of the
dense one and only the dense path claims exactness against the nested-loop
reference.
"""

from __future__ import annotations

import torch
import torch.nn as nn
import torch.nn.functional as F

from ..config import ConfigurationError


def _out_sizes(sizes, strides):
    return [-(-n // s) for n, s in zip(sizes, strides)]


def _same_pad(n, k, s):
    out = -(-n // s)
    total = max((out - 1) * s + k - n, 0)
    return total // 2, total - total // 2


def _check_kernel(kernel_size):
    if any(k % 2 == 0 for k in kernel_size):
        raise ConfigurationError(f"4D kernel extents must be odd, got {kernel_size}")


class Conv4d(nn.Module):
    """Dense multi-channel 4D cross-correlation."""

    def __init__(self, in_channels, out_channels, kernel_size=(3, 3, 3, 3),
                 stride=(1, 1, 1, 1), bias=True):
        super().__init__()
        _check_kernel(kernel_size)
        self.kernel_size = tuple(kernel_size)
        self.stride = tuple(stride)
        self.weight = nn.Parameter(torch.empty(out_channels, in_channels, *kernel_size))
        self.bias = nn.Parameter(torch.zeros(out_channels)) if bias else None
        fan_in = in_channels * int(torch.tensor(kernel_size).prod())
        nn.init.normal_(self.weight, std=fan_in ** -0.5)

    def forward(self, x):
        b, c, *sizes = x.shape
        k1, k2, k3, k4 = self.kernel_size
        s1, s2, s3, s4 = self.stride
        o1, o2, o3, o4 = _out_sizes(sizes, self.stride)
        pads = [_same_pad(n, k, s) for n, k, s in
                zip(sizes, self.kernel_size, self.stride)]
        # F.pad wants (last-dim before/after, ..., first-dim before/after)
        flat = [v for pair in reversed(pads) for v in pair]
        x = F.pad(x, flat)
        h2p, w2p = x.shape[-2], x.shape[-1]
        out_ch = self.weight.shape[0]
        acc = None
        for i1 in range(k1):
            for i2 in range(k2):
                sl = x[:, :,
                       i1: i1 + (o1 - 1) * s1 + 1: s1,
                       i2: i2 + (o2 - 1) * s2 + 1: s2]
                t = sl.permute(0, 2, 3, 1, 4, 5).reshape(b * o1 * o2, c, h2p, w2p)
                y = F.conv2d(t, self.weight[:, :, i1, i2], stride=(s3, s4))
                acc = y if acc is None else acc + y
        out = acc.view(b, o1, o2, out_ch, o3, o4).permute(0, 3, 1, 2, 4, 5)
        if self.bias is not None:
            out = out + self.bias.view(1, -1, 1, 1, 1, 1)
        return out.contiguous()


class CenterPivotConv4d(nn.Module):
    """Factorized 4D convolution: two 2D convs pivoting on the kernel center."""

    def __init__(self, in_channels, out_channels, kernel_size=(3, 3, 3, 3),
                 stride=(1, 1, 1, 1), bias=True):
        super().__init__()
        _check_kernel(kernel_size)
        self.stride = tuple(stride)
        k1, k2, k3, k4 = kernel_size
        self.conv_ctx = nn.Conv2d(in_channels, out_channels, (k1, k2),
                                  stride=self.stride[:2],
                                  padding=(k1 // 2, k2 // 2), bias=bias)
        self.conv_tgt = nn.Conv2d(in_channels, out_channels, (k3, k4),
                                  stride=self.stride[2:],
                                  padding=(k3 // 2, k4 // 2), bias=False)

    @staticmethod
    def _subsample(x, dims, strides):
        for d, s in zip(dims, strides):
            if s > 1:
                idx = torch.arange(0, x.shape[d], s, device=x.device)
                x = x.index_select(d, idx)
        return x

    def forward(self, x):
        b, c, h1, w1, h2, w2 = x.shape

        # Context-pair conv at target-pair kernel centers.
        xt = self._subsample(x, (4, 5), self.stride[2:])
        o3, o4 = xt.shape[-2], xt.shape[-1]
        t = xt.permute(0, 4, 5, 1, 2, 3).reshape(b * o3 * o4, c, h1, w1)
        y1 = self.conv_ctx(t)
        oc, o1, o2 = y1.shape[1:]
        y1 = y1.view(b, o3, o4, oc, o1, o2).permute(0, 3, 4, 5, 1, 2)

        # Target-pair conv at context-pair kernel centers.
        xc = self._subsample(x, (2, 3), self.stride[:2])
        t = xc.permute(0, 2, 3, 1, 4, 5).reshape(b * o1 * o2, c, h2, w2)
        y2 = self.conv_tgt(t)
        y2 = y2.view(b, o1, o2, oc, o3, o4).permute(0, 3, 1, 2, 4, 5)
        return (y1 + y2).contiguous()


def make_conv4d(mode, in_channels, out_channels, kernel_size=(3, 3, 3, 3),
                stride=(1, 1, 1, 1), bias=True):
    cls = Conv4d if mode == "dense" else CenterPivotConv4d
    return cls(in_channels, out_channels, kernel_size, stride, bias=bias)
