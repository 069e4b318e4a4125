"""Dense 4D convolution against an independent nested-loop reference."""

import numpy as np
import pytest
import torch

from samic.config import ConfigurationError
from samic.net.conv4d import CenterPivotConv4d, Conv4d, make_conv4d


def conv4d_reference(x, weight, bias, stride):
    """Nested-loop 4D cross-correlation with same padding, ceil-mode output.

    Written from the definition, independent of the vectorized implementation.
    """
    x = x.detach().numpy()
    weight = weight.detach().numpy()
    b, c, n1, n2, n3, n4 = x.shape
    o_ch = weight.shape[0]
    ks = weight.shape[2:]
    outs = [-(-n // s) for n, s in zip((n1, n2, n3, n4), stride)]
    pads = []
    for n, k, s, o in zip((n1, n2, n3, n4), ks, stride, outs):
        total = max((o - 1) * s + k - n, 0)
        pads.append(total // 2)
    out = np.zeros((b, o_ch, *outs))
    for bi in range(b):
        for oc in range(o_ch):
            for p1 in range(outs[0]):
                for p2 in range(outs[1]):
                    for p3 in range(outs[2]):
                        for p4 in range(outs[3]):
                            acc = 0.0
                            for ci in range(c):
                                for i1 in range(ks[0]):
                                    for i2 in range(ks[1]):
                                        for i3 in range(ks[2]):
                                            for i4 in range(ks[3]):
                                                j1 = p1 * stride[0] + i1 - pads[0]
                                                j2 = p2 * stride[1] + i2 - pads[1]
                                                j3 = p3 * stride[2] + i3 - pads[2]
                                                j4 = p4 * stride[3] + i4 - pads[3]
                                                if 0 <= j1 < n1 and 0 <= j2 < n2 \
                                                        and 0 <= j3 < n3 and 0 <= j4 < n4:
                                                    acc += x[bi, ci, j1, j2, j3, j4] * \
                                                        weight[oc, ci, i1, i2, i3, i4]
                            out[bi, oc, p1, p2, p3, p4] = acc
            if bias is not None:
                out[bi, oc] += float(bias[oc])
    return out


@pytest.mark.parametrize("case", [
    dict(c=1, sizes=(3, 3, 3, 3), k=(3, 3, 3, 3), s=(1, 1, 1, 1)),
    dict(c=2, sizes=(4, 4, 4, 4), k=(3, 3, 3, 3), s=(2, 2, 1, 1)),
    dict(c=2, sizes=(4, 3, 2, 4), k=(3, 3, 1, 1), s=(1, 1, 1, 1)),
    dict(c=1, sizes=(2, 2, 4, 4), k=(1, 1, 3, 3), s=(1, 1, 2, 2)),
])
def test_dense_matches_reference(case, rng):
    torch.manual_seed(0)
    conv = Conv4d(case["c"], 2, kernel_size=case["k"], stride=case["s"])
    x = torch.tensor(rng.normal(size=(2, case["c"], *case["sizes"])),
                     dtype=torch.float32)
    got = conv(x).detach().numpy()
    want = conv4d_reference(x, conv.weight, conv.bias, case["s"])
    np.testing.assert_allclose(got, want, rtol=1e-4, atol=1e-5)


def test_dense_reference_fuzz(rng):
    for _ in range(20):
        c = int(rng.integers(1, 3))
        sizes = tuple(int(v) for v in rng.integers(1, 5, size=4))
        stride = tuple(int(v) for v in rng.choice([1, 2], size=4))
        conv = Conv4d(c, int(rng.integers(1, 3)), stride=stride)
        x = torch.tensor(rng.normal(size=(1, c, *sizes)), dtype=torch.float32)
        got = conv(x).detach().numpy()
        want = conv4d_reference(x, conv.weight, conv.bias, stride)
        np.testing.assert_allclose(got, want, rtol=1e-4, atol=1e-5)


def test_output_sizes_are_ceil():
    conv = Conv4d(1, 1, stride=(2, 2, 2, 2))
    out = conv(torch.zeros(1, 1, 5, 4, 3, 7))
    assert tuple(out.shape[2:]) == (3, 2, 2, 4)


def test_even_kernel_rejected():
    with pytest.raises(ConfigurationError):
        Conv4d(1, 1, kernel_size=(2, 3, 3, 3))
    with pytest.raises(ConfigurationError):
        CenterPivotConv4d(1, 1, kernel_size=(3, 3, 4, 3))


def test_center_pivot_shapes_match_dense():
    for stride in [(1, 1, 1, 1), (2, 2, 1, 1)]:
        dense = Conv4d(2, 3, stride=stride)
        pivot = CenterPivotConv4d(2, 3, stride=stride)
        x = torch.randn(1, 2, 6, 6, 5, 5)
        assert pivot(x).shape == dense(x).shape


def test_factory_selects_mode():
    assert isinstance(make_conv4d("dense", 1, 1), Conv4d)
    assert isinstance(make_conv4d("center_pivot", 1, 1), CenterPivotConv4d)
