"""Numpy implementations of the hot kernels.

These are the reference semantics; the compiled core in ``_core.pyx`` must
produce the same values up to floating-point summation order.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND = "numpy"


def conv2d_bank(img, kernels, stride):
    """Valid (no padding) strided cross-correlation of one image with a bank.

    Args:
        img: (Cin, H, W) float64 array.
        kernels: (Cout, Cin, k, k) float64 array.
        stride: positive int.

    Returns:
        (Cout, Ho, Wo) float64 array with Ho = (H - k) // stride + 1.
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    kernels = np.ascontiguousarray(kernels, dtype=np.float64)
    k = kernels.shape[2]
    windows = sliding_window_view(img, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    # windows: (Cin, Ho, Wo, k, k); contract Cin and both kernel axes
    return np.einsum("chwij,ocij->ohw", windows, kernels, optimize=True)


def channel_stats(fm, eps):
    """Per-channel spatial mean and eps-stabilized standard deviation.

    Population variance (divide by H*W); sigma = sqrt(var + eps) so constant
    channels map to sqrt(eps) rather than zero.
    """
    fm = np.asarray(fm, dtype=np.float64)
    c = fm.shape[0]
    flat = fm.reshape(c, -1)
    mu = flat.mean(axis=1)
    var = flat.var(axis=1)
    return mu, np.sqrt(var + eps)
