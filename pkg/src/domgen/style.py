"""Style features: a fixed seeded filter bank and per-channel statistics.

Images are (H, W, C) float arrays in [0, 1]; feature maps are (C, H, W).
The per-channel (mean, std) pair of shallow convolutional features is the
style vector used everywhere downstream: base-domain selection, AdaIN, and
the domain classifier all operate on these statistics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_EPS = 1e-5
DEFAULT_STRIDE = 2


def validate_image(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3:
        raise ValueError(f"image must be (H, W, C), got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("image values must lie in [0, 1]")
    return img


@dataclass(frozen=True)
class FilterBank:
    """Fixed convolution bank standing in for a pretrained shallow extractor.

    kernels: (Cout, Cin, k, k); each kernel is mean-centered and scaled to
    unit Frobenius norm, so constant inputs map to zero feature maps.
    """

    kernels: np.ndarray
    stride: int
    seed: int

    @property
    def cin(self) -> int:
        return self.kernels.shape[1]

    @property
    def cout(self) -> int:
        return self.kernels.shape[0]

    @property
    def kernel_size(self) -> int:
        return self.kernels.shape[2]


@dataclass(frozen=True)
class StyleVector:
    """Per-channel mean and standard deviation of a feature map."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if mu.shape != sigma.shape or mu.ndim != 1:
            raise ValueError("mu and sigma must be 1-D and equal length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sigma))):
            raise ValueError("style vector must be finite")
        if np.any(sigma < 0):
            raise ValueError("sigma must be nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def channels(self) -> int:
        return self.mu.shape[0]

    def as_vector(self) -> np.ndarray:
        """Concatenated (mu, sigma), the classifier input representation."""
        return np.concatenate([self.mu, self.sigma])


def build_filter_bank(cin: int, cout: int, kernel_size: int, seed: int,
                      stride: int = DEFAULT_STRIDE) -> FilterBank:
    """Draw a seeded uniform bank, then mean-center and unit-normalize each kernel.

    Deterministic: identical arguments give bitwise-identical banks.
    """
    if cout < 1 or cin < 1:
        raise ValueError("cin and cout must be >= 1")
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise ValueError("kernel_size must be odd and >= 1")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if cin * kernel_size * kernel_size < 2:
        # a single-tap kernel cannot be both zero-mean and unit-norm
        raise ValueError("kernel needs at least 2 taps (cin * k * k >= 2)")
    rng = np.random.default_rng(seed)
    w = rng.uniform(-1.0, 1.0, size=(cout, cin, kernel_size, kernel_size))
    w -= w.mean(axis=(1, 2, 3), keepdims=True)
    norms = np.sqrt((w ** 2).sum(axis=(1, 2, 3), keepdims=True))
    if np.any(norms == 0.0):
        raise ValueError("degenerate kernel draw (zero norm)")
    w /= norms
    w.setflags(write=False)
    return FilterBank(kernels=w, stride=stride, seed=seed)


def conv_features(img: np.ndarray, bank: FilterBank) -> np.ndarray:
    """Apply the bank as a valid (no padding) strided cross-correlation.

    Returns a (Cout, Ho, Wo) feature map with Ho = (H - k) // stride + 1.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 3:
        raise ValueError(f"image must be (H, W, C), got shape {img.shape}")
    h, w, c = img.shape
    if c != bank.cin:
        raise ValueError(f"image has {c} channels, bank expects {bank.cin}")
    k = bank.kernel_size
    if h < k or w < k:
        raise ValueError(f"image {h}x{w} smaller than kernel {k}x{k}")
    chw = np.ascontiguousarray(img.transpose(2, 0, 1))
    return kernels.conv2d_bank(chw, bank.kernels, bank.stride)


def style_of(fm: np.ndarray, eps: float = DEFAULT_EPS) -> StyleVector:
    """Per-channel spatial mean and sqrt(population variance + eps)."""
    fm = np.asarray(fm, dtype=np.float64)
    if fm.ndim != 3 or fm.size == 0:
        raise ValueError("feature map must be a nonempty (C, H, W) array")
    mu, sigma = kernels.channel_stats(fm, eps)
    return StyleVector(mu=mu, sigma=sigma)


def style_distance(a: StyleVector, b: StyleVector) -> float:
    """Squared Euclidean distance over the concatenated (mu, sigma) vectors."""
    if a.channels != b.channels:
        raise ValueError(f"channel mismatch: {a.channels} vs {b.channels}")
    dmu = a.mu - b.mu
    dsig = a.sigma - b.sigma
    return float(dmu @ dmu + dsig @ dsig)


def styles_to_matrix(styles: list[StyleVector]) -> np.ndarray:
    """Stack style vectors into the (N, 2C) row layout used by DTNS files."""
    if not styles:
        raise ValueError("empty style list")
    c = styles[0].channels
    if any(s.channels != c for s in styles):
        raise ValueError("inconsistent channel counts")
    return np.stack([s.as_vector() for s in styles])


def styles_from_matrix(mat: np.ndarray) -> list[StyleVector]:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] % 2 != 0:
        raise ValueError("style matrix must be (N, 2C)")
    c = mat.shape[1] // 2
    return [StyleVector(mu=row[:c], sigma=row[c:]) for row in mat]
