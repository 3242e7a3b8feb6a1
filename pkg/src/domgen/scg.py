"""Frequency-domain style augmentation.

Blends only the low-frequency DCT coefficients of an image with those of a
(usually randomly generated) reference, leaving every high-frequency
coefficient untouched, so new styles appear while fine detail survives.
The 2-D transform is the orthonormal type-II DCT applied separably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .style import validate_image


@dataclass(frozen=True)
class SpectrumBlendConfig:
    """alpha: blend weight; beta: low-frequency cutoff fraction; seed: rng."""

    alpha: float = 0.5
    beta: float = 0.15
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")


# uniform alpha range used when the CLI samples alpha per augmentation
RANDOM_ALPHA_RANGE = (0.3, 1.0)


def _dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis: rows are frequencies, columns samples."""
    k = np.arange(n)[:, None]
    m = np.cos(np.pi * (2 * np.arange(n)[None, :] + 1) * k / (2 * n))
    m[0] *= np.sqrt(1.0 / n)
    m[1:] *= np.sqrt(2.0 / n)
    return m


def dct2(channel: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D DCT of an H x W matrix (rows then columns)."""
    channel = np.asarray(channel, dtype=np.float64)
    if channel.ndim != 2 or channel.size == 0:
        raise ValueError("dct2 expects a nonempty 2-D matrix")
    h, w = channel.shape
    return _dct_matrix(h) @ channel @ _dct_matrix(w).T


def idct2(coeffs: np.ndarray) -> np.ndarray:
    """Exact inverse of dct2 (the basis is orthonormal)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.size == 0:
        raise ValueError("idct2 expects a nonempty 2-D matrix")
    h, w = coeffs.shape
    return _dct_matrix(h).T @ coeffs @ _dct_matrix(w)


def low_freq_mask(h: int, w: int, beta: float) -> np.ndarray:
    """Triangular low-frequency region of the coefficient grid.

    A coefficient (u, v) is low-frequency when its normalized diagonal
    position (u/h + v/w) / 2 falls below beta, so beta = 1 covers the whole
    spectrum and small beta keeps only the corner around the DC term.
    """
    if h < 1 or w < 1:
        raise ValueError("empty mask")
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    u = np.arange(h)[:, None] / h
    v = np.arange(w)[None, :] / w
    return (u + v) / 2.0 < beta


def blend_spectra(img_coeffs: np.ndarray, ref_coeffs: np.ndarray,
                  alpha: float, mask: np.ndarray) -> np.ndarray:
    """Convex blend inside the mask; outside, the image coefficients are
    copied bit-for-bit."""
    out = img_coeffs.copy()
    out[mask] = (1.0 - alpha) * img_coeffs[mask] + alpha * ref_coeffs[mask]
    return out


def scg_star_blend(img: np.ndarray, reference: np.ndarray,
                   cfg: SpectrumBlendConfig) -> np.ndarray:
    """Low-frequency spectral blend of img toward reference, clamped to [0, 1]."""
    img = validate_image(img)
    reference = validate_image(reference)
    if img.shape != reference.shape:
        raise ValueError(f"shape mismatch: {img.shape} vs {reference.shape}")
    h, w, c = img.shape
    mask = low_freq_mask(h, w, cfg.beta)
    out = np.empty_like(img)
    for ch in range(c):
        blended = blend_spectra(dct2(img[:, :, ch]), dct2(reference[:, :, ch]),
                                cfg.alpha, mask)
        out[:, :, ch] = idct2(blended)
    return np.clip(out, 0.0, 1.0)


def reference_spectrum(h: int, w: int, seed: int, beta: float) -> np.ndarray:
    """Seeded random coefficients inside the low-frequency region, zeros outside."""
    mask = low_freq_mask(h, w, beta)
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((h, w))
    coeffs[mask] = rng.standard_normal(int(mask.sum()))
    return coeffs


def random_reference(h: int, w: int, c: int, seed: int,
                     beta: float = 0.15) -> np.ndarray:
    """Smooth random field: low-frequency spectrum, inverted, min-max to [0, 1]."""
    if h < 1 or w < 1 or c < 1:
        raise ValueError("dimensions must be positive")
    out = np.empty((h, w, c))
    for ch in range(c):
        fieldv = idct2(reference_spectrum(h, w, seed + ch, beta))
        lo, hi = fieldv.min(), fieldv.max()
        if hi - lo < 1e-30:
            out[:, :, ch] = 0.5
        else:
            out[:, :, ch] = (fieldv - lo) / (hi - lo)
    return out


def augment_image(img: np.ndarray, cfg: SpectrumBlendConfig,
                  n: int = 1, fixed_alpha: bool = True) -> list[np.ndarray]:
    """n augmented variants of img, deterministic in cfg.seed.

    With fixed_alpha=False, alpha is drawn uniformly from RANDOM_ALPHA_RANGE
    per variant; the reference field is regenerated per variant either way.
    """
    img = validate_image(img)
    h, w, c = img.shape
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(n):
        ref_seed = int(rng.integers(0, 2**31 - 1))
        alpha = cfg.alpha if fixed_alpha else float(rng.uniform(*RANDOM_ALPHA_RANGE))
        ref = random_reference(h, w, c, seed=ref_seed, beta=cfg.beta)
        variant_cfg = SpectrumBlendConfig(alpha=alpha, beta=cfg.beta, seed=ref_seed)
        out.append(scg_star_blend(img, ref, variant_cfg))
    return out
