"""Synthetic multi-domain shape dataset.

Class signal is geometry (disk / horizontal bars / vertical bars, invariant
across domains); domain signal is photometry (per-channel color cast, gamma,
brightness, a fixed smooth tint field per domain, pixel noise). Training
casts sit at equally spaced hue angles; the held-out domain takes an
in-between angle with an amplified cast, so it is never a training style.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scg import idct2, reference_spectrum

DEFAULT_GAIN_AMPLITUDE = 0.50
DEFAULT_TINT_STRENGTH = 0.22
DEFAULT_NOISE_SIGMA = 0.04


@dataclass(frozen=True)
class SyntheticDomainSpec:
    """Photometric recipe of a domain: what makes its images look alike."""

    gains: tuple[float, float, float]
    brightness: float
    gamma: float
    noise_sigma: float
    tint_seed: int
    tint_strength: float

    def __post_init__(self):
        if min(self.gains) <= 0:
            raise ValueError("gains must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


def domain_spec(index: int, n_domains_train: int,
                gain_amplitude: float = DEFAULT_GAIN_AMPLITUDE,
                tint_strength: float = DEFAULT_TINT_STRENGTH,
                noise_sigma: float = DEFAULT_NOISE_SIGMA,
                outlier: bool = False) -> SyntheticDomainSpec:
    """Deterministic spec for domain ``index``.

    Training domains sit at equally spaced hue angles, maximizing their
    mutual style separation. The held-out domain (index n, outlier=True)
    falls between two training angles with an amplified cast, so its style
    differs from every training domain without leaving the task solvable.
    """
    if outlier:
        angle = 2.0 * np.pi * 0.5 / n_domains_train
        amp = gain_amplitude * 1.35
    else:
        angle = 2.0 * np.pi * index / n_domains_train
        amp = gain_amplitude
    gains = tuple(
        1.0 + amp * np.cos(angle + phase)
        for phase in (0.0, 2.0 * np.pi / 3.0, 4.0 * np.pi / 3.0)
    )
    brightness = 0.12 * np.sin(1.7 * index + 0.5)
    gamma = float(np.exp(0.40 * np.sin(2.3 * index + 1.1)))
    return SyntheticDomainSpec(
        gains=gains,
        brightness=float(brightness),
        gamma=gamma,
        noise_sigma=noise_sigma,
        tint_seed=9000 + index,
        tint_strength=tint_strength,
    )


def _tint_field(spec: SyntheticDomainSpec, size: int) -> np.ndarray:
    """Fixed smooth per-domain field in [-0.5, 0.5], one channel each."""
    field = np.empty((size, size, 3))
    for ch in range(3):
        spectrum = reference_spectrum(size, size, seed=spec.tint_seed * 3 + ch, beta=0.2)
        raw = idct2(spectrum)
        lo, hi = raw.min(), raw.max()
        field[:, :, ch] = (raw - lo) / (hi - lo) - 0.5 if hi > lo else 0.0
    return field


def render_shape(class_id: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Grayscale base image: one of three shape classes with jittered geometry.

    Classes are chosen to separate in oriented-filter energy (the signal the
    pooled statistics can see): a filled disk, horizontal bars, vertical bars.
    """
    if class_id not in (0, 1, 2):
        raise ValueError(f"class_id must be 0, 1 or 2, got {class_id}")
    bg = rng.uniform(0.28, 0.36)
    fg = rng.uniform(0.74, 0.86)
    cy, cx = rng.uniform(0.42, 0.58, size=2) * size
    r = rng.uniform(0.26, 0.32) * size
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    extent = np.maximum(np.abs(yy - cy), np.abs(xx - cx)) <= r
    if class_id == 0:
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r ** 2
    else:
        period = rng.uniform(3.5, 5.0)
        phase = rng.uniform(0.0, period)
        axis = yy if class_id == 1 else xx
        stripes = ((axis + phase) % period) < 0.5 * period
        mask = extent & stripes
    img = np.full((size, size), bg)
    img[mask] = fg
    return img


def apply_domain(base: np.ndarray, spec: SyntheticDomainSpec,
                 rng: np.random.Generator, tint: np.ndarray | None = None) -> np.ndarray:
    """Push a grayscale base image through the domain's photometric transform."""
    size = base.shape[0]
    if tint is None:
        tint = _tint_field(spec, size)
    rgb = np.repeat(base[:, :, None], 3, axis=2)
    rgb = rgb * np.asarray(spec.gains)[None, None, :]
    rgb += spec.brightness
    rgb += spec.tint_strength * tint
    rgb = np.clip(rgb, 0.0, 1.0) ** spec.gamma
    rgb += rng.normal(0.0, spec.noise_sigma, size=rgb.shape)
    return np.clip(rgb, 0.0, 1.0)


def gen_domain_images(spec: SyntheticDomainSpec, n_images: int, n_classes: int,
                      size: int, seed: int) -> list[tuple[np.ndarray, int]]:
    """n_images (image, class) pairs under one domain, classes balanced."""
    if n_classes < 1 or n_classes > 3:
        raise ValueError("n_classes must be in [1, 3]")
    rng = np.random.default_rng(seed)
    tint = _tint_field(spec, size)
    out = []
    for i in range(n_images):
        cls = i % n_classes
        base = render_shape(cls, size, rng)
        out.append((apply_domain(base, spec, rng, tint=tint), cls))
    return out


def gen_dataset(n_domains_train: int, n_classes: int, images_per_domain: int,
                size: int, seed: int, heldout_images: int | None = None,
                gain_amplitude: float = DEFAULT_GAIN_AMPLITUDE,
                tint_strength: float = DEFAULT_TINT_STRENGTH,
                noise_sigma: float = DEFAULT_NOISE_SIGMA):
    """Training split over n_domains_train domains plus one unseen-domain split.

    Returns (train, heldout) where rows are (image, class, true domain index);
    the held-out rows carry domain index n_domains_train. Fully seeded.
    """
    if n_domains_train < 1:
        raise ValueError("need at least one training domain")
    if images_per_domain < n_classes:
        raise ValueError("images_per_domain must cover every class")
    heldout_images = images_per_domain if heldout_images is None else heldout_images
    train = []
    for d in range(n_domains_train):
        spec = domain_spec(d, n_domains_train, gain_amplitude, tint_strength,
                           noise_sigma)
        for img, cls in gen_domain_images(spec, images_per_domain, n_classes,
                                          size, seed=seed * 1000 + d):
            train.append((img, cls, d))
    held_spec = domain_spec(n_domains_train, n_domains_train, gain_amplitude,
                            tint_strength, noise_sigma, outlier=True)
    heldout = [
        (img, cls, n_domains_train)
        for img, cls in gen_domain_images(held_spec, heldout_images, n_classes,
                                          size, seed=seed * 1000 + n_domains_train)
    ]
    return train, heldout
