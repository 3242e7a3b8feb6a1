"""Adaptive instance normalization on feature maps and raw pixels.

Renormalizes each channel of a content feature map to a target style's
(mean, std): out = sigma_t * (x - mu_x) / sigma_x + mu_t. With the shared
eps inside sigma, transferring a map to its own style is an exact fixpoint.
"""

from __future__ import annotations

import numpy as np

from .style import DEFAULT_EPS, StyleVector, style_of, validate_image


def adain_transfer(content: np.ndarray, target: StyleVector,
                   eps: float = DEFAULT_EPS) -> np.ndarray:
    """Shift a (C, H, W) feature map onto the target per-channel statistics."""
    content = np.asarray(content, dtype=np.float64)
    if content.ndim != 3:
        raise ValueError(f"feature map must be (C, H, W), got {content.shape}")
    if content.shape[0] != target.channels:
        raise ValueError(
            f"channel mismatch: map has {content.shape[0]}, style has {target.channels}"
        )
    own = style_of(content, eps)
    scale = (target.sigma / own.sigma)[:, None, None]
    return scale * (content - own.mu[:, None, None]) + target.mu[:, None, None]


def stylize_corpus(features: list[np.ndarray], base,
                   eps: float = DEFAULT_EPS) -> list[tuple[np.ndarray, int]]:
    """Render every feature map in every base-domain style.

    Returns N*K (map, domain index) pairs in i-major, k-minor order: the
    training corpus for the domain classifier.
    """
    if not features:
        raise ValueError("empty feature list")
    if base.k < 1:
        raise ValueError("empty base domain set")
    out = []
    for fm in features:
        for k_idx, target in enumerate(base.styles):
            out.append((adain_transfer(fm, target, eps), k_idx))
    return out


def pixel_adain(img: np.ndarray, style_img: np.ndarray,
                eps: float = DEFAULT_EPS) -> np.ndarray:
    """Pixel-space statistic transfer for visual inspection, clamped to [0, 1]."""
    img = validate_image(img)
    style_img = validate_image(style_img)
    if img.shape[2] != style_img.shape[2]:
        raise ValueError(
            f"channel mismatch: {img.shape[2]} vs {style_img.shape[2]}"
        )
    content = np.ascontiguousarray(img.transpose(2, 0, 1))
    target = style_of(np.ascontiguousarray(style_img.transpose(2, 0, 1)), eps)
    moved = adain_transfer(content, target, eps)
    return np.clip(moved.transpose(1, 2, 0), 0.0, 1.0)
