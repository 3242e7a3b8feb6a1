"""Soft pseudo-domain labeling: a small dense classifier over style statistics.

The classifier consumes the pooled (mu, sigma) statistics of a feature map,
so it is content-invariant by construction: only style decides the domain.
Trained on the AdaIN-stylized corpus with one-hot base-domain tags, it then
emits a soft probability vector over the K base domains for any image.
All gradients are written out by hand; there is no autograd dependency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tensorio
from .style import DEFAULT_EPS, style_of

PROB_FLOOR = 1e-12
DEFAULT_HIDDEN = 64

# label width of the full-scale pipeline configuration
DEFAULT_BASE_DOMAINS = 128


@dataclass
class TrainConfig:
    iterations: int = 800
    learning_rate: float = 0.05
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


@dataclass
class MlpClassifier:
    """Dense net: affine -> relu -> affine -> softmax, with manual gradients."""

    layers: list[tuple[np.ndarray, np.ndarray]]

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def n_classes(self) -> int:
        return self.layers[-1][0].shape[1]

    def copy(self) -> "MlpClassifier":
        return MlpClassifier([(w.copy(), b.copy()) for w, b in self.layers])


def init_mlp(input_dim: int, hidden: int, n_classes: int, seed: int) -> MlpClassifier:
    """Seeded scaled-normal init; bitwise deterministic per argument tuple."""
    if min(input_dim, hidden, n_classes) < 1:
        raise ValueError("all layer sizes must be >= 1")
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((input_dim, hidden)) * np.sqrt(2.0 / input_dim)
    b1 = np.zeros(hidden)
    w2 = rng.standard_normal((hidden, n_classes)) * np.sqrt(2.0 / hidden)
    b2 = np.zeros(n_classes)
    return MlpClassifier(layers=[(w1, b1), (w2, b2)])


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax (max subtraction)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def check_soft_label(probs: np.ndarray, k: int | None = None,
                     tol: float = 1e-6) -> np.ndarray:
    """Validate the soft-label contract: entries in [0, 1], summing to 1."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("soft label must be a 1-D vector")
    if k is not None and probs.shape[0] != k:
        raise ValueError(f"label has {probs.shape[0]} entries, expected {k}")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("soft label entries must lie in [0, 1]")
    if abs(probs.sum() - 1.0) > tol:
        raise ValueError(f"soft label sums to {probs.sum()}, not 1")
    return probs


def forward_batch(m: MlpClassifier, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Forward pass for an (B, din) batch; cache holds what backward needs."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != m.input_dim:
        raise ValueError(f"expected (B, {m.input_dim}) input, got {x.shape}")
    (w1, b1), (w2, b2) = m.layers
    z1 = x @ w1 + b1
    h1 = np.maximum(z1, 0.0)
    logits = h1 @ w2 + b2
    probs = softmax(logits)
    return probs, {"x": x, "z1": z1, "h1": h1, "probs": probs}


def mlp_forward(m: MlpClassifier, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Single-vector forward pass returning (probs, cache)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("mlp_forward expects a 1-D input vector")
    probs, cache = forward_batch(m, x[None, :])
    return probs[0], cache


def backward_batch(m: MlpClassifier, cache: dict,
                   targets: np.ndarray) -> tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]:
    """Gradients of mean cross-entropy w.r.t. parameters and the input batch.

    targets are soft labels (one-hot is a special case), shape (B, K).
    """
    (w1, _), (w2, _) = m.layers
    x, z1, h1, probs = cache["x"], cache["z1"], cache["h1"], cache["probs"]
    batch = x.shape[0]
    dlogits = (probs - targets) / batch
    dw2 = h1.T @ dlogits
    db2 = dlogits.sum(axis=0)
    dh1 = dlogits @ w2.T
    dz1 = dh1 * (z1 > 0.0)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    dx = dz1 @ w1.T
    return [(dw1, db1), (dw2, db2)], dx


def cross_entropy(probs: np.ndarray, target: np.ndarray) -> float:
    """Soft-target cross-entropy with a probability floor, never non-finite."""
    probs = np.asarray(probs, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if probs.shape != target.shape:
        raise ValueError(f"shape mismatch: {probs.shape} vs {target.shape}")
    return float(-(target * np.log(np.maximum(probs, PROB_FLOOR))).sum(axis=-1).mean())


def els_labels(domain_index: int, k: int, epsilon: float) -> np.ndarray:
    """Smoothed one-hot: 1 - epsilon at the index, epsilon/(k-1) elsewhere."""
    if k < 2:
        raise ValueError("ELS needs k >= 2")
    if not 0 <= domain_index < k:
        raise ValueError(f"domain index {domain_index} out of range for k={k}")
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    probs = np.full(k, epsilon / (k - 1))
    probs[domain_index] = 1.0 - epsilon
    return probs


def stats_matrix(features: list[np.ndarray], eps: float = DEFAULT_EPS) -> np.ndarray:
    """Pooled (mu, sigma) rows for a list of feature maps."""
    if not features:
        raise ValueError("empty feature list")
    return np.stack([style_of(fm, eps).as_vector() for fm in features])


def train_domain_classifier(stylized: list[tuple[np.ndarray, int]], k: int,
                            cfg: TrainConfig, hidden: int = DEFAULT_HIDDEN,
                            eps: float = DEFAULT_EPS) -> MlpClassifier:
    """Fit the domain classifier on the stylized corpus by seeded minibatch SGD.

    Inputs are the pooled statistics of each stylized map; targets the one-hot
    base-domain tags. Deterministic given cfg.seed.
    """
    if not stylized:
        raise ValueError("empty stylized corpus")
    tags = np.array([tag for _, tag in stylized])
    if tags.min() < 0 or tags.max() >= k:
        raise ValueError("domain tag out of range")
    present = np.unique(tags)
    if len(present) != k:
        missing = sorted(set(range(k)) - set(present.tolist()))
        raise ValueError(f"no samples for domain(s) {missing}")

    x = stats_matrix([fm for fm, _ in stylized], eps)
    targets = np.eye(k)[tags]
    rng = np.random.default_rng(cfg.seed)
    model = init_mlp(x.shape[1], hidden, k, seed=cfg.seed)
    n = x.shape[0]
    for _ in range(cfg.iterations):
        idx = rng.integers(0, n, size=cfg.batch_size)
        _, cache = forward_batch(model, x[idx])
        grads, _ = backward_batch(model, cache, targets[idx])
        sgd_step(model, grads, cfg.learning_rate)
    return model


def sgd_step(model: MlpClassifier, grads, lr: float) -> None:
    for (w, b), (dw, db) in zip(model.layers, grads):
        w -= lr * dw
        b -= lr * db


def assign_labels(model: MlpClassifier, features: list[np.ndarray],
                  eps: float = DEFAULT_EPS) -> list[np.ndarray]:
    """Soft pseudo-domain label for each feature map; no argmax is taken."""
    x = stats_matrix(features, eps)
    probs, _ = forward_batch(model, x)
    return [check_soft_label(row) for row in probs]


def save_classifier(path: str | Path, model: MlpClassifier, meta: dict | None = None) -> None:
    """Model file: one JSON header line, then DTNS records (w, b per layer)."""
    sizes = [model.input_dim] + [w.shape[1] for w, _ in model.layers]
    header = {"layer_sizes": sizes}
    header.update(meta or {})
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    for w, b in model.layers:
        blob += tensorio.tensor_to_bytes(w) + tensorio.tensor_to_bytes(b)
    Path(path).write_bytes(blob)


def load_classifier(path: str | Path) -> tuple[MlpClassifier, dict]:
    buf = Path(path).read_bytes()
    nl = buf.index(b"\n")
    meta = json.loads(buf[:nl].decode())
    offset = nl + 1
    layers = []
    while offset < len(buf):
        w, offset = tensorio.tensor_from_bytes(buf, offset)
        b, offset = tensorio.tensor_from_bytes(buf, offset)
        layers.append((w, b))
    return MlpClassifier(layers=layers), meta
