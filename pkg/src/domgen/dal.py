"""Domain-adversarial training on a toy classification task.

The backbone is a fixed filter bank followed by pooled statistics and one
trainable dense layer; a linear-softmax task head sits on the embedding and
a small dense discriminator sees the embedding through a gradient-reversal
layer. One optimizer pass per batch updates everything jointly: the
discriminator descends its cross-entropy against the soft pseudo-domain
labels while the backbone receives that gradient scaled by -lambda, which
pushes the embedding toward domain invariance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tensorio
from .classifier import (
    DEFAULT_HIDDEN,
    MlpClassifier,
    TrainConfig,
    backward_batch,
    cross_entropy,
    forward_batch,
    init_mlp,
    softmax,
)
from .style import DEFAULT_EPS, FilterBank, build_filter_bank, conv_features, style_of

DEFAULT_LAMBDA = 0.7
DEFAULT_EMBED_DIM = 16


@dataclass(frozen=True)
class GrlConfig:
    """Gradient-reversal coefficient; 0 disables the adversarial signal."""

    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")


def grl_forward(x: np.ndarray, lam: float) -> np.ndarray:
    """Identity forward pass."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return np.asarray(x, dtype=np.float64).copy()


def grl_backward(grad: np.ndarray, lam: float) -> np.ndarray:
    """Reverse pass: incoming gradient scaled by exactly -lambda."""
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return -lam * np.asarray(grad, dtype=np.float64)


def dal_loss(discriminator_probs: np.ndarray, pseudo: np.ndarray) -> float:
    """Soft-target cross-entropy between discriminator output and pseudo label."""
    return cross_entropy(discriminator_probs, pseudo)


@dataclass
class DalBatchLoss:
    task_loss: float
    dal_loss: float
    total: float = field(init=False)

    def __post_init__(self):
        self.total = self.task_loss + self.dal_loss


def pooled_stats(images: list[np.ndarray], bank: FilterBank,
                 eps: float = DEFAULT_EPS) -> np.ndarray:
    """Raw pooled style statistics for each image, shape (N, 2C)."""
    return np.stack([
        style_of(conv_features(img, bank), eps).as_vector() for img in images
    ])


@dataclass
class DalModel:
    """Toy backbone + task head + domain discriminator.

    feat_mean/feat_scale standardize the pooled statistics (fit on the
    training split) before the trainable dense layer.
    """

    bank: FilterBank
    embed_w: np.ndarray  # (2C, F)
    embed_b: np.ndarray  # (F,)
    task_w: np.ndarray   # (F, n_classes)
    task_b: np.ndarray
    disc: MlpClassifier  # F -> hidden -> K
    feat_mean: np.ndarray
    feat_scale: np.ndarray
    eps: float = DEFAULT_EPS

    @property
    def embed_dim(self) -> int:
        return self.embed_w.shape[1]

    def features(self, images: list[np.ndarray]) -> np.ndarray:
        """Standardized pooled statistics, the trainable layers' input."""
        return (pooled_stats(images, self.bank, self.eps) - self.feat_mean) / self.feat_scale

    def embed(self, stats: np.ndarray) -> np.ndarray:
        return np.maximum(stats @ self.embed_w + self.embed_b, 0.0)

    def task_probs(self, stats: np.ndarray) -> np.ndarray:
        return softmax(self.embed(stats) @ self.task_w + self.task_b)


def init_dal_model(stats_dim: int, n_classes: int, k: int, seed: int,
                   bank: FilterBank | None = None,
                   embed_dim: int = DEFAULT_EMBED_DIM,
                   disc_hidden: int = DEFAULT_HIDDEN,
                   eps: float = DEFAULT_EPS) -> DalModel:
    """Seeded model construction; the bank defaults to one derived from seed."""
    if bank is None:
        bank = build_filter_bank(3, 8, 3, seed=seed)
    rng = np.random.default_rng(seed)
    embed_w = rng.standard_normal((stats_dim, embed_dim)) * np.sqrt(2.0 / stats_dim)
    embed_b = np.zeros(embed_dim)
    task_w = rng.standard_normal((embed_dim, n_classes)) * np.sqrt(2.0 / embed_dim)
    task_b = np.zeros(n_classes)
    disc = init_mlp(embed_dim, disc_hidden, k, seed=seed + 1)
    return DalModel(bank=bank, embed_w=embed_w, embed_b=embed_b,
                    task_w=task_w, task_b=task_b, disc=disc,
                    feat_mean=np.zeros(stats_dim), feat_scale=np.ones(stats_dim),
                    eps=eps)


def dal_step_grads(model: DalModel, stats: np.ndarray, class_onehot: np.ndarray,
                   pseudo: np.ndarray, lam: float) -> tuple[DalBatchLoss, dict]:
    """Losses and the applied gradients for one batch.

    The discriminator gradient descends its own cross-entropy; the gradient
    it sends back into the embedding passes through grl_backward, so the
    backbone ascends the adversarial term while everything else descends.
    """
    batch = stats.shape[0]
    z_e = stats @ model.embed_w + model.embed_b
    e = np.maximum(z_e, 0.0)

    task_logits = e @ model.task_w + model.task_b
    task_probs = softmax(task_logits)
    task = cross_entropy(task_probs, class_onehot)

    e_r = grl_forward(e, lam)
    disc_probs, disc_cache = forward_batch(model.disc, e_r)
    dal = cross_entropy(disc_probs, pseudo)

    # task head
    dlogits = (task_probs - class_onehot) / batch
    d_task_w = e.T @ dlogits
    d_task_b = dlogits.sum(axis=0)
    de_task = dlogits @ model.task_w.T

    # discriminator (descends dal); embedding receives the reversed gradient
    disc_grads, de_disc = backward_batch(model.disc, disc_cache, pseudo)
    de = de_task + grl_backward(de_disc, lam)

    dz_e = de * (z_e > 0.0)
    d_embed_w = stats.T @ dz_e
    d_embed_b = dz_e.sum(axis=0)

    grads = {
        "embed_w": d_embed_w, "embed_b": d_embed_b,
        "task_w": d_task_w, "task_b": d_task_b,
        "disc": disc_grads,
    }
    return DalBatchLoss(task_loss=task, dal_loss=dal), grads


def _apply_grads(model: DalModel, grads: dict, lr: float) -> None:
    model.embed_w -= lr * grads["embed_w"]
    model.embed_b -= lr * grads["embed_b"]
    model.task_w -= lr * grads["task_w"]
    model.task_b -= lr * grads["task_b"]
    for (w, b), (dw, db) in zip(model.disc.layers, grads["disc"]):
        w -= lr * dw
        b -= lr * db


def _check_dataset(dataset) -> tuple[list[np.ndarray], np.ndarray, np.ndarray, int]:
    if not dataset:
        raise ValueError("empty dataset")
    images = [img for img, _, _ in dataset]
    classes = np.array([int(c) for _, c, _ in dataset])
    labels = [np.asarray(lbl, dtype=np.float64) for _, _, lbl in dataset]
    k = labels[0].shape[0]
    if any(lbl.shape != (k,) for lbl in labels):
        raise ValueError("pseudo labels must share one K")
    return images, classes, np.stack(labels), k


def train_dal(dataset, cfg: TrainConfig, grl: GrlConfig,
              n_classes: int | None = None,
              bank: FilterBank | None = None,
              embed_dim: int = DEFAULT_EMBED_DIM,
              disc_hidden: int = DEFAULT_HIDDEN,
              heldout=None,
              adversarial: bool = True) -> tuple[DalModel, list[dict]]:
    """Adversarial training loop; cfg.iterations counts epochs.

    dataset rows are (image, class label, pseudo domain label). With
    adversarial=False the discriminator branch is never evaluated, which
    (bitwise) matches a lam=0 run on the task side. Deterministic per seed.
    """
    images, classes, pseudo, k = _check_dataset(dataset)
    if n_classes is None:
        n_classes = int(classes.max()) + 1
    if bank is None:
        bank = build_filter_bank(images[0].shape[2], 8, 3, seed=cfg.seed)
    model = init_dal_model(2 * bank.cout, n_classes, k, seed=cfg.seed,
                           bank=bank, embed_dim=embed_dim, disc_hidden=disc_hidden)
    raw = pooled_stats(images, bank, model.eps)
    model.feat_mean = raw.mean(axis=0)
    model.feat_scale = np.maximum(raw.std(axis=0), 1e-8)
    stats = (raw - model.feat_mean) / model.feat_scale
    onehot = np.eye(n_classes)[classes]
    heldout_stats = heldout_classes = None
    if heldout:
        heldout_stats = model.features([img for img, _, _ in heldout])
        heldout_classes = np.array([int(c) for _, c, _ in heldout])

    rng = np.random.default_rng(cfg.seed)
    n = stats.shape[0]
    trace = []
    for epoch in range(cfg.iterations):
        perm = rng.permutation(n)
        task_sum, dal_sum, steps = 0.0, 0.0, 0
        for lo in range(0, n, cfg.batch_size):
            idx = perm[lo:lo + cfg.batch_size]
            if adversarial:
                losses, grads = dal_step_grads(model, stats[idx], onehot[idx],
                                               pseudo[idx], grl.lam)
                dal_sum += losses.dal_loss
            else:
                losses, grads = _task_only_grads(model, stats[idx], onehot[idx])
            _apply_grads(model, grads, cfg.learning_rate)
            task_sum += losses.task_loss
            steps += 1
        row = {
            "epoch": epoch,
            "task_loss": task_sum / steps,
            "dal_loss": dal_sum / steps if adversarial else float("nan"),
            "disc_acc": _disc_accuracy(model, stats, pseudo) if adversarial else float("nan"),
        }
        if heldout_stats is not None:
            row["heldout_acc"] = float(
                (model.task_probs(heldout_stats).argmax(axis=1) == heldout_classes).mean()
            )
        else:
            row["heldout_acc"] = float("nan")
        trace.append(row)
    return model, trace


def _task_only_grads(model: DalModel, stats: np.ndarray,
                     class_onehot: np.ndarray) -> tuple[DalBatchLoss, dict]:
    """Task branch alone; the discriminator is left untouched."""
    batch = stats.shape[0]
    z_e = stats @ model.embed_w + model.embed_b
    e = np.maximum(z_e, 0.0)
    task_probs = softmax(e @ model.task_w + model.task_b)
    task = cross_entropy(task_probs, class_onehot)
    dlogits = (task_probs - class_onehot) / batch
    de = dlogits @ model.task_w.T
    dz_e = de * (z_e > 0.0)
    grads = {
        "embed_w": stats.T @ dz_e, "embed_b": dz_e.sum(axis=0),
        "task_w": e.T @ dlogits, "task_b": dlogits.sum(axis=0),
        "disc": [(np.zeros_like(w), np.zeros_like(b)) for w, b in model.disc.layers],
    }
    return DalBatchLoss(task_loss=task, dal_loss=0.0), grads


def _disc_accuracy(model: DalModel, stats: np.ndarray, pseudo: np.ndarray) -> float:
    e = model.embed(stats)
    probs, _ = forward_batch(model.disc, e)
    return float((probs.argmax(axis=1) == pseudo.argmax(axis=1)).mean())


def evaluate(model: DalModel, dataset) -> float:
    """Fraction of correct argmax class predictions."""
    if not dataset:
        raise ValueError("empty dataset")
    images = [row[0] for row in dataset]
    classes = np.array([int(row[1]) for row in dataset])
    preds = model.task_probs(model.features(images)).argmax(axis=1)
    return float((preds == classes).mean())


def discriminator_accuracy(model: DalModel, dataset) -> float:
    images, _, pseudo, _ = _check_dataset(dataset)
    return _disc_accuracy(model, model.features(images), pseudo)


def save_dal_model(out_dir: str | Path, model: DalModel, meta: dict | None = None) -> None:
    """Model directory: config.json plus DTNS tensors for every parameter."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = {
        "bank": {"cin": model.bank.cin, "cout": model.bank.cout,
                 "kernel_size": model.bank.kernel_size,
                 "stride": model.bank.stride, "seed": model.bank.seed},
        "eps": model.eps,
    }
    header.update(meta or {})
    (out / "config.json").write_text(json.dumps(header, sort_keys=True, indent=2) + "\n")
    tensorio.write_tensor(out / "embed_w.dtns", model.embed_w)
    tensorio.write_tensor(out / "embed_b.dtns", model.embed_b)
    tensorio.write_tensor(out / "task_w.dtns", model.task_w)
    tensorio.write_tensor(out / "task_b.dtns", model.task_b)
    tensorio.write_tensor_stack(out / "feat_norm.dtns", [model.feat_mean, model.feat_scale])
    tensorio.write_tensor_stack(
        out / "disc.dtns", [t for w, b in model.disc.layers for t in (w, b)]
    )


def load_dal_model(model_dir: str | Path) -> tuple[DalModel, dict]:
    d = Path(model_dir)
    header = json.loads((d / "config.json").read_text())
    bank_cfg = header["bank"]
    bank = build_filter_bank(bank_cfg["cin"], bank_cfg["cout"],
                             bank_cfg["kernel_size"], bank_cfg["seed"],
                             stride=bank_cfg["stride"])
    flat = tensorio.read_tensor_stack(d / "disc.dtns")
    disc = MlpClassifier(layers=[(flat[i], flat[i + 1]) for i in range(0, len(flat), 2)])
    feat_mean, feat_scale = tensorio.read_tensor_stack(d / "feat_norm.dtns")
    model = DalModel(
        bank=bank,
        embed_w=tensorio.read_tensor(d / "embed_w.dtns"),
        embed_b=tensorio.read_tensor(d / "embed_b.dtns"),
        task_w=tensorio.read_tensor(d / "task_w.dtns"),
        task_b=tensorio.read_tensor(d / "task_b.dtns"),
        disc=disc,
        feat_mean=feat_mean,
        feat_scale=feat_scale,
        eps=float(header["eps"]),
    )
    return model, header
