"""End-to-end experiment orchestration on the synthetic fixture.

Methods:
  deepall       pooled training, no domain alignment
  dann_onehot   adversarial training against true one-hot domain tags
  dann_els      adversarial training against smoothed (ELS) domain tags
  dann_dsp      adversarial training against soft pseudo-domain labels
  scg_only      deepall over the spectrally augmented corpus
  dann_dsp_scg  pseudo-labels and adversarial training over the augmented corpus

Held-out accuracy on the unseen domain is the generalization metric; the
interesting output is the ordering of methods, aggregated over seeds.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import synth, tensorio
from .adain import stylize_corpus
from .classifier import (
    TrainConfig,
    assign_labels,
    els_labels,
    train_domain_classifier,
)
from .dal import GrlConfig, evaluate, train_dal
from .ffs import BaseDomainSet, ffs_select
from .scg import SpectrumBlendConfig, augment_image
from .style import build_filter_bank, conv_features, style_of, styles_to_matrix

METHODS = ("deepall", "dann_onehot", "dann_els", "dann_dsp", "scg_only", "dann_dsp_scg")
ADVERSARIAL_METHODS = ("dann_onehot", "dann_els", "dann_dsp", "dann_dsp_scg")
DSP_METHODS = ("dann_dsp", "dann_dsp_scg")
SCG_METHODS = ("scg_only", "dann_dsp_scg")


@dataclass(frozen=True)
class ExperimentConfig:
    n_domains_train: int = 4
    n_classes: int = 3
    images_per_domain: int = 200
    heldout_images: int = 200
    image_size: int = 32
    k_base: int = 4
    k_base_scg: int = 8  # augmentation multiplies style modes, so more bases
    dsp_iterations: int = 800
    dsp_learning_rate: float = 0.05
    dsp_batch_size: int = 32
    lam: float = 0.7
    method: str = "dann_dsp"
    seed: int = 0
    epochs: int = 40
    learning_rate: float = 0.3
    batch_size: int = 32
    embed_dim: int = 32
    disc_hidden: int = 64
    bank_channels: int = 8
    bank_kernel: int = 3
    bank_seed: int = 7
    scg_per_image: int = 1
    scg_beta: float = 0.15
    scg_alpha: float = 0.35  # 0 means sample per augmentation from the default range
    els_epsilon: float = 0.1
    gain_amplitude: float = synth.DEFAULT_GAIN_AMPLITUDE
    tint_strength: float = synth.DEFAULT_TINT_STRENGTH
    noise_sigma: float = synth.DEFAULT_NOISE_SIGMA

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.n_domains_train < 1:
            raise ValueError("need at least one training domain")
        if self.k_base < 1:
            raise ValueError("k_base must be >= 1")


def label_entropy_report(labels: list[np.ndarray]) -> dict:
    """Mean Shannon entropy and max-probability spread of a label set."""
    if not labels:
        raise ValueError("empty label list")
    mat = np.stack([np.asarray(lbl, dtype=np.float64) for lbl in labels])
    clipped = np.maximum(mat, 1e-300)
    entropies = -(mat * np.log(clipped)).sum(axis=1)
    max_probs = mat.max(axis=1)
    return {
        "count": int(mat.shape[0]),
        "k": int(mat.shape[1]),
        "mean_entropy": float(entropies.mean()),
        "max_prob_mean": float(max_probs.mean()),
        "max_prob_min": float(max_probs.min()),
        "max_prob_max": float(max_probs.max()),
    }


def domain_mean_styles(styles: list, domains: list[int], n_domains: int) -> list:
    """Mean style vector of each true domain, as raw (2C,) rows."""
    mat = styles_to_matrix(styles)
    doms = np.asarray(domains)
    return [mat[doms == d].mean(axis=0) for d in range(n_domains)]


def base_domain_alignment(base: BaseDomainSet, styles: list,
                          domains: list[int], n_domains: int) -> list[int]:
    """Nearest true-domain mean for each selected base style.

    The assignment is a bijection exactly when the returned list is a
    permutation of range(n_domains).
    """
    means = domain_mean_styles(styles, domains, n_domains)
    out = []
    for s in base.styles:
        vec = s.as_vector()
        dists = [float(((vec - m) ** 2).sum()) for m in means]
        out.append(int(np.argmin(dists)))
    return out


class ArtifactCache:
    """Content-addressed stage artifacts: same inputs, same bytes, same file."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def digest(*parts: bytes | str) -> str:
        h = hashlib.sha256()
        for p in parts:
            h.update(p.encode() if isinstance(p, str) else p)
        return h.hexdigest()[:16]

    def get_or_create(self, stage: str, key: str, ext: str, produce) -> bytes:
        path = self.root / f"{stage}-{key}.{ext}"
        if path.exists():
            return path.read_bytes()
        blob = produce()
        path.write_bytes(blob)
        return blob


def _augment_corpus(rows, cfg: ExperimentConfig):
    """Expand (img, class, domain) rows with per-image spectral augmentations."""
    out = list(rows)
    fixed = cfg.scg_alpha > 0.0
    for i, (img, cls, dom) in enumerate(rows):
        blend = SpectrumBlendConfig(alpha=cfg.scg_alpha if fixed else 0.5,
                                    beta=cfg.scg_beta,
                                    seed=cfg.seed * 100003 + i)
        for variant in augment_image(img, blend, n=cfg.scg_per_image, fixed_alpha=fixed):
            out.append((variant, cls, dom))
    return out


def run_single(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> dict:
    """One (method, seed) pipeline run; returns metrics and artifacts."""
    train, heldout = synth.gen_dataset(
        cfg.n_domains_train, cfg.n_classes, cfg.images_per_domain,
        cfg.image_size, cfg.seed, heldout_images=cfg.heldout_images,
        gain_amplitude=cfg.gain_amplitude, tint_strength=cfg.tint_strength,
        noise_sigma=cfg.noise_sigma,
    )
    corpus = _augment_corpus(train, cfg) if cfg.method in SCG_METHODS else train

    bank = build_filter_bank(3, cfg.bank_channels, cfg.bank_kernel, seed=cfg.bank_seed)
    features = [conv_features(img, bank) for img, _, _ in corpus]
    domains = [dom for _, _, dom in corpus]

    cache = ArtifactCache(Path(out_dir) / "cache") if out_dir is not None else None
    result: dict = {"method": cfg.method, "seed": cfg.seed}

    if cfg.method in DSP_METHODS:
        k = cfg.k_base_scg if cfg.method == "dann_dsp_scg" else cfg.k_base
        styles = [style_of(fm) for fm in features]
        styles_bytes = tensorio.tensor_to_bytes(styles_to_matrix(styles))
        start = f"random:{cfg.seed}"
        base = ffs_select(styles, k, start=start)
        dsp_cfg = TrainConfig(iterations=cfg.dsp_iterations,
                              learning_rate=cfg.dsp_learning_rate,
                              batch_size=cfg.dsp_batch_size, seed=cfg.seed)
        stylized = stylize_corpus(features, base)
        clf = train_domain_classifier(stylized, k, dsp_cfg)
        labels = assign_labels(clf, features)
        result["base_indices"] = list(base.indices)
        alignment = base_domain_alignment(base, styles, domains, cfg.n_domains_train)
        result["alignment"] = alignment
        result["alignment_bijection"] = (
            k == cfg.n_domains_train
            and sorted(alignment) == list(range(cfg.n_domains_train))
        )
        if cache is not None:
            styles_key = cache.digest(styles_bytes, f"ffs:{k}:{start}")
            cache.get_or_create("styles", cache.digest(styles_bytes), "dtns",
                                lambda: styles_bytes)
            cache.get_or_create(
                "base", styles_key, "json",
                lambda: json.dumps({"indices": base.indices, "k": base.k},
                                   sort_keys=True).encode() + b"\n",
            )
            labels_key = cache.digest(styles_key, repr(dsp_cfg))
            cache.get_or_create("labels", labels_key, "jsonl",
                                lambda: labels_to_jsonl(labels).encode())
    elif cfg.method == "dann_els":
        labels = [els_labels(dom, cfg.n_domains_train, cfg.els_epsilon)
                  for dom in domains]
        k = cfg.n_domains_train
    else:
        # deepall / scg_only never consume the labels; onehot uses them directly
        labels = [np.eye(cfg.n_domains_train)[dom] for dom in domains]
        k = cfg.n_domains_train

    dataset = [(img, cls, labels[i]) for i, (img, cls, _) in enumerate(corpus)]
    adversarial = cfg.method in ADVERSARIAL_METHODS
    dal_cfg = TrainConfig(iterations=cfg.epochs, learning_rate=cfg.learning_rate,
                          batch_size=cfg.batch_size, seed=cfg.seed)
    model, trace = train_dal(dataset, dal_cfg, GrlConfig(cfg.lam), bank=bank,
                             embed_dim=cfg.embed_dim, disc_hidden=cfg.disc_hidden,
                             heldout=heldout, adversarial=adversarial)
    result["heldout_acc"] = evaluate(model, heldout)
    result["train_acc"] = evaluate(model, dataset)
    result["final_disc_acc"] = trace[-1]["disc_acc"]
    result["k"] = k
    result["trace"] = trace
    result["labels"] = labels
    result["label_report"] = label_entropy_report(labels)
    return result


@dataclass
class MetricsReport:
    config: dict
    methods: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)

    def add(self, method: str, runs: list[dict]) -> None:
        accs = [r["heldout_acc"] for r in runs]
        self.methods[method] = {
            "heldout_acc_mean": float(np.mean(accs)),
            "heldout_acc_std": float(np.std(accs)),
            "heldout_accs": accs,
            "final_disc_accs": [r["final_disc_acc"] for r in runs],
            "mean_label_entropy": float(
                np.mean([r["label_report"]["mean_entropy"] for r in runs])
            ),
        }

    def mean(self, method: str) -> float:
        return self.methods[method]["heldout_acc_mean"]

    def to_json(self) -> str:
        payload = {"config": self.config, "seeds": self.seeds, "methods": self.methods}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def summary_table(self) -> str:
        lines = [f"{'method':<14} {'heldout acc':>12} {'std':>8}"]
        for m, stats in self.methods.items():
            lines.append(
                f"{m:<14} {stats['heldout_acc_mean']:>12.4f} {stats['heldout_acc_std']:>8.4f}"
            )
        return "\n".join(lines)


def trace_to_csv(trace: list[dict]) -> str:
    lines = ["epoch,task_loss,dal_loss,disc_acc,heldout_acc"]
    for row in trace:
        lines.append(
            f"{row['epoch']},{row['task_loss']:.10g},{row['dal_loss']:.10g},"
            f"{row['disc_acc']:.10g},{row['heldout_acc']:.10g}"
        )
    return "\n".join(lines) + "\n"


def labels_to_jsonl(labels: list[np.ndarray]) -> str:
    lines = [
        json.dumps({"index": i, "probs": [float(p) for p in lbl]}, sort_keys=True)
        for i, lbl in enumerate(labels)
    ]
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, methods: list[str] | None = None,
                   seeds: list[int] | None = None,
                   out_dir: str | Path | None = None) -> MetricsReport:
    """Run each method over each seed and aggregate.

    With out_dir set, writes report.json, per-run trace files, the DSP label
    files, and content-addressed stage artifacts under out_dir/cache.
    """
    methods = list(methods) if methods else [cfg.method]
    seeds = list(seeds) if seeds else [cfg.seed]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    report = MetricsReport(config=dataclasses.asdict(cfg), seeds=seeds)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for method in methods:
        runs = []
        for seed in seeds:
            run_cfg = dataclasses.replace(cfg, method=method, seed=seed)
            try:
                result = run_single(run_cfg, out_dir=out)
            except Exception as exc:
                raise RuntimeError(
                    f"stage failure in method={method} seed={seed}: {exc}"
                ) from exc
            runs.append(result)
            if out is not None:
                (out / f"trace_{method}_seed{seed}.csv").write_text(
                    trace_to_csv(result["trace"])
                )
                if method in DSP_METHODS:
                    (out / f"labels_{method}_seed{seed}.jsonl").write_text(
                        labels_to_jsonl(result["labels"])
                    )
        report.add(method, runs)
    if out is not None:
        (out / "report.json").write_text(report.to_json())
    return report
