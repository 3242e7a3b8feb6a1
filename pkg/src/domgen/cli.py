"""Command line interface.

Subcommands mirror the pipeline stages: extract, ffs, stylize, train-dsp,
assign-labels, train-dal, scg-augment, experiment. Every command is
deterministic: rerunning with identical arguments reproduces identical
output bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import harness, tensorio
from .adain import stylize_corpus
from .classifier import (
    DEFAULT_BASE_DOMAINS,
    TrainConfig,
    assign_labels,
    load_classifier,
    save_classifier,
    train_domain_classifier,
)
from .dal import GrlConfig, save_dal_model, train_dal
from .ffs import BaseDomainSet, ffs_select_with_state
from .scg import SpectrumBlendConfig, augment_image
from .style import (
    build_filter_bank,
    conv_features,
    style_of,
    styles_from_matrix,
    styles_to_matrix,
)


def _json_dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def cmd_extract(args) -> int:
    bank = build_filter_bank(args.cin, args.cout, args.kernel, seed=args.bank_seed,
                             stride=args.stride)
    paths = sorted(Path(args.images).glob("*.png"))
    if not paths:
        raise SystemExit(f"no PNG files under {args.images}")
    maps = [conv_features(tensorio.read_png(p), bank) for p in paths]
    if args.features:
        tensorio.write_tensor_stack(args.features, maps)
    if args.styles:
        styles = [style_of(fm) for fm in maps]
        tensorio.write_tensor(args.styles, styles_to_matrix(styles))
    _json_dump(Path(args.manifest), {"images": [p.name for p in paths]})
    return 0


def cmd_ffs(args) -> int:
    styles = styles_from_matrix(tensorio.read_tensor(args.styles))
    start = args.start if args.start.startswith("random:") else int(args.start)
    base, state = ffs_select_with_state(styles, args.k, start)
    payload = {
        "indices": base.indices,
        "k": base.k,
        "min_dist_trace": state.max_dist_trace,
    }
    _json_dump(Path(args.out), payload)
    return 0


def _load_base(base_json: str, styles) -> BaseDomainSet:
    meta = json.loads(Path(base_json).read_text())
    indices = [int(i) for i in meta["indices"]]
    return BaseDomainSet(indices=indices, styles=[styles[i] for i in indices],
                         k=len(indices))


def cmd_stylize(args) -> int:
    features = tensorio.read_tensor_stack(args.features)
    styles = [style_of(fm) for fm in features]
    base = _load_base(args.base, styles)
    stylized = stylize_corpus(features, base)
    tensorio.write_tensor_stack(args.out, [fm for fm, _ in stylized])
    _json_dump(Path(args.tags), {"tags": [tag for _, tag in stylized]})
    return 0


def cmd_train_dsp(args) -> int:
    features = tensorio.read_tensor_stack(args.stylized)
    tags = json.loads(Path(args.tags).read_text())["tags"]
    if len(tags) != len(features):
        raise SystemExit("tags and stylized stack disagree in length")
    cfg = TrainConfig(iterations=args.iters, learning_rate=args.lr,
                      batch_size=args.batch, seed=args.seed)
    model = train_domain_classifier(list(zip(features, tags)), args.k, cfg)
    save_classifier(args.out, model,
                    meta={"k": args.k, "seed": args.seed, "iterations": args.iters})
    return 0


def cmd_assign_labels(args) -> int:
    model, _ = load_classifier(args.model)
    features = tensorio.read_tensor_stack(args.features)
    labels = assign_labels(model, features)
    Path(args.out).write_text(harness.labels_to_jsonl(labels))
    return 0


def _read_labels_jsonl(path: str) -> list[np.ndarray]:
    labels = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        labels[int(row["index"])] = np.asarray(row["probs"], dtype=np.float64)
    return [labels[i] for i in range(len(labels))]


def cmd_train_dal(args) -> int:
    manifest = json.loads(Path(args.data).read_text())
    root = Path(args.data).parent
    labels = _read_labels_jsonl(args.labels)

    def load_rows(entries, lbls):
        return [
            (tensorio.read_png(root / e["png"]), int(e["label"]),
             lbls[i] if lbls is not None else None)
            for i, e in enumerate(entries)
        ]

    train_rows = load_rows(manifest["train"], labels)
    if len(labels) != len(train_rows):
        raise SystemExit("labels.jsonl and manifest train split disagree in length")
    heldout_rows = load_rows(manifest.get("heldout", []), None) or None

    cfg = TrainConfig(iterations=args.epochs, learning_rate=args.lr,
                      batch_size=args.batch, seed=args.seed)
    model, trace = train_dal(train_rows, cfg, GrlConfig(args.lam),
                             heldout=heldout_rows,
                             n_classes=manifest.get("n_classes"))
    save_dal_model(args.out, model, meta={"seed": args.seed, "lambda": args.lam,
                                          "epochs": args.epochs})
    Path(args.trace).write_text(harness.trace_to_csv(trace))
    return 0


def cmd_scg_augment(args) -> int:
    in_dir, out_dir = Path(args.in_dir), Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = sorted(in_dir.glob("*.png"))
    if not paths:
        raise SystemExit(f"no PNG files under {in_dir}")
    fixed_alpha = args.alpha != "random"
    alpha = float(args.alpha) if fixed_alpha else 0.5
    for i, path in enumerate(paths):
        img = tensorio.read_png(path)
        cfg = SpectrumBlendConfig(alpha=alpha, beta=args.beta,
                                  seed=args.seed * 100003 + i)
        variants = augment_image(img, cfg, n=args.per_image, fixed_alpha=fixed_alpha)
        for j, variant in enumerate(variants):
            tensorio.write_png(out_dir / f"{path.stem}_scg{j}.png", variant)
    return 0


def _parse_config_file(path: str) -> dict:
    """Flat key = value file; '#' starts a comment, lists are comma-separated."""
    values: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"bad config line: {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip().strip('"')
        if key in ("methods", "seeds"):
            items = [v.strip() for v in val.split(",") if v.strip()]
            values[key] = [int(v) for v in items] if key == "seeds" else items
            continue
        for cast in (int, float):
            try:
                values[key] = cast(val)
                break
            except ValueError:
                continue
        else:
            values[key] = val
    return values


def cmd_experiment(args) -> int:
    values = _parse_config_file(args.config)
    methods = values.pop("methods", None)
    seeds = values.pop("seeds", None)
    valid = {f.name for f in dataclasses.fields(harness.ExperimentConfig)}
    unknown = set(values) - valid
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    cfg = harness.ExperimentConfig(**values)
    report = harness.run_experiment(cfg, methods=methods, seeds=seeds,
                                    out_dir=args.out)
    print(report.summary_table())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="domgen",
                                     description="pseudo-domain labeling and "
                                                 "domain-adversarial training pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="filter-bank features and style statistics from PNGs")
    p.add_argument("--images", required=True, help="directory of PNG images")
    p.add_argument("--features", help="output DTNS stack of feature maps")
    p.add_argument("--styles", help="output DTNS style matrix (N x 2C)")
    p.add_argument("--manifest", required=True, help="output JSON listing image order")
    p.add_argument("--cin", type=int, default=3)
    p.add_argument("--cout", type=int, default=8)
    p.add_argument("--kernel", type=int, default=3)
    p.add_argument("--stride", type=int, default=2)
    p.add_argument("--bank-seed", type=int, default=7)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("ffs", help="select base domains by farthest feature sampling")
    p.add_argument("--styles", required=True, help="DTNS style matrix")
    p.add_argument("--k", type=int, default=DEFAULT_BASE_DOMAINS)
    p.add_argument("--start", default="random:0", help="corpus index or random:SEED")
    p.add_argument("--out", required=True, help="output JSON")
    p.set_defaults(func=cmd_ffs)

    p = sub.add_parser("stylize", help="render every feature map in every base style")
    p.add_argument("--features", required=True, help="DTNS stack of feature maps")
    p.add_argument("--base", required=True, help="JSON from the ffs command")
    p.add_argument("--out", required=True, help="output DTNS stack")
    p.add_argument("--tags", required=True, help="output JSON with domain tags")
    p.set_defaults(func=cmd_stylize)

    p = sub.add_parser("train-dsp", help="train the soft domain-label classifier")
    p.add_argument("--stylized", required=True, help="DTNS stack from stylize")
    p.add_argument("--tags", required=True, help="tags JSON from stylize")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--iters", type=int, default=800)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output model file")
    p.set_defaults(func=cmd_train_dsp)

    p = sub.add_parser("assign-labels", help="soft pseudo-domain labels for features")
    p.add_argument("--model", required=True, help="model file from train-dsp")
    p.add_argument("--features", required=True, help="DTNS stack of feature maps")
    p.add_argument("--out", required=True, help="output labels.jsonl")
    p.set_defaults(func=cmd_assign_labels)

    p = sub.add_parser("train-dal", help="domain-adversarial training on a manifest")
    p.add_argument("--data", required=True, help="manifest.json with train/heldout splits")
    p.add_argument("--labels", required=True, help="labels.jsonl for the train split")
    p.add_argument("--lambda", dest="lam", type=float, default=0.7)
    p.add_argument("--epochs", type=int, default=40)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--batch", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--trace", required=True, help="output trace.csv")
    p.set_defaults(func=cmd_train_dal)

    p = sub.add_parser("scg-augment", help="low-frequency spectral augmentation of PNGs")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--per-image", type=int, default=1)
    p.add_argument("--alpha", default="random", help="blend weight or 'random'")
    p.add_argument("--beta", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_scg_augment)

    p = sub.add_parser("experiment", help="synthetic-benchmark experiment matrix")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
