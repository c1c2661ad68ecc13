"""Extractor CLI: train encoders, export FVEC files, perturb images.

Subcommands: train-classifier, train-autoencoder, extract, perturb.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .dataset import load_dataset
from .fvec import write_fvec, write_labels
from .models import EncoderSpec
from .perturb import perturb_images
from .train import extract_features, load_artifact, save_artifact, train_autoencoder, train_classifier


def _cmd_train_classifier(args) -> dict:
    data = load_dataset(seed=args.split_seed)
    spec = EncoderSpec("classifier", args.feature_dim, args.epochs, args.seed)
    model, acc = train_classifier(
        data.train_images, data.train_labels, data.test_images, data.test_labels, spec
    )
    save_artifact(model, spec, args.out)
    return {
        "command": "train-classifier",
        "model": str(args.out),
        "test_accuracy": acc,
        "feature_dim": spec.feature_dim,
        "epochs": spec.epochs,
        "seed": spec.seed,
    }


def _cmd_train_autoencoder(args) -> dict:
    data = load_dataset(seed=args.split_seed)
    spec = EncoderSpec("autoencoder", args.feature_dim, args.epochs, args.seed)
    model, losses = train_autoencoder(data.train_images, spec)
    save_artifact(model, spec, args.out)
    return {
        "command": "train-autoencoder",
        "model": str(args.out),
        "final_loss": losses[-1],
        "epoch_losses": losses,
        "feature_dim": spec.feature_dim,
        "epochs": spec.epochs,
        "seed": spec.seed,
    }


def _load_images(args) -> tuple[np.ndarray, np.ndarray | None]:
    if args.images:
        return np.load(args.images), None
    data = load_dataset(seed=args.split_seed)
    return data.split(args.split)


def _cmd_extract(args) -> dict:
    model, kind = load_artifact(args.model)
    images, labels = _load_images(args)
    features, probs = extract_features(model, images)
    write_fvec(features, args.out_features)
    doc = {
        "command": "extract",
        "kind": kind,
        "n_samples": int(features.shape[0]),
        "feature_dim": int(features.shape[1]),
        "features": str(args.out_features),
    }
    if args.out_probs:
        if probs is None:
            raise ValueError("autoencoder artifacts produce no probabilities")
        write_fvec(probs, args.out_probs)
        doc["probabilities"] = str(args.out_probs)
    if args.out_labels:
        if labels is None:
            raise ValueError("--out-labels requires a dataset split, not --images")
        write_labels(labels, args.out_labels)
        doc["labels"] = str(args.out_labels)
    return doc


def _cmd_perturb(args) -> dict:
    images, _ = _load_images(args)
    out = perturb_images(images, args.kind, args.seed)
    np.save(args.out, out)
    return {
        "command": "perturb",
        "kind": args.kind,
        "seed": args.seed,
        "n_images": int(out.shape[0]),
        "images": str(args.out),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extractor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_split_seed(p):
        p.add_argument("--split-seed", type=int, default=0, help="train/test split seed")

    p = sub.add_parser("train-classifier", help="train the 2-conv digit classifier")
    p.add_argument("--out", required=True, help="artifact path (.pt)")
    p.add_argument("--feature-dim", type=int, default=1024)
    p.add_argument("--epochs", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    add_split_seed(p)
    p.set_defaults(func=_cmd_train_classifier)

    p = sub.add_parser("train-autoencoder", help="train the conv autoencoder")
    p.add_argument("--out", required=True, help="artifact path (.pt)")
    p.add_argument("--feature-dim", type=int, default=1024)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    add_split_seed(p)
    p.set_defaults(func=_cmd_train_autoencoder)

    p = sub.add_parser("extract", help="export features (and posteriors) as FVEC")
    p.add_argument("--model", required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--images", default=None, help=".npy image batch instead of a split")
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-probs", default=None)
    p.add_argument("--out-labels", default=None)
    add_split_seed(p)
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("perturb", help="write a perturbed copy of an image set")
    p.add_argument("--kind", choices=("noise", "shelter", "exchange"), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--split", choices=("train", "test", "all"), default="test")
    p.add_argument("--images", default=None, help=".npy image batch instead of a split")
    p.add_argument("--out", required=True, help="output .npy path")
    add_split_seed(p)
    p.set_defaults(func=_cmd_perturb)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__, "message": str(exc)}}),
              file=sys.stderr)
        return 1
    print(json.dumps(doc, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
