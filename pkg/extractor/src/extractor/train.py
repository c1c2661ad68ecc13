"""Training loops, artifact save/load, and feature extraction."""

from __future__ import annotations

import warnings

import numpy as np
import torch
import torch.nn as nn

from .models import AutoEncoder, Classifier, EncoderSpec

ACCURACY_FLOOR = 0.97
_BATCH = 64


def _to_tensor(images: np.ndarray) -> torch.Tensor:
    if images.dtype != np.uint8:
        raise ValueError(f"expected uint8 images, got {images.dtype}")
    return torch.from_numpy(images.astype(np.float32) / 255.0).unsqueeze(1)


def train_classifier(
    train_images: np.ndarray,
    train_labels: np.ndarray,
    test_images: np.ndarray,
    test_labels: np.ndarray,
    spec: EncoderSpec,
) -> tuple[Classifier, float]:
    """Train the 2-conv classifier; returns (model, test accuracy).

    Accuracy below the floor only warns; the artifact is still usable.
    """
    torch.manual_seed(spec.seed)
    n_classes = int(train_labels.max()) + 1
    model = Classifier(spec.feature_dim, n_classes)
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    loss_fn = nn.CrossEntropyLoss()
    x = _to_tensor(train_images)
    y = torch.from_numpy(train_labels.astype(np.int64))
    for _ in range(spec.epochs):
        model.train()
        order = torch.randperm(len(x))
        for i in range(0, len(x), _BATCH):
            idx = order[i : i + _BATCH]
            opt.zero_grad()
            _, logits = model(x[idx])
            loss_fn(logits, y[idx]).backward()
            opt.step()
    model.eval()
    with torch.no_grad():
        _, logits = model(_to_tensor(test_images))
        acc = float((logits.argmax(1).numpy() == test_labels).mean())
    if acc < ACCURACY_FLOOR:
        warnings.warn(
            f"classifier test accuracy {acc:.4f} below {ACCURACY_FLOOR}", stacklevel=2
        )
    return model, acc


def train_autoencoder(
    images: np.ndarray, spec: EncoderSpec
) -> tuple[AutoEncoder, list[float]]:
    """Train the autoencoder on reconstruction MSE; returns per-epoch losses."""
    torch.manual_seed(spec.seed)
    model = AutoEncoder(spec.feature_dim)
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    x = _to_tensor(images)
    losses = []
    for _ in range(spec.epochs):
        model.train()
        order = torch.randperm(len(x))
        total = 0.0
        for i in range(0, len(x), _BATCH):
            idx = order[i : i + _BATCH]
            opt.zero_grad()
            recon, _ = model(x[idx])
            loss = ((recon - x[idx]) ** 2).mean()
            loss.backward()
            opt.step()
            total += loss.item() * len(idx)
        losses.append(total / len(x))
    if not np.isfinite(losses).all():
        raise RuntimeError("autoencoder training diverged")
    model.eval()
    return model, losses


def save_artifact(model, spec: EncoderSpec, path) -> None:
    torch.save(
        {
            "kind": spec.kind,
            "feature_dim": spec.feature_dim,
            "seed": spec.seed,
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_artifact(path):
    doc = torch.load(path, map_location="cpu", weights_only=True)
    if doc["kind"] == "classifier":
        n_classes = doc["state_dict"]["fc2.bias"].shape[0]
        model = Classifier(doc["feature_dim"], n_classes)
    else:
        model = AutoEncoder(doc["feature_dim"])
    model.load_state_dict(doc["state_dict"])
    model.eval()
    return model, doc["kind"]


def extract_features(model, images: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Run the encoder over images.

    Returns (features, probabilities); probabilities is None for
    autoencoders. Batched so large sets stay within memory.
    """
    x = _to_tensor(images)
    feats_parts, prob_parts = [], []
    with torch.no_grad():
        for i in range(0, len(x), 256):
            batch = x[i : i + 256]
            if isinstance(model, Classifier):
                feats, logits = model(batch)
                prob_parts.append(torch.softmax(logits, dim=1).numpy())
            else:
                feats = model.encode(batch)
            feats_parts.append(feats.numpy())
    features = np.concatenate(feats_parts).astype(np.float64)
    probs = np.concatenate(prob_parts).astype(np.float64) if prob_parts else None
    return features, probs
