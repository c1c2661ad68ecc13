"""Encoder architectures: a 2-conv classifier and a small conv autoencoder."""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn as nn


@dataclass(frozen=True)
class EncoderSpec:
    """Training configuration for either encoder kind."""

    kind: str  # "classifier" or "autoencoder"
    feature_dim: int = 1024
    epochs: int = 15
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("classifier", "autoencoder"):
            raise ValueError(f"unknown encoder kind {self.kind!r}")
        if self.feature_dim < 1:
            raise ValueError(f"feature_dim must be >= 1, got {self.feature_dim}")


class Classifier(nn.Module):
    """Two conv layers, then a wide penultimate layer whose post-ReLU
    activations are the feature map; softmax outputs are p(y|x)."""

    def __init__(self, feature_dim: int = 1024, n_classes: int = 10):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 32, 3, padding=1)
        self.conv2 = nn.Conv2d(32, 64, 3, padding=1)
        self.pool = nn.MaxPool2d(2)
        self.fc1 = nn.Linear(64 * 4 * 4, feature_dim)
        self.fc2 = nn.Linear(feature_dim, n_classes)
        self.act = nn.ReLU()

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        h = self.act(self.conv1(x))
        h = self.pool(self.act(self.conv2(h)))
        feats = self.act(self.fc1(h.flatten(1)))
        return feats, self.fc2(feats)


class AutoEncoder(nn.Module):
    """Strided conv encoder to a dense code, transposed-conv decoder back.

    The bottleneck activations are the feature map; no probabilities.
    """

    def __init__(self, feature_dim: int = 1024):
        super().__init__()
        self.enc1 = nn.Conv2d(1, 32, 3, stride=2, padding=1)  # 8 -> 4
        self.enc2 = nn.Conv2d(32, 64, 3, stride=2, padding=1)  # 4 -> 2
        self.fc_code = nn.Linear(64 * 2 * 2, feature_dim)
        self.fc_dec = nn.Linear(feature_dim, 64 * 2 * 2)
        self.dec1 = nn.ConvTranspose2d(64, 32, 4, stride=2, padding=1)  # 2 -> 4
        self.dec2 = nn.ConvTranspose2d(32, 1, 4, stride=2, padding=1)  # 4 -> 8
        self.act = nn.ReLU()

    def encode(self, x: torch.Tensor) -> torch.Tensor:
        h = self.act(self.enc1(x))
        h = self.act(self.enc2(h)).flatten(1)
        return self.fc_code(h)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        code = self.encode(x)
        h = self.act(self.fc_dec(code)).reshape(-1, 64, 2, 2)
        h = self.act(self.dec1(h))
        return torch.sigmoid(self.dec2(h)), code
