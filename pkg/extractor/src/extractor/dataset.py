"""Bundled handwritten-digit dataset, rescaled to 8-bit images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.datasets import load_digits

N_CLASSES = 10


@dataclass(frozen=True)
class DigitDataset:
    """8-bit grayscale digit images with labels and a fixed train/test split."""

    images: np.ndarray  # (N, 8, 8) uint8
    labels: np.ndarray  # (N,) int64
    train_idx: np.ndarray
    test_idx: np.ndarray

    @property
    def train_images(self) -> np.ndarray:
        return self.images[self.train_idx]

    @property
    def train_labels(self) -> np.ndarray:
        return self.labels[self.train_idx]

    @property
    def test_images(self) -> np.ndarray:
        return self.images[self.test_idx]

    @property
    def test_labels(self) -> np.ndarray:
        return self.labels[self.test_idx]

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        if name == "train":
            return self.train_images, self.train_labels
        if name == "test":
            return self.test_images, self.test_labels
        if name == "all":
            return self.images, self.labels
        raise ValueError(f"unknown split {name!r}; expected train/test/all")


def load_dataset(seed: int = 0, train_fraction: float = 0.75) -> DigitDataset:
    """Load the digits, rescale [0, 16] -> [0, 255], split deterministically."""
    digits = load_digits()
    images = np.round(digits.images * (255.0 / 16.0)).clip(0, 255).astype(np.uint8)
    labels = digits.target.astype(np.int64)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(images))
    n_train = int(len(images) * train_fraction)
    return DigitDataset(
        images=images,
        labels=labels,
        train_idx=np.sort(perm[:n_train]),
        test_idx=np.sort(perm[n_train:]),
    )
