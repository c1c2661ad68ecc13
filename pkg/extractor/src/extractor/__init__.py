"""Reference feature-extraction pipeline for the evaluation toolkit.

Trains a small digit classifier and a small convolutional autoencoder,
exports features / class posteriors / labels in the FVEC and labels file
formats, and implements the image-space perturbations (noise, shelter,
exchange) used to stress feature representations. Couples to the
evaluation toolkit only through files and its CLI.
"""

from .dataset import DigitDataset, load_dataset
from .fvec import read_fvec, write_fvec, write_labels
from .models import AutoEncoder, Classifier, EncoderSpec
from .perturb import exchange, noise, perturb_images, shelter, swap_cells
from .train import (
    extract_features,
    load_artifact,
    save_artifact,
    train_autoencoder,
    train_classifier,
)

__version__ = "0.1.0"
