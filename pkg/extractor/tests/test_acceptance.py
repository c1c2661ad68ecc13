"""Acceptance suite: end-to-end smoke through the evaluation CLI.

Run with ``pytest tests/test_acceptance.py -s`` for one PASS/FAIL line per
criterion. The evaluation toolkit is exercised exclusively through its
``cafd-eval`` command-line interface and FVEC/labels files.
"""

import json
import shutil
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from extractor.dataset import load_dataset
from extractor.fvec import write_fvec, write_labels
from extractor.models import EncoderSpec
from extractor.perturb import perturb_images
from extractor.train import extract_features, train_autoencoder, train_classifier

ACCURACY_FLOOR = 0.97


@contextmanager
def criterion(name: str, budget_s: float):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    elapsed = time.perf_counter() - start
    verdict = "PASS" if elapsed <= budget_s else "FAIL (over runtime budget)"
    print(f"[ACCEPTANCE] {name}: {verdict} ({elapsed:.1f}s, budget {budget_s:.0f}s)")
    assert elapsed <= budget_s, f"{name}: runtime {elapsed:.1f}s exceeds {budget_s}s"


def eval_cli(*args) -> dict:
    """Invoke the evaluation toolkit CLI and parse its JSON report."""
    exe = shutil.which("cafd-eval")
    cmd = [exe] if exe else [sys.executable, "-m", "cafd_eval"]
    proc = subprocess.run(
        [*cmd, *map(str, args)], capture_output=True, text=True, timeout=600
    )
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


@pytest.fixture(scope="module")
def data():
    return load_dataset(seed=0)


def test_end_to_end_classifier_smoke(data, tmp_path_factory):
    with criterion("end-to-end classifier smoke", budget_s=15 * 60):
        out = tmp_path_factory.mktemp("clf")
        spec = EncoderSpec("classifier", feature_dim=1024, epochs=15, seed=0)
        model, acc = train_classifier(
            data.train_images, data.train_labels, data.test_images, data.test_labels, spec
        )
        assert acc >= ACCURACY_FLOOR

        files = {}
        for split in ("train", "test"):
            images, labels = data.split(split)
            feats, probs = extract_features(model, images)
            assert probs is not None
            np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)
            files[split] = {
                "x": out / f"{split}.fvec",
                "p": out / f"{split}_p.fvec",
                "y": out / f"{split}.labels",
            }
            write_fvec(feats, files[split]["x"])
            write_fvec(probs, files[split]["p"])
            write_labels(labels, files[split]["y"])

        self_doc = eval_cli(
            "evaluate",
            "--real", files["test"]["x"], "--real-probs", files["test"]["p"],
            "--gen", files["test"]["x"], "--gen-probs", files["test"]["p"],
        )
        assert self_doc["fid"] <= 1e-6
        assert self_doc["cafd"] <= 1e-6
        assert self_doc["kld"] <= 1e-6

        cross_doc = eval_cli(
            "evaluate",
            "--real", files["train"]["x"], "--real-probs", files["train"]["p"],
            "--gen", files["test"]["x"], "--gen-probs", files["test"]["p"],
            "--real-labels", files["train"]["y"],
        )
        assert cross_doc["fid"] > 0.0
        assert cross_doc["cafd"] > 0.0


def test_perturbation_ordering_under_autoencoder(data, tmp_path_factory):
    with criterion("perturbation severity ordering", budget_s=20 * 60):
        out = tmp_path_factory.mktemp("ae")
        spec = EncoderSpec("autoencoder", feature_dim=1024, epochs=30, seed=0)
        model, losses = train_autoencoder(data.train_images, spec)
        assert losses[-1] < losses[0]

        images = data.images  # full set; the corpus has 1797 images
        real_path = out / "real.fvec"
        write_fvec(extract_features(model, images)[0], real_path)

        fids = {}
        for i, kind in enumerate(("noise", "shelter", "exchange")):
            perturbed = perturb_images(images, kind, seed=100 * (i + 1))
            path = out / f"{kind}.fvec"
            write_fvec(extract_features(model, perturbed)[0], path)
            fids[kind] = eval_cli("fid", "--real", real_path, "--gen", path)["fid"]

        print(f"    fid: noise={fids['noise']:.2f} shelter={fids['shelter']:.2f} "
              f"exchange={fids['exchange']:.2f}")
        assert fids["noise"] < fids["shelter"] < fids["exchange"]
