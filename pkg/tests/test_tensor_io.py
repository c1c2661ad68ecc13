import struct

import numpy as np
import pytest

from cafd_eval import tensor_io
from cafd_eval.errors import DataError, DimensionError, FormatError, TruncationError
from cafd_eval.tensor_io import (
    FeatureMatrix,
    LabelVector,
    ProbabilityMatrix,
    one_hot,
    read_feature_matrix,
    read_labels,
    read_probabilities,
    validate_pair,
    write_feature_matrix,
    write_labels,
    write_probabilities,
)


def test_feature_roundtrip_random(tmp_path):
    rng = np.random.default_rng(7)
    m = FeatureMatrix.from_array(rng.standard_normal((100, 64)))
    path = tmp_path / "x.fvec"
    write_feature_matrix(m, path)
    back = read_feature_matrix(path)
    # bit-exact at float32 precision
    assert np.array_equal(back.data.astype(np.float32), m.data.astype(np.float32))
    # and a second write/read cycle is the identity
    write_feature_matrix(back, path)
    again = read_feature_matrix(path)
    assert np.array_equal(again.data, back.data)


def test_single_value_file_layout(tmp_path):
    path = tmp_path / "one.fvec"
    write_feature_matrix(FeatureMatrix.from_array([[0.5]]), path)
    raw = path.read_bytes()
    # 8-byte magic + 2 x u32 shape + one float32 payload value
    assert len(raw) == 8 + 4 + 4 + 4
    assert raw[:8] == tensor_io.FVEC_MAGIC
    assert struct.unpack("<II", raw[8:16]) == (1, 1)
    assert struct.unpack("<f", raw[16:20]) == (0.5,)


def test_empty_matrix_roundtrip(tmp_path):
    path = tmp_path / "empty.fvec"
    m = FeatureMatrix.from_array(np.empty((0, 5)))
    write_feature_matrix(m, path)
    back = read_feature_matrix(path)
    assert back.n_samples == 0
    assert back.dim == 5


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.fvec"
    path.write_bytes(b"NOTFVEC!" + struct.pack("<II", 1, 1) + struct.pack("<f", 1.0))
    with pytest.raises(FormatError):
        read_feature_matrix(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "trunc.fvec"
    payload = struct.pack("<5f", *range(5))  # header says 6 values
    path.write_bytes(tensor_io.FVEC_MAGIC + struct.pack("<II", 2, 3) + payload)
    with pytest.raises(TruncationError):
        read_feature_matrix(path)


def test_nan_payload_names_position(tmp_path):
    path = tmp_path / "nan.fvec"
    values = np.array([[1.0, 2.0], [3.0, np.nan]], dtype="<f4")
    path.write_bytes(tensor_io.FVEC_MAGIC + struct.pack("<II", 2, 2) + values.tobytes())
    with pytest.raises(DataError, match="row 1, column 1"):
        read_feature_matrix(path)


def test_labels_text_format(tmp_path):
    path = tmp_path / "y.labels"
    path.write_text("0\n1\n2\n")
    labels = read_labels(path)
    assert labels.labels.tolist() == [0, 1, 2]
    write_labels(labels, path)
    assert path.read_text() == "0\n1\n2\n"


def test_labels_reject_garbage(tmp_path):
    path = tmp_path / "y.labels"
    path.write_text("0\nx\n")
    with pytest.raises(FormatError):
        read_labels(path)


def test_probability_row_validation(tmp_path):
    ok = tmp_path / "p.csv"
    ok.write_text("0.5,0.5\n")
    assert read_probabilities(ok).data.tolist() == [[0.5, 0.5]]

    bad = tmp_path / "bad.csv"
    bad.write_text("0.7,0.7\n")
    with pytest.raises(DataError, match="row 0"):
        read_probabilities(bad)


def test_probability_rows_renormalized():
    p = ProbabilityMatrix.from_array([[0.5000001, 0.4999999 + 2e-7]])
    assert p.data.sum(axis=1) == pytest.approx([1.0], abs=1e-15)


def test_probability_roundtrip_dyadic_bitexact(tmp_path):
    # rows whose float32 sums are exactly 1.0 survive write/read unchanged
    rows = np.array([[1.0, 0.0, 0.0], [0.25, 0.25, 0.5], [0.5, 0.375, 0.125]])
    p = ProbabilityMatrix.from_array(rows)
    path = tmp_path / "p.fvec"
    write_probabilities(p, path)
    back = read_probabilities(path)
    assert np.array_equal(back.data, rows)


def test_probability_roundtrip_generic_float32(tmp_path):
    rng = np.random.default_rng(3)
    rows = rng.random((50, 10)) + 1e-3
    rows /= rows.sum(axis=1, keepdims=True)
    p = ProbabilityMatrix.from_array(rows)
    path = tmp_path / "p.fvec"
    write_probabilities(p, path)
    back = read_probabilities(path)
    # renormalization after float32 storage allows ~1 ulp wobble
    np.testing.assert_allclose(back.data, rows, rtol=5e-7, atol=5e-8)
    assert back.data.sum(axis=1) == pytest.approx(np.ones(50), abs=1e-12)


def test_feature_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(11)
    m = FeatureMatrix.from_array(rng.standard_normal((7, 3)))
    path = tmp_path / "x.csv"
    write_feature_matrix(m, path)
    back = read_feature_matrix(path)
    np.testing.assert_array_equal(back.data, m.data)


def test_csv_ragged_rows_rejected(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(TruncationError):
        read_feature_matrix(path)


def test_one_hot():
    lv = LabelVector.from_array([0, 1])
    assert one_hot(lv, 2).data.tolist() == [[1.0, 0.0], [0.0, 1.0]]
    assert one_hot(LabelVector.from_array([2]), 3).data.tolist() == [[0.0, 0.0, 1.0]]
    with pytest.raises(DataError):
        one_hot(LabelVector.from_array([3]), 3)


def test_validate_pair():
    f = lambda n, d: FeatureMatrix.from_array(np.zeros((n, d)))
    p = lambda n, k: ProbabilityMatrix.from_array(np.full((n, k), 1.0 / k))
    validate_pair(f(100, 64), f(200, 64), p(100, 10), p(200, 10))
    with pytest.raises(DimensionError, match="dimension"):
        validate_pair(f(100, 64), f(200, 32), p(100, 10), p(200, 10))
    with pytest.raises(DimensionError, match="class count"):
        validate_pair(f(100, 64), f(200, 64), p(100, 10), p(200, 9))
    with pytest.raises(DimensionError, match="real side"):
        validate_pair(f(100, 64), f(200, 64), p(99, 10), p(200, 10))


def test_types_are_immutable():
    m = FeatureMatrix.from_array([[1.0, 2.0]])
    with pytest.raises(ValueError):
        m.data[0, 0] = 3.0
    p = ProbabilityMatrix.from_array([[0.5, 0.5]])
    with pytest.raises(ValueError):
        p.data[0, 0] = 1.0
