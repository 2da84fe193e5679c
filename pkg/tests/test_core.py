"""Ingestion and validation tests for prediction sets."""

import numpy as np
import pytest

from parity_meter import (
    GroupError,
    PredictionSet,
    RangeError,
    SchemaError,
    from_arrays,
    group_view,
    ingest,
    read_csv,
    split_groups,
    write_csv,
)


def test_from_arrays_basic_types():
    ps = from_arrays([0.1, 0.9], [0, 1], [1, 0])
    assert ps.predictions.dtype == np.float64
    assert ps.groups.dtype == np.int64
    assert ps.labels.dtype == np.int64
    assert ps.n == 2
    assert ps.group_ids == [0, 1]


def test_arrays_are_copied_and_read_only():
    preds = np.array([0.2, 0.8])
    groups = np.array([0, 1])
    ps = from_arrays(preds, groups)
    preds[0] = 0.5
    assert ps.predictions[0] == 0.2
    with pytest.raises(ValueError):
        ps.predictions[0] = 0.3
    with pytest.raises(ValueError):
        ps.groups[0] = 7


def test_prediction_out_of_range_names_row():
    with pytest.raises(RangeError, match="row 2"):
        from_arrays([0.1, 0.5, 1.5], [0, 1, 0])
    with pytest.raises(RangeError, match="row 0"):
        from_arrays([-0.1, 0.5, 0.9], [0, 1, 0])


def test_prediction_nan_rejected():
    with pytest.raises(RangeError):
        from_arrays([0.1, float("nan")], [0, 1])


def test_endpoints_allowed():
    ps = from_arrays([0.0, 1.0], [0, 1])
    assert ps.predictions[0] == 0.0
    assert ps.predictions[1] == 1.0


def test_negative_group_rejected():
    with pytest.raises(RangeError, match="row 1"):
        from_arrays([0.1, 0.2], [0, -1])


def test_single_group_rejected():
    with pytest.raises(GroupError):
        from_arrays([0.1, 0.2, 0.3], [1, 1, 1])


def test_non_integral_group_rejected():
    with pytest.raises(SchemaError):
        from_arrays([0.1, 0.2], [0.0, 1.5])


def test_integral_float_groups_accepted():
    ps = from_arrays([0.1, 0.2], [0.0, 1.0])
    assert list(ps.groups) == [0, 1]


def test_labels_must_be_binary():
    with pytest.raises(RangeError, match="row 1"):
        from_arrays([0.1, 0.2], [0, 1], [0, 2])


def test_length_mismatch():
    with pytest.raises(SchemaError):
        from_arrays([0.1, 0.2, 0.3], [0, 1])
    with pytest.raises(SchemaError):
        from_arrays([0.1, 0.2], [0, 1], [1])


def test_empty_rejected():
    with pytest.raises(SchemaError):
        from_arrays([], [])


def test_ingest_records():
    records = [
        {"y_pred": 0.3, "s": 0, "y_true": 1},
        {"y_pred": 0.7, "s": 1, "y_true": 0},
    ]
    ps = ingest(records)
    assert list(ps.predictions) == [0.3, 0.7]
    assert list(ps.groups) == [0, 1]
    assert list(ps.labels) == [1, 0]


def test_ingest_without_labels():
    ps = ingest([{"y_pred": 0.3, "s": 0}, {"y_pred": 0.7, "s": 1}])
    assert ps.labels is None


def test_read_csv_round_trip(tmp_path, labeled_set):
    path = tmp_path / "preds.csv"
    write_csv(labeled_set, path)
    back = read_csv(path)
    assert np.array_equal(back.predictions, labeled_set.predictions)
    assert np.array_equal(back.groups, labeled_set.groups)
    assert np.array_equal(back.labels, labeled_set.labels)


def test_write_csv_uses_unix_newlines(tmp_path, labeled_set):
    path = tmp_path / "preds.csv"
    write_csv(labeled_set, path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")


def test_write_csv_round_trip_exact_floats(tmp_path):
    preds = [1 / 3, 2 / 7, 0.1234567890123456]
    ps = from_arrays(preds, [0, 1, 0])
    path = tmp_path / "preds.csv"
    write_csv(ps, path)
    back = read_csv(path)
    assert np.array_equal(back.predictions, ps.predictions)


def test_read_csv_missing_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("foo,s\n0.5,0\n0.6,1\n")
    with pytest.raises(SchemaError, match="y_pred"):
        read_csv(path)


def test_read_csv_bad_cell_names_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("y_pred,s\n0.5,0\nnope,1\n")
    with pytest.raises(SchemaError, match="row 1"):
        read_csv(path)


def test_read_csv_ignores_unknown_columns(tmp_path):
    path = tmp_path / "extra.csv"
    path.write_text("y_pred,s,comment\n0.5,0,hello\n0.6,1,world\n")
    ps = read_csv(path)
    assert list(ps.predictions) == [0.5, 0.6]
    assert ps.labels is None


def test_read_csv_optional_labels(tmp_path):
    path = tmp_path / "nolabel.csv"
    path.write_text("y_pred,s\n0.5,0\n0.6,1\n")
    assert read_csv(path).labels is None


def test_split_groups_sorted_by_id():
    ps = from_arrays([0.1, 0.2, 0.3, 0.4], [3, 0, 3, 0])
    views = split_groups(ps)
    assert [v.group_id for v in views] == [0, 3]
    assert list(views[0].predictions) == [0.2, 0.4]
    assert list(views[1].predictions) == [0.1, 0.3]
    assert views[0].count == 2


def test_group_view_unknown_id():
    ps = from_arrays([0.1, 0.2], [0, 1])
    with pytest.raises(GroupError):
        group_view(ps, 5)


def test_group_view_selects_rows():
    ps = from_arrays([0.1, 0.2, 0.3], [0, 1, 0])
    v = group_view(ps, 0)
    assert list(v.predictions) == [0.1, 0.3]
