"""Validated containers for scored predictions with group membership.

The central type is :class:`PredictionSet`: a columnar, immutable bundle of
model scores in ``[0, 1]``, non-negative integer group ids, and optional
binary ground-truth labels.  All estimators in this package consume either a
``PredictionSet`` or the per-group :class:`GroupView` slices produced by
:func:`split_groups`.

Construction performs full validation so downstream code can assume clean
data: scores are finite and inside the unit interval, group ids are
non-negative integers with at least two distinct values, labels (when given)
are 0/1, and all columns have equal length.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import GroupError, RangeError, SchemaError

__all__ = [
    "PredictionSet",
    "GroupView",
    "from_arrays",
    "ingest",
    "read_csv",
    "write_csv",
    "split_groups",
    "group_view",
]


def _readonly(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _coerce_int_column(values, name):
    """Convert *values* to an int64 array, rejecting non-integral entries."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise SchemaError(f"column '{name}' must be one-dimensional")
    if arr.dtype.kind in "iu":
        return arr.astype(np.int64)
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise SchemaError(f"column '{name}' has a non-finite value at row {bad}")
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            bad = int(np.flatnonzero(rounded != arr)[0])
            raise SchemaError(f"column '{name}' has a non-integer value at row {bad}")
        return rounded.astype(np.int64)
    raise SchemaError(f"column '{name}' must be numeric, got dtype {arr.dtype}")


@dataclass(frozen=True)
class PredictionSet:
    """Immutable columns of predictions, group ids, and optional labels.

    Attributes
    ----------
    predictions : ndarray of float64
        Model scores, each in ``[0, 1]``.
    groups : ndarray of int64
        Non-negative group id per row; at least two distinct ids overall.
    labels : ndarray of int64 or None
        Optional binary ground-truth labels.
    """

    predictions: np.ndarray
    groups: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        preds = np.asarray(self.predictions, dtype=np.float64)
        if preds.ndim != 1:
            raise SchemaError("predictions must be one-dimensional")
        if preds.shape[0] == 0:
            raise SchemaError("prediction set has no rows")
        groups = _coerce_int_column(self.groups, "s")
        if groups.shape[0] != preds.shape[0]:
            raise SchemaError(
                f"length mismatch: {preds.shape[0]} predictions vs {groups.shape[0]} group ids"
            )

        bad = ~np.isfinite(preds)
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            raise RangeError(f"prediction at row {row} is not finite")
        bad = (preds < 0.0) | (preds > 1.0)
        if np.any(bad):
            row = int(np.flatnonzero(bad)[0])
            raise RangeError(
                f"prediction at row {row} is {preds[row].item()!r}, outside [0, 1]"
            )

        if np.any(groups < 0):
            row = int(np.flatnonzero(groups < 0)[0])
            raise RangeError(f"group id at row {row} is negative")
        if np.unique(groups).shape[0] < 2:
            raise GroupError("at least two distinct group ids are required")

        labels = self.labels
        if labels is not None:
            labels = _coerce_int_column(labels, "y_true")
            if labels.shape[0] != preds.shape[0]:
                raise SchemaError(
                    f"length mismatch: {preds.shape[0]} predictions vs {labels.shape[0]} labels"
                )
            bad = (labels != 0) & (labels != 1)
            if np.any(bad):
                row = int(np.flatnonzero(bad)[0])
                raise RangeError(f"label at row {row} is {labels[row]}, expected 0 or 1")
            labels = _readonly(labels)

        object.__setattr__(self, "predictions", _readonly(preds))
        object.__setattr__(self, "groups", _readonly(groups))
        object.__setattr__(self, "labels", labels)

    @property
    def n(self):
        """Number of rows."""
        return int(self.predictions.shape[0])

    @property
    def group_ids(self):
        """Sorted list of distinct group ids."""
        return [int(g) for g in np.unique(self.groups)]

    def with_predictions(self, new_predictions):
        """Return a copy with *new_predictions* but the same groups and labels."""
        return PredictionSet(np.asarray(new_predictions), self.groups, self.labels)


@dataclass(frozen=True)
class GroupView:
    """Read-only slice of one group's predictions."""

    group_id: int
    predictions: np.ndarray

    def __post_init__(self):
        preds = np.asarray(self.predictions, dtype=np.float64)
        if preds.ndim != 1 or preds.shape[0] == 0:
            raise SchemaError("a group view needs a non-empty 1-d prediction array")
        object.__setattr__(self, "group_id", int(self.group_id))
        object.__setattr__(self, "predictions", _readonly(preds))

    @property
    def count(self):
        return int(self.predictions.shape[0])


def from_arrays(y_pred, s, y_true=None):
    """Build a validated :class:`PredictionSet` from array-likes."""
    return PredictionSet(np.asarray(y_pred, dtype=np.float64), s, y_true)


def ingest(records):
    """Build a :class:`PredictionSet` from an iterable of row mappings.

    Each record must provide ``y_pred`` and ``s``; ``y_true`` is optional but
    must be present on either all rows or none.  Extra keys are ignored.
    """
    preds, groups, labels = [], [], []
    for i, rec in enumerate(records):
        try:
            preds.append(float(rec["y_pred"]))
            groups.append(rec["s"])
        except KeyError as exc:
            raise SchemaError(f"row {i} is missing required key {exc.args[0]!r}") from None
        except (TypeError, ValueError):
            raise SchemaError(f"row {i} has a non-numeric y_pred") from None
        if "y_true" in rec and rec["y_true"] is not None:
            labels.append(rec["y_true"])
        elif labels:
            raise SchemaError(f"row {i} is missing y_true but earlier rows have it")
    if not preds:
        raise SchemaError("no rows to ingest")
    if labels and len(labels) != len(preds):
        first_missing = len(labels)
        raise SchemaError(f"row {first_missing} onward is missing y_true")
    return from_arrays(preds, groups, labels if labels else None)


def read_csv(path):
    """Read a prediction CSV with columns ``y_pred``, optional ``y_true``, ``s``.

    Unknown columns are ignored.  Cells that fail to parse raise
    :class:`SchemaError` naming the offending row and column.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a CSV header")
        fields = set(reader.fieldnames)
        for required in ("y_pred", "s"):
            if required not in fields:
                raise SchemaError(f"{path}: missing required column '{required}'")
        has_labels = "y_true" in fields

        preds, groups, labels = [], [], []
        for i, row in enumerate(reader):
            for col in ("y_pred", "s") + (("y_true",) if has_labels else ()):
                cell = row.get(col)
                if cell is None or cell.strip() == "":
                    raise SchemaError(f"{path}: row {i} has an empty '{col}' cell")
            try:
                preds.append(float(row["y_pred"]))
            except ValueError:
                raise SchemaError(
                    f"{path}: row {i} column 'y_pred' is not numeric: {row['y_pred']!r}"
                ) from None
            try:
                groups.append(float(row["s"]))
            except ValueError:
                raise SchemaError(
                    f"{path}: row {i} column 's' is not numeric: {row['s']!r}"
                ) from None
            if has_labels:
                try:
                    labels.append(float(row["y_true"]))
                except ValueError:
                    raise SchemaError(
                        f"{path}: row {i} column 'y_true' is not numeric: {row['y_true']!r}"
                    ) from None
    if not preds:
        raise SchemaError(f"{path}: no data rows")
    return from_arrays(preds, groups, labels if has_labels else None)


def write_csv(pred_set, path):
    """Write *pred_set* to CSV so that :func:`read_csv` round-trips it exactly.

    Floats are rendered with ``repr``, which is the shortest string that
    parses back to the identical float64.
    """
    has_labels = pred_set.labels is not None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if has_labels:
            writer.writerow(["y_pred", "y_true", "s"])
            for p, y, g in zip(pred_set.predictions, pred_set.labels, pred_set.groups):
                writer.writerow([repr(float(p)), int(y), int(g)])
        else:
            writer.writerow(["y_pred", "s"])
            for p, g in zip(pred_set.predictions, pred_set.groups):
                writer.writerow([repr(float(p)), int(g)])


def split_groups(pred_set):
    """Partition *pred_set* into per-group views, ordered by group id."""
    views = []
    for gid in np.unique(pred_set.groups):
        mask = pred_set.groups == gid
        views.append(GroupView(int(gid), pred_set.predictions[mask]))
    return views


def group_view(pred_set, gid):
    """Return the :class:`GroupView` for *gid*, or raise :class:`GroupError`."""
    mask = pred_set.groups == int(gid)
    if not np.any(mask):
        known = ", ".join(str(g) for g in pred_set.group_ids)
        raise GroupError(f"unknown group id {gid}; present ids: {known}")
    return GroupView(int(gid), pred_set.predictions[mask])
