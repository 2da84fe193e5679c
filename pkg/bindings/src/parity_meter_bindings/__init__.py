"""Array-in / dict-out bindings over the parity-meter metric engine.

Five functions cover the common audit calls: :func:`report`, :func:`abpc`,
:func:`abcc`, :func:`delta_dp_b`, and :func:`delta_dp_c`.  Each takes plain
arrays (``y_pred`` scores in [0, 1] and integer group ids ``s``), copies them
at the boundary, and returns plain floats or dicts.

Defaults mirror the reference audit configuration: ``bw_method="scott"`` for
the density bandwidth, 5000 evaluation points for density curves, and 10000
for CDF curves.  Validation matches the core package exactly, but every
failure is raised as a plain :class:`ValueError` carrying the core message so
callers only ever need one ``except`` clause.
"""

from __future__ import annotations

import numpy as np

import parity_meter as _core
from parity_meter.errors import ParityMeterError as _CoreError

__version__ = _core.__version__

__all__ = ["report", "abpc", "abcc", "delta_dp_b", "delta_dp_c", "__version__"]


def _copy(values):
    return np.array(values, copy=True)


def _prediction_set(y_pred, s, y_true=None):
    try:
        labels = _copy(y_true) if y_true is not None else None
        return _core.from_arrays(_copy(y_pred), _copy(s), labels)
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def _config(bw_method="scott", pdf_sample_n=5000, cdf_sample_n=10000, threshold=0.5):
    try:
        return _core.MetricConfig(
            threshold=threshold,
            pdf_grid=pdf_sample_n,
            cdf_grid=cdf_sample_n,
            kde=_core.KdeConfig(bandwidth=bw_method),
        )
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def abpc(y_pred, s, bw_method="scott", sample_n=5000):
    """Area between the two groups' estimated score densities, in [0, 2]."""
    preds = _prediction_set(y_pred, s)
    config = _config(bw_method=bw_method, pdf_sample_n=sample_n)
    try:
        return _core.abpc(preds, config=config)
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def abcc(y_pred, s, sample_n=10000):
    """Area between the two groups' empirical score CDFs, in [0, 1]."""
    preds = _prediction_set(y_pred, s)
    config = _config(cdf_sample_n=sample_n)
    try:
        return _core.abcc(preds, config=config)
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def delta_dp_b(y_pred, s, threshold=0.5):
    """Absolute difference of the groups' positive rates at *threshold*."""
    preds = _prediction_set(y_pred, s)
    try:
        return _core.delta_dp_b(preds, threshold=threshold)
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def delta_dp_c(y_pred, s):
    """Absolute difference of the groups' mean predicted scores."""
    preds = _prediction_set(y_pred, s)
    try:
        return _core.delta_dp_c(preds)
    except _CoreError as exc:
        raise ValueError(str(exc)) from None


def report(
    y_pred,
    y_true,
    s,
    threshold=0.5,
    bw_method="scott",
    pdf_sample_n=5000,
    cdf_sample_n=10000,
):
    """Full metric report as a plain dict.

    ``y_true`` may be None, in which case the accuracy entries are None.
    With two groups the report covers that pair; with more it averages over
    all pairs and lists each pair separately under ``"pairs"``.
    """
    preds = _prediction_set(y_pred, s, y_true)
    config = _config(
        bw_method=bw_method,
        pdf_sample_n=pdf_sample_n,
        cdf_sample_n=cdf_sample_n,
        threshold=threshold,
    )
    try:
        return _core.multi_group_report(preds, config).to_dict()
    except _CoreError as exc:
        raise ValueError(str(exc)) from None
