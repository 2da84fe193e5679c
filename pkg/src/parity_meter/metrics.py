"""Demographic-parity and accuracy metrics over grouped predictions.

Two families of parity metrics are provided.  The classical pair:

* ``delta_dp_b``: absolute difference of positive-decision rates after
  binarising at a threshold ``t`` (a prediction counts as positive when it is
  greater than or equal to ``t``);
* ``delta_dp_c``: absolute difference of mean predictions.

And the distribution-level pair, which compares the whole score
distributions rather than a single functional of them:

* ``abpc``: area between the two groups' kernel density estimates over
  [0, 1] (range [0, 2]);
* ``abcc``: area between the two groups' empirical CDFs over [0, 1]
  (range [0, 1]).

``abcc`` equals the integral of ``delta_dp_b`` over all thresholds, which is
what :func:`threshold_sweep` traces.  :func:`mutual_information` reports the
mutual information, in nats, between the score and the group id of a pair.
Accuracy metrics (accuracy at a threshold and average precision) are
available when ground-truth labels are present.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .core import split_groups
from .density import KdeConfig, cdf_area_between, fit_ecdf, fit_kde
from .errors import (
    ConfigError,
    GroupError,
    MissingLabelError,
    MissingPositiveError,
)
from .parallel import ordered_map

__all__ = [
    "MetricConfig",
    "PairMetrics",
    "MetricReport",
    "ThresholdSweep",
    "delta_dp_b",
    "delta_dp_c",
    "abpc",
    "abcc",
    "threshold_sweep",
    "mutual_information",
    "accuracy_metrics",
    "pair_report",
    "multi_group_report",
]

# Density values below this are treated as exactly zero inside the entropy
# integrand, so that f*log(f) never evaluates log at (numerically) zero.
PDF_EPS = 1e-12


@dataclass(frozen=True)
class MetricConfig:
    """Shared configuration for the distribution-level metrics.

    Attributes
    ----------
    threshold : float
        Binarisation threshold for ``delta_dp_b`` (inclusive: positive when
        the prediction is >= threshold).
    pdf_grid : int
        Number of uniform grid points on [0, 1] for density integrals.
    cdf_grid : int
        Number of uniform grid points on [0, 1] for CDF integrals.
    kde : KdeConfig
        Bandwidth configuration for all kernel density fits.
    """

    threshold: float = 0.5
    pdf_grid: int = 5000
    cdf_grid: int = 10000
    kde: KdeConfig = KdeConfig()

    def __post_init__(self):
        t = float(self.threshold)
        if not np.isfinite(t) or not 0.0 <= t <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold!r}")
        object.__setattr__(self, "threshold", t)
        for name in ("pdf_grid", "cdf_grid"):
            v = int(getattr(self, name))
            if v < 2:
                raise ConfigError(f"{name} must be at least 2, got {v}")
            object.__setattr__(self, name, v)
        if not isinstance(self.kde, KdeConfig):
            object.__setattr__(self, "kde", KdeConfig(self.kde))

    def to_dict(self):
        bw = self.kde.bandwidth
        return {
            "threshold": self.threshold,
            "pdf_grid": self.pdf_grid,
            "cdf_grid": self.cdf_grid,
            "bandwidth": bw if isinstance(bw, str) else float(bw),
        }


def _resolve_pair(pred_set, pair):
    ids = pred_set.group_ids
    if pair is None:
        if len(ids) != 2:
            raise GroupError(
                f"dataset has {len(ids)} groups; specify an explicit pair"
            )
        return ids[0], ids[1]
    g0, g1 = int(pair[0]), int(pair[1])
    if g0 == g1:
        raise GroupError(f"pair must name two distinct groups, got ({g0}, {g1})")
    for g in (g0, g1):
        if g not in ids:
            known = ", ".join(str(i) for i in ids)
            raise GroupError(f"unknown group id {g}; present ids: {known}")
    return g0, g1


def _pair_values(pred_set, pair):
    g0, g1 = _resolve_pair(pred_set, pair)
    p = pred_set.predictions
    return g0, g1, p[pred_set.groups == g0], p[pred_set.groups == g1]


def delta_dp_b(pred_set, pair=None, threshold=0.5):
    """Absolute difference of positive rates at *threshold* (inclusive >=)."""
    t = float(threshold)
    if not np.isfinite(t) or not 0.0 <= t <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold!r}")
    _, _, v0, v1 = _pair_values(pred_set, pair)
    return float(abs(np.mean(v0 >= t) - np.mean(v1 >= t)))


def delta_dp_c(pred_set, pair=None):
    """Absolute difference of mean predictions between the two groups."""
    _, _, v0, v1 = _pair_values(pred_set, pair)
    return float(abs(np.mean(v0) - np.mean(v1)))


def _kde_values(values, gid, config, grid):
    from .core import GroupView

    est = fit_kde(GroupView(gid, values), config.kde)
    return est.evaluate(grid)


def _ecdf_values(values, grid):
    counts = np.searchsorted(np.sort(values), grid, side="right")
    return counts / values.shape[0]


def abpc(pred_set, pair=None, config=None):
    """Area between the two groups' kernel density estimates on [0, 1]."""
    config = config or MetricConfig()
    g0, g1, v0, v1 = _pair_values(pred_set, pair)
    grid = np.linspace(0.0, 1.0, config.pdf_grid)
    f0 = _kde_values(v0, g0, config, grid)
    f1 = _kde_values(v1, g1, config, grid)
    return float(np.trapezoid(np.abs(f0 - f1), grid))


def abcc(pred_set, pair=None, config=None):
    """Area between the two groups' empirical CDFs on [0, 1]."""
    config = config or MetricConfig()
    _, _, v0, v1 = _pair_values(pred_set, pair)
    grid = np.linspace(0.0, 1.0, config.cdf_grid)
    c0 = _ecdf_values(v0, grid)
    c1 = _ecdf_values(v1, grid)
    return float(np.trapezoid(np.abs(c0 - c1), grid))


@dataclass(frozen=True)
class ThresholdSweep:
    """``delta_dp_b`` traced over a uniform threshold grid.

    ``integral`` is the trapezoid integral of the traced curve;
    ``exact_integral`` is the closed-form integral over all thresholds
    (no grid error), which equals the area between the empirical CDFs.
    """

    pair: tuple
    thresholds: np.ndarray
    values: np.ndarray
    integral: float
    exact_integral: float


def threshold_sweep(pred_set, pair=None, steps=1001):
    """Evaluate ``delta_dp_b`` on a uniform grid of thresholds over [0, 1]."""
    steps = int(steps)
    if steps < 2:
        raise ConfigError(f"need at least 2 sweep steps, got {steps}")
    g0, g1, v0, v1 = _pair_values(pred_set, pair)
    grid = np.linspace(0.0, 1.0, steps)
    s0 = np.sort(v0)
    s1 = np.sort(v1)
    # mean(p >= t) counts the entries at or above t.
    rate0 = 1.0 - np.searchsorted(s0, grid, side="left") / s0.shape[0]
    rate1 = 1.0 - np.searchsorted(s1, grid, side="left") / s1.shape[0]
    values = np.abs(rate0 - rate1)
    values.setflags(write=False)
    grid.setflags(write=False)
    return ThresholdSweep(
        pair=(g0, g1),
        thresholds=grid,
        values=values,
        integral=float(np.trapezoid(values, grid)),
        exact_integral=cdf_area_between(v0, v1),
    )


def _entropy(pdf_values, grid):
    integrand = np.where(pdf_values >= PDF_EPS, pdf_values * np.log(np.maximum(pdf_values, PDF_EPS)), 0.0)
    return -float(np.trapezoid(integrand, grid))


def mutual_information(pred_set, pair=None, config=None):
    """Mutual information, in nats, between the score and the pair's group id.

    Estimated from kernel density estimates of the pooled and per-group score
    distributions: ``MI = H(pool) - sum_i P(S=i) H(group i)``, clamped at 0.
    """
    config = config or MetricConfig()
    g0, g1, v0, v1 = _pair_values(pred_set, pair)
    grid = np.linspace(0.0, 1.0, config.pdf_grid)
    f0 = _kde_values(v0, g0, config, grid)
    f1 = _kde_values(v1, g1, config, grid)
    pooled = np.concatenate([v0, v1])
    fp = _kde_values(pooled, g0, config, grid)
    w0 = v0.shape[0] / pooled.shape[0]
    w1 = v1.shape[0] / pooled.shape[0]
    mi = _entropy(fp, grid) - (w0 * _entropy(f0, grid) + w1 * _entropy(f1, grid))
    return max(0.0, float(mi))


def accuracy_metrics(pred_set, threshold=0.5):
    """Accuracy at *threshold* and average precision.

    Returns ``(acc, ap)``.  Average precision follows the step-wise
    interpolation ``sum_n (R_n - R_{n-1}) P_n`` over distinct predicted
    values in descending order.
    """
    if pred_set.labels is None:
        raise MissingLabelError("accuracy metrics need ground-truth labels")
    t = float(threshold)
    if not np.isfinite(t) or not 0.0 <= t <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {threshold!r}")
    preds = pred_set.predictions
    labels = pred_set.labels
    acc = float(np.mean((preds >= t).astype(np.int64) == labels))

    total_pos = int(labels.sum())
    if total_pos == 0:
        raise MissingPositiveError("average precision is undefined without positive labels")
    order = np.argsort(-preds, kind="stable")
    p_sorted = preds[order]
    y_sorted = labels[order]
    cum_tp = np.cumsum(y_sorted)
    cum_n = np.arange(1, preds.shape[0] + 1)
    # Last index of each run of equal predicted values.
    last = np.flatnonzero(np.append(np.diff(p_sorted) != 0.0, True))
    precision = cum_tp[last] / cum_n[last]
    recall = cum_tp[last] / total_pos
    recall_step = np.diff(np.concatenate([[0.0], recall]))
    ap = float(np.sum(recall_step * precision))
    return acc, ap


@dataclass(frozen=True)
class PairMetrics:
    """Parity metrics for one ordered pair of groups."""

    pair: tuple
    delta_dp_b: float
    delta_dp_c: float
    abpc: float
    abcc: float
    mi_nats: float

    def to_dict(self):
        return {
            "pair": [int(self.pair[0]), int(self.pair[1])],
            "delta_dp_b": self.delta_dp_b,
            "delta_dp_c": self.delta_dp_c,
            "abpc": self.abpc,
            "abcc": self.abcc,
            "mi_nats": self.mi_nats,
        }


@dataclass(frozen=True)
class MetricReport:
    """Full metric report: pairwise values plus their unweighted averages.

    For a two-group dataset the top-level numbers coincide with the single
    pair's and ``group_pair`` names that pair; with more groups it reads
    ``"averaged over pairs"``.  ``acc`` and ``ap`` are None when the dataset
    has no labels.
    """

    delta_dp_b: float
    delta_dp_c: float
    abpc: float
    abcc: float
    mutual_information: float
    acc: float | None
    ap: float | None
    config: MetricConfig
    group_pair: tuple | str
    pairs: tuple

    def to_dict(self):
        return {
            "delta_dp_b": self.delta_dp_b,
            "delta_dp_c": self.delta_dp_c,
            "abpc": self.abpc,
            "abcc": self.abcc,
            "mi_nats": self.mutual_information,
            "acc": self.acc,
            "ap": self.ap,
            "config": self.config.to_dict(),
            "pairs": [p.to_dict() for p in self.pairs],
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def _report_from_pairs(pred_set, config, pair_list):
    views = {v.group_id: v for v in split_groups(pred_set)}
    pdf_grid = np.linspace(0.0, 1.0, config.pdf_grid)
    cdf_grid = np.linspace(0.0, 1.0, config.cdf_grid)

    needed = sorted({g for p in pair_list for g in p})
    pdf_vals, cdf_vals, means, rates, entropies = {}, {}, {}, {}, {}
    for gid in needed:
        vals = views[gid].predictions
        pdf_vals[gid] = _kde_values(vals, gid, config, pdf_grid)
        cdf_vals[gid] = _ecdf_values(vals, cdf_grid)
        means[gid] = float(np.mean(vals))
        rates[gid] = float(np.mean(vals >= config.threshold))
        entropies[gid] = _entropy(pdf_vals[gid], pdf_grid)

    def one_pair(pair):
        g0, g1 = pair
        v0, v1 = views[g0].predictions, views[g1].predictions
        pooled = np.concatenate([v0, v1])
        fp = _kde_values(pooled, g0, config, pdf_grid)
        w0 = v0.shape[0] / pooled.shape[0]
        mi = _entropy(fp, pdf_grid) - (
            w0 * entropies[g0] + (1.0 - w0) * entropies[g1]
        )
        return PairMetrics(
            pair=(g0, g1),
            delta_dp_b=float(abs(rates[g0] - rates[g1])),
            delta_dp_c=float(abs(means[g0] - means[g1])),
            abpc=float(np.trapezoid(np.abs(pdf_vals[g0] - pdf_vals[g1]), pdf_grid)),
            abcc=float(np.trapezoid(np.abs(cdf_vals[g0] - cdf_vals[g1]), cdf_grid)),
            mi_nats=max(0.0, float(mi)),
        )

    pair_metrics = tuple(ordered_map(one_pair, pair_list))

    if pred_set.labels is not None:
        acc, ap = accuracy_metrics(pred_set, config.threshold)
    else:
        acc, ap = None, None

    def avg(attr):
        return float(np.mean([getattr(p, attr) for p in pair_metrics]))

    return MetricReport(
        delta_dp_b=avg("delta_dp_b"),
        delta_dp_c=avg("delta_dp_c"),
        abpc=avg("abpc"),
        abcc=avg("abcc"),
        mutual_information=avg("mi_nats"),
        acc=acc,
        ap=ap,
        config=config,
        group_pair=pair_metrics[0].pair if len(pair_metrics) == 1 else "averaged over pairs",
        pairs=pair_metrics,
    )


def pair_report(pred_set, pair=None, config=None):
    """Full :class:`MetricReport` for a single pair of groups."""
    config = config or MetricConfig()
    resolved = _resolve_pair(pred_set, pair)
    return _report_from_pairs(pred_set, config, [resolved])


def multi_group_report(pred_set, config=None):
    """Metric report over all unordered group pairs, averaged arithmetically."""
    config = config or MetricConfig()
    ids = pred_set.group_ids
    pair_list = list(itertools.combinations(ids, 2))
    return _report_from_pairs(pred_set, config, pair_list)
