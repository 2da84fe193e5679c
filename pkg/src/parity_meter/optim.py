"""A toy differentiable trainer for studying parity-regularised models.

The model is plain logistic regression trained by full-batch gradient
descent on cross-entropy plus an optional differentiable parity penalty:

* ``"delta_dp_c"``: smoothed absolute difference of group mean predictions —
  the quantity a strategic model can drive to zero while remaining unfair at
  the distribution level;
* ``"abpc_kde"``: smoothed area between fixed-bandwidth Gaussian kernel
  density estimates of the two groups' predictions, evaluated on a uniform
  grid with trapezoid weights.

Both penalties are differentiable everywhere (the absolute value is
smoothed as ``sqrt(u**2 + 1e-12)``) and ship with exact analytic gradients;
the test suite checks them against central finite differences.

Gradient descent optionally halves the learning rate whenever a step would
increase the loss, which makes the recorded loss trajectory non-increasing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import from_arrays
from .density import KdeConfig
from .errors import ConfigError, DivergenceError, GroupError, SchemaError
from .metrics import MetricConfig, pair_report

__all__ = [
    "ToyModel",
    "TrainConfig",
    "TrajectoryPoint",
    "loss_and_grad",
    "train",
    "read_training_csv",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SMOOTH_EPS = 1e-12
_PENALTIES = ("none", "delta_dp_c", "abpc_kde")


@dataclass
class ToyModel:
    """Logistic-regression parameters."""

    weights: np.ndarray
    bias: float

    def logits(self, features):
        # Overflow to inf is tolerated; train() detects the non-finite loss.
        with np.errstate(over="ignore"):
            return features @ self.weights + self.bias

    def predict_proba(self, features):
        return expit(self.logits(features))


@dataclass(frozen=True)
class TrainConfig:
    """Trainer configuration.

    ``lam`` scales the parity penalty; ``bandwidth`` and ``penalty_grid``
    control the KDE penalty (fixed bandwidth, uniform grid on [0, 1]).
    ``metric_every`` controls how often a trajectory point is recorded (the
    final epoch is always recorded).
    """

    penalty: str = "none"
    lam: float = 0.0
    bandwidth: float = 0.05
    penalty_grid: int = 100
    learning_rate: float = 0.5
    epochs: int = 200
    seed: int = 0
    halve_on_increase: bool = True
    metric_every: int = 1

    def __post_init__(self):
        if self.penalty not in _PENALTIES:
            raise ConfigError(f"penalty must be one of {_PENALTIES}, got {self.penalty!r}")
        checks = [
            ("lam", float(self.lam), self.lam >= 0.0),
            ("bandwidth", float(self.bandwidth), self.bandwidth > 0.0),
            ("penalty_grid", int(self.penalty_grid), int(self.penalty_grid) >= 2),
            ("learning_rate", float(self.learning_rate), self.learning_rate > 0.0),
            ("epochs", int(self.epochs), int(self.epochs) >= 1),
            ("metric_every", int(self.metric_every), int(self.metric_every) >= 1),
        ]
        for name, value, ok in checks:
            if not ok or (isinstance(value, float) and not math.isfinite(value)):
                raise ConfigError(f"{name} is out of range: {getattr(self, name)!r}")
            object.__setattr__(self, name, value)
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "seed", seed)


@dataclass(frozen=True)
class TrajectoryPoint:
    """Full metric report on the training predictions after one epoch.

    The report is computed at a lightweight configuration (fixed penalty
    bandwidth, reduced grids) so that per-epoch tracking stays cheap; final
    analyses can always re-score the returned model at default settings.
    """

    epoch: int
    loss: float
    report: object

    @property
    def acc(self):
        return self.report.acc

    @property
    def delta_dp_c(self):
        return self.report.delta_dp_c

    @property
    def abpc(self):
        return self.report.abpc

    @property
    def abcc(self):
        return self.report.abcc


def _validate_batch(batch):
    features, labels, groups = batch
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    groups = np.asarray(groups)
    if features.ndim != 2:
        raise SchemaError("features must be a 2-d array")
    n = features.shape[0]
    if labels.shape != (n,) or groups.shape != (n,):
        raise SchemaError(
            f"length mismatch: {n} feature rows vs {labels.shape[0]} labels and {groups.shape[0]} group ids"
        )
    if n == 0:
        raise SchemaError("training batch has no rows")
    if not np.all(np.isfinite(features)):
        raise SchemaError("features contain non-finite values")
    if not np.all((labels == 0) | (labels == 1)):
        raise SchemaError("labels must be 0 or 1")
    return features, labels.astype(np.float64), groups.astype(np.int64)


def _smooth_abs(u):
    return math.sqrt(u * u + _SMOOTH_EPS)


def _penalty_and_grad_wrt_p(p, mask0, mask1, config):
    """Parity penalty value and its gradient with respect to the predictions."""
    if config.penalty == "delta_dp_c":
        n0 = int(mask0.sum())
        n1 = int(mask1.sum())
        gap = float(p[mask0].mean() - p[mask1].mean())
        value = _smooth_abs(gap)
        dvalue = gap / value if value > 0.0 else 0.0
        grad = np.zeros_like(p)
        grad[mask0] = dvalue / n0
        grad[mask1] = -dvalue / n1
        return value, grad

    # abpc_kde: smoothed area between fixed-bandwidth KDEs on a uniform grid.
    h = config.bandwidth
    grid = np.linspace(0.0, 1.0, config.penalty_grid)
    step = grid[1] - grid[0]
    trap_w = np.full(config.penalty_grid, step)
    trap_w[0] = trap_w[-1] = step / 2.0

    grad = np.zeros_like(p)
    densities = []
    kernels = []
    for mask in (mask0, mask1):
        pg = p[mask]
        u = (grid[:, None] - pg[None, :]) / h
        phi = np.exp(-0.5 * u * u) / _SQRT_2PI
        densities.append(phi.sum(axis=1) / (pg.shape[0] * h))
        kernels.append((mask, u, phi, pg.shape[0]))

    diff = densities[0] - densities[1]
    smooth = np.sqrt(diff * diff + _SMOOTH_EPS)
    value = float(np.sum(trap_w * smooth))
    coef = trap_w * (diff / smooth)
    for sign, (mask, u, phi, count) in zip((1.0, -1.0), kernels):
        # d density_k / d p_i = u_ki * phi(u_ki) / (count * h**2)
        grad[mask] = sign * (coef @ (u * phi)) / (count * h * h)
    return value, grad


def loss_and_grad(model, batch, config):
    """Loss and its exact gradient at *model* on the full batch.

    Returns ``(loss, grad)`` where ``grad`` stacks the weight gradient and,
    in the last slot, the bias gradient.
    """
    features, labels, groups = _validate_batch(batch)
    if config.penalty != "none":
        ids = np.unique(groups)
        if ids.shape[0] != 2:
            raise GroupError(
                f"parity penalties need exactly two groups, got {ids.shape[0]}"
            )
    n = features.shape[0]
    z = model.logits(features)
    p = expit(z)
    # Cross-entropy written on the logits: softplus(z) - y*z is exact and
    # stable, and its z-gradient is simply p - y.
    # Overflowing logits are tolerated here: a non-finite loss is caught by
    # the caller (train raises DivergenceError), so suppress the warnings.
    with np.errstate(invalid="ignore", over="ignore"):
        loss = float(np.mean(np.logaddexp(0.0, z) - labels * z))
    dloss_dz = (p - labels) / n

    if config.penalty != "none" and config.lam > 0.0:
        ids = np.unique(groups)
        mask0 = groups == ids[0]
        mask1 = groups == ids[1]
        value, dpen_dp = _penalty_and_grad_wrt_p(p, mask0, mask1, config)
        loss += config.lam * value
        dloss_dz = dloss_dz + config.lam * dpen_dp * p * (1.0 - p)

    grad = np.empty(features.shape[1] + 1)
    grad[:-1] = features.T @ dloss_dz
    grad[-1] = float(np.sum(dloss_dz))
    return loss, grad


def _loss_only(weights, bias, features, labels, groups, config):
    return loss_and_grad(ToyModel(weights, bias), (features, labels, groups), config)[0]


def _snapshot(epoch, loss, p, labels, groups, config):
    preds = from_arrays(p, groups, labels.astype(np.int64))
    metric_cfg = MetricConfig(
        pdf_grid=512,
        cdf_grid=2048,
        kde=KdeConfig(config.bandwidth),
    )
    return TrajectoryPoint(epoch, loss, pair_report(preds, config=metric_cfg))


def train(batch, config):
    """Train a :class:`ToyModel` by full-batch gradient descent.

    Returns ``(model, trajectory)`` where the trajectory is a list of
    :class:`TrajectoryPoint` recorded every ``config.metric_every`` epochs
    (plus the final epoch).  With ``halve_on_increase`` the learning rate is
    halved until a step stops increasing the loss, so recorded losses are
    non-increasing.  Raises :class:`DivergenceError` if the loss becomes
    non-finite.
    """
    features, labels, groups = _validate_batch(batch)
    if np.unique(groups).shape[0] != 2:
        raise GroupError("the toy trainer expects exactly two groups")

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed)))
    weights = 0.01 * rng.standard_normal(features.shape[1])
    bias = 0.0
    lr = config.learning_rate

    trajectory = []
    for epoch in range(1, config.epochs + 1):
        model = ToyModel(weights, bias)
        loss, grad = loss_and_grad(model, (features, labels, groups), config)
        if not math.isfinite(loss):
            raise DivergenceError(f"loss became non-finite at epoch {epoch}", epoch)

        new_w = weights - lr * grad[:-1]
        new_b = bias - lr * grad[-1]
        new_loss = _loss_only(new_w, new_b, features, labels, groups, config)
        if config.halve_on_increase:
            halvings = 0
            while (not math.isfinite(new_loss) or new_loss > loss) and halvings < 60:
                lr /= 2.0
                halvings += 1
                new_w = weights - lr * grad[:-1]
                new_b = bias - lr * grad[-1]
                new_loss = _loss_only(new_w, new_b, features, labels, groups, config)
            if not math.isfinite(new_loss) or new_loss > loss:
                new_w, new_b, new_loss = weights, bias, loss
        weights, bias = new_w, new_b

        if epoch % config.metric_every == 0 or epoch == config.epochs:
            if not math.isfinite(new_loss):
                raise DivergenceError(f"loss became non-finite at epoch {epoch}", epoch)
            p = expit(features @ weights + bias)
            trajectory.append(_snapshot(epoch, new_loss, p, labels, groups, config))

    return ToyModel(weights, bias), trajectory


def read_training_csv(path):
    """Read a training CSV with columns ``x0..x{d-1}``, ``y_true``, ``s``.

    Returns ``(features, labels, groups)`` arrays.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file, expected a CSV header")
        fields = list(reader.fieldnames)
        feature_cols = sorted(
            (f for f in fields if f.startswith("x") and f[1:].isdigit()),
            key=lambda f: int(f[1:]),
        )
        if not feature_cols:
            raise SchemaError(f"{path}: no feature columns x0..x{{d-1}} found")
        expected = [f"x{i}" for i in range(len(feature_cols))]
        if feature_cols != expected:
            raise SchemaError(f"{path}: feature columns must be contiguous x0..x{{d-1}}")
        for required in ("y_true", "s"):
            if required not in fields:
                raise SchemaError(f"{path}: missing required column '{required}'")

        rows, labels, groups = [], [], []
        for i, row in enumerate(reader):
            try:
                rows.append([float(row[c]) for c in feature_cols])
                labels.append(int(float(row["y_true"])))
                groups.append(int(float(row["s"])))
            except (TypeError, ValueError):
                raise SchemaError(f"{path}: row {i} has a non-numeric cell") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return np.asarray(rows), np.asarray(labels), np.asarray(groups)
