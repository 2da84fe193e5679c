"""Synthetic two-group score data with known ground-truth disparities.

A :class:`SynthSpec` describes one score distribution per group — a Gaussian
or a Gaussian mixture — mapped into [0, 1] either through the logistic
sigmoid or by rejection sampling inside the unit interval.  Sampling is
deterministic: the spec's seed feeds a counter-based generator, and each
group draws from its own independent stream.

:func:`ground_truth` computes the true distribution-level metrics of a spec
(density area, CDF area, and mutual information) from the transformed
population densities, either in closed form where one exists or by
high-resolution numeric integration.  :func:`convergence_experiment`
measures how fast the sample estimators approach those targets as the sample
size grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from .core import from_arrays
from .errors import ConfigError, DegenerateError, DivisionError, UnsupportedSpec
from .metrics import MetricConfig, abcc, abpc, mutual_information
from .parallel import ordered_map

__all__ = [
    "NormalSpec",
    "MixtureSpec",
    "SynthSpec",
    "GroundTruth",
    "ConvergenceRow",
    "ConvergenceReport",
    "generate",
    "ground_truth",
    "convergence_experiment",
    "analytic_gaussian_abpc",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_METRIC_NAMES = ("abpc", "abcc", "mi")


@dataclass(frozen=True)
class NormalSpec:
    """A Gaussian component N(mean, std**2)."""

    mean: float
    std: float

    def __post_init__(self):
        mean, std = float(self.mean), float(self.std)
        if not math.isfinite(mean):
            raise ConfigError(f"mean must be finite, got {self.mean!r}")
        if not math.isfinite(std) or std <= 0.0:
            raise ConfigError(f"std must be a positive finite number, got {self.std!r}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class MixtureSpec:
    """A finite Gaussian mixture: parallel tuples of weights and components."""

    weights: tuple
    components: tuple

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        components = tuple(self.components)
        if len(weights) == 0 or len(weights) != len(components):
            raise ConfigError("mixture needs equally many weights and components")
        if any(not math.isfinite(w) or w <= 0.0 for w in weights):
            raise ConfigError("mixture weights must be positive")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ConfigError(f"mixture weights must sum to 1, got {sum(weights)!r}")
        for comp in components:
            if not isinstance(comp, NormalSpec):
                raise ConfigError("mixture components must be NormalSpec instances")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "components", components)


@dataclass(frozen=True)
class SynthSpec:
    """Generator spec: one distribution per group plus mapping and seed.

    When ``sigmoid`` is true, raw draws are pushed through the logistic
    sigmoid; otherwise draws are rejection-sampled into [0, 1].
    """

    dist0: object
    dist1: object
    n_per_group: int = 1000
    seed: int = 0
    sigmoid: bool = True

    def __post_init__(self):
        for name in ("dist0", "dist1"):
            d = getattr(self, name)
            if not isinstance(d, (NormalSpec, MixtureSpec)):
                raise ConfigError(f"{name} must be a NormalSpec or MixtureSpec, got {d!r}")
        n = int(self.n_per_group)
        if n < 2:
            raise ConfigError(f"n_per_group must be at least 2, got {self.n_per_group!r}")
        object.__setattr__(self, "n_per_group", n)
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must fit in an unsigned 64-bit integer, got {self.seed!r}")
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "sigmoid", bool(self.sigmoid))


def _components(dist):
    if isinstance(dist, NormalSpec):
        return (1.0,), (dist,)
    return dist.weights, dist.components


def _pdf_raw(dist, x):
    weights, components = _components(dist)
    total = np.zeros_like(x)
    for w, comp in zip(weights, components):
        u = (x - comp.mean) / comp.std
        total += w * np.exp(-0.5 * u * u) / (comp.std * _SQRT_2PI)
    return total


def _cdf_raw(dist, x):
    weights, components = _components(dist)
    total = np.zeros_like(x)
    for w, comp in zip(weights, components):
        total += w * ndtr((x - comp.mean) / comp.std)
    return total


def _draw_raw(dist, n, rng):
    weights, components = _components(dist)
    if len(components) == 1:
        return rng.normal(components[0].mean, components[0].std, size=n)
    which = rng.choice(len(components), size=n, p=np.asarray(weights))
    means = np.array([c.mean for c in components])
    stds = np.array([c.std for c in components])
    return rng.normal(means[which], stds[which])


def _sample_unit(dist, n, rng, sigmoid):
    if sigmoid:
        raw = _draw_raw(dist, n, rng)
        return 1.0 / (1.0 + np.exp(-raw))
    accept_mass = float(_cdf_raw(dist, np.asarray(1.0)) - _cdf_raw(dist, np.asarray(0.0)))
    if accept_mass < 1e-12:
        raise DegenerateError(
            "distribution has negligible mass inside [0, 1]; rejection sampling would not terminate"
        )
    kept = []
    remaining = n
    while remaining > 0:
        batch = max(1024, int(remaining / accept_mass * 1.2) + 16)
        raw = _draw_raw(dist, batch, rng)
        good = raw[(raw >= 0.0) & (raw <= 1.0)]
        kept.append(good[:remaining])
        remaining -= min(remaining, good.shape[0])
    return np.concatenate(kept)


def generate(spec):
    """Draw a two-group :class:`~parity_meter.core.PredictionSet` from *spec*.

    Group 0 and group 1 use independent child streams of the spec seed, so
    results are reproducible and unaffected by how many values other code
    has drawn.
    """
    ss = np.random.SeedSequence(spec.seed)
    child0, child1 = ss.spawn(2)
    n = spec.n_per_group
    v0 = _sample_unit(spec.dist0, n, np.random.Generator(np.random.Philox(child0)), spec.sigmoid)
    v1 = _sample_unit(spec.dist1, n, np.random.Generator(np.random.Philox(child1)), spec.sigmoid)
    groups = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    return from_arrays(np.concatenate([v0, v1]), groups)


def analytic_gaussian_abpc(mean0, mean1, std):
    """Closed-form density area between two equal-spread Gaussians.

    ``integral |f0 - f1| = 2 (2 Phi(|mu0 - mu1| / (2 sigma)) - 1)``; the
    value is invariant under any strictly increasing map applied to both
    distributions, so it is also the population target for sigmoid-mapped
    scores.
    """
    gap = abs(float(mean0) - float(mean1)) / (2.0 * float(std))
    return float(2.0 * (2.0 * ndtr(gap) - 1.0))


@dataclass(frozen=True)
class GroundTruth:
    """Population values of the distribution-level metrics for a spec."""

    abpc: float
    abcc: float
    mi: float
    method: str
    grid: int | None

    def value(self, metric):
        return {"abpc": self.abpc, "abcc": self.abcc, "mi": self.mi}[metric]


def _unit_pdf_cdf(dist, grid, sigmoid):
    """Transformed pdf and cdf of *dist* on the unit-interval grid."""
    if sigmoid:
        pdf = np.zeros_like(grid)
        cdf = np.empty_like(grid)
        interior = slice(1, -1)
        y = grid[interior]
        logit = np.log(y / (1.0 - y))
        pdf[interior] = _pdf_raw(dist, logit) / (y * (1.0 - y))
        cdf[interior] = _cdf_raw(dist, logit)
        cdf[0], cdf[-1] = 0.0, 1.0
        return pdf, cdf
    lo = float(_cdf_raw(dist, np.asarray(0.0)))
    hi = float(_cdf_raw(dist, np.asarray(1.0)))
    mass = hi - lo
    if mass < 1e-12:
        raise DegenerateError("distribution has negligible mass inside [0, 1]")
    pdf = _pdf_raw(dist, grid) / mass
    cdf = (_cdf_raw(dist, grid) - lo) / mass
    return pdf, cdf


def _entropy(pdf, grid):
    integrand = np.where(pdf > 0.0, pdf * np.log(np.maximum(pdf, 1e-300)), 0.0)
    return -float(np.trapezoid(integrand, grid))


def ground_truth(spec, grid=1_000_001, allow_numeric=True):
    """Population metrics for *spec*.

    Identical group distributions have the closed form (0, 0, 0).  All other
    cases are integrated numerically on a uniform unit-interval grid, which
    requires ``allow_numeric``; otherwise :class:`UnsupportedSpec` is
    raised.
    """
    if spec.dist0 == spec.dist1:
        return GroundTruth(0.0, 0.0, 0.0, "analytic", None)
    if not allow_numeric:
        raise UnsupportedSpec(
            "no closed form for distinct group distributions; numeric integration is required"
        )
    grid = int(grid)
    if grid < 1000:
        raise ConfigError(f"ground-truth grid must have at least 1000 points, got {grid}")
    x = np.linspace(0.0, 1.0, grid)
    f0, c0 = _unit_pdf_cdf(spec.dist0, x, spec.sigmoid)
    f1, c1 = _unit_pdf_cdf(spec.dist1, x, spec.sigmoid)
    abpc_true = float(np.trapezoid(np.abs(f0 - f1), x))
    abcc_true = float(np.trapezoid(np.abs(c0 - c1), x))
    pooled = 0.5 * (f0 + f1)
    mi_true = max(
        0.0,
        _entropy(pooled, x) - 0.5 * _entropy(f0, x) - 0.5 * _entropy(f1, x),
    )
    return GroundTruth(abpc_true, abcc_true, mi_true, "numeric", grid)


@dataclass(frozen=True)
class ConvergenceRow:
    """Error summary for one (sample size, metric) cell."""

    n: int
    metric: str
    median_err: float
    mean_err: float
    trials: int


@dataclass(frozen=True)
class ConvergenceReport:
    """Convergence experiment results.

    ``slopes`` maps each metric to the least-squares slope of
    ``log(median error)`` against ``log(n)``; ``relative`` records whether
    errors are relative to the ground truth or absolute.
    """

    rows: tuple
    slopes: dict
    truth: GroundTruth
    n_values: tuple
    metrics: tuple
    trials: int
    relative: bool


def _trial_seed(base_seed, n, trial):
    ss = np.random.SeedSequence((base_seed, n, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def convergence_experiment(
    spec,
    n_values,
    trials,
    metrics=("abpc", "abcc", "mi"),
    config=None,
    relative=True,
):
    """Measure estimator error against ground truth across sample sizes.

    For every sample size in *n_values* (strictly increasing, each >= 10)
    and every trial, a fresh dataset is drawn with a per-trial seed derived
    from ``(spec.seed, n, trial)`` and the requested metrics are estimated
    with *config* (defaults).  Errors are relative to the ground truth
    unless ``relative=False``; a zero ground truth with relative errors
    raises :class:`DivisionError`.
    """
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ConfigError("need at least one sample size")
    if any(n < 10 for n in n_values):
        raise ConfigError(f"sample sizes must be at least 10, got {n_values}")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ConfigError(f"sample sizes must be strictly increasing, got {n_values}")
    trials = int(trials)
    if trials < 3:
        raise ConfigError(f"need at least 3 trials, got {trials}")
    metrics = tuple(str(m).lower() for m in metrics)
    if not metrics or any(m not in _METRIC_NAMES for m in metrics):
        raise ConfigError(f"metrics must be drawn from {_METRIC_NAMES}, got {metrics}")
    config = config or MetricConfig()

    truth = ground_truth(spec)
    if relative:
        for m in metrics:
            if truth.value(m) == 0.0:
                raise DivisionError(
                    f"ground truth for {m} is zero; rerun with relative=False"
                )

    estimators = {
        "abpc": lambda ps: abpc(ps, (0, 1), config),
        "abcc": lambda ps: abcc(ps, (0, 1), config),
        "mi": lambda ps: mutual_information(ps, (0, 1), config),
    }

    def run_trial(task):
        n, trial = task
        trial_spec = replace(spec, n_per_group=n, seed=_trial_seed(spec.seed, n, trial))
        ps = generate(trial_spec)
        out = {}
        for m in metrics:
            err = abs(estimators[m](ps) - truth.value(m))
            out[m] = err / truth.value(m) if relative else err
        return out

    tasks = [(n, t) for n in n_values for t in range(trials)]
    results = ordered_map(run_trial, tasks)

    rows = []
    medians = {m: [] for m in metrics}
    for i, n in enumerate(n_values):
        per_trial = results[i * trials : (i + 1) * trials]
        for m in metrics:
            errs = np.array([r[m] for r in per_trial])
            med = float(np.median(errs))
            rows.append(ConvergenceRow(n, m, med, float(np.mean(errs)), trials))
            medians[m].append(med)

    slopes = {}
    for m in metrics:
        if len(n_values) >= 2:
            logs = np.log(np.maximum(medians[m], 1e-300))
            slopes[m] = float(np.polyfit(np.log(n_values), logs, 1)[0])
        else:
            slopes[m] = float("nan")

    return ConvergenceReport(
        rows=tuple(rows),
        slopes=slopes,
        truth=truth,
        n_values=tuple(n_values),
        metrics=metrics,
        trials=trials,
        relative=relative,
    )
