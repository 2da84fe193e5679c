"""One-dimensional optimal transport between group score distributions.

For distributions on the line with absolute-difference cost, the optimal
coupling is the monotone (quantile) coupling and the transport cost equals
the area between the CDFs.  :func:`wasserstein1` computes that cost exactly
from the merged breakpoints of the two empirical CDFs; :func:`optimal_plan`
materialises the coupling itself, either by pairing sorted samples
one-to-one (equal sizes) or by pairing quantiles on a uniform grid.

:func:`bias_density` turns a plan into per-coupling contributions
``rho = |x - y| * mass``, which localise where the transport cost — i.e. the
distribution-level disparity — comes from.  :func:`overlap_identity`
evaluates the area between two densities both directly and through the
overlap formula ``area0 + area1 - 2 * overlap``; the two routes agree to
rounding error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import cdf_area_between
from .errors import ConfigError, SizeError

__all__ = [
    "TransportPlan",
    "BiasDensity",
    "wasserstein1",
    "optimal_plan",
    "bias_density",
    "overlap_identity",
    "heatmap",
    "render_svg",
    "SVG_RAMP",
]


def _values(sample):
    """Accept a GroupView, an EmpiricalCdf, or a bare array of scores."""
    arr = getattr(sample, "sorted_values", None)
    if arr is None:
        arr = getattr(sample, "predictions", sample)
    return np.asarray(arr, dtype=np.float64)


@dataclass(frozen=True)
class TransportPlan:
    """A discrete coupling between two score samples.

    ``sources``, ``targets``, and ``masses`` are parallel arrays; every mass
    is positive and the masses sum to one.  ``method`` records how the plan
    was built (``"sorted_match"`` or ``"quantile_grid"``); ``resolution`` is
    the quantile-grid size, or None for sorted matching.
    """

    sources: np.ndarray
    targets: np.ndarray
    masses: np.ndarray
    method: str
    resolution: int | None

    @property
    def size(self):
        return int(self.sources.shape[0])

    def cost(self):
        """Total transport cost sum(|x - y| * mass)."""
        return float(np.sum(np.abs(self.sources - self.targets) * self.masses))


@dataclass(frozen=True)
class BiasDensity:
    """Per-coupling disparity contributions ``rho = |x - y| * mass``."""

    sources: np.ndarray
    targets: np.ndarray
    rho: np.ndarray
    total: float


def wasserstein1(sample0, sample1):
    """Exact 1-Wasserstein distance between two empirical distributions."""
    return cdf_area_between(_values(sample0), _values(sample1))


def _quantiles(sorted_values, probs):
    """Left-continuous inverse CDF: smallest v with F(v) >= u."""
    n = sorted_values.shape[0]
    cum = np.arange(1, n + 1) / n
    idx = np.searchsorted(cum, probs, side="left")
    return sorted_values[np.minimum(idx, n - 1)]


def optimal_plan(sample0, sample1, resolution=1000, method="quantile_grid"):
    """Build the monotone optimal coupling between two samples.

    ``method="quantile_grid"`` pairs the two inverse CDFs at the midpoints
    ``u_k = (k + 1/2) / resolution``, each with mass ``1/resolution``.
    ``method="sorted_match"`` pairs sorted samples index by index with mass
    ``1/N``; it requires equal sample sizes and its cost reproduces
    :func:`wasserstein1` exactly.
    """
    v0 = np.sort(_values(sample0))
    v1 = np.sort(_values(sample1))
    if method == "sorted_match":
        if v0.shape[0] != v1.shape[0]:
            raise SizeError(
                f"sorted matching needs equal sample sizes, got {v0.shape[0]} and {v1.shape[0]}"
            )
        n = v0.shape[0]
        masses = np.full(n, 1.0 / n)
        return TransportPlan(v0, v1, masses, "sorted_match", None)
    if method != "quantile_grid":
        raise ConfigError(
            f"unknown plan method {method!r}; expected 'quantile_grid' or 'sorted_match'"
        )
    resolution = int(resolution)
    if resolution < 2:
        raise ConfigError(f"quantile grid needs resolution >= 2, got {resolution}")
    probs = (np.arange(resolution) + 0.5) / resolution
    sources = _quantiles(v0, probs)
    targets = _quantiles(v1, probs)
    masses = np.full(resolution, 1.0 / resolution)
    return TransportPlan(sources, targets, masses, "quantile_grid", resolution)


def bias_density(plan):
    """Per-coupling disparity contributions of a :class:`TransportPlan`.

    The total equals the plan's transport cost exactly, so the cells show
    where along the score axis the disparity is generated.
    """
    rho = np.abs(plan.sources - plan.targets) * plan.masses
    return BiasDensity(
        sources=plan.sources,
        targets=plan.targets,
        rho=rho,
        total=float(np.sum(rho)),
    )


def overlap_identity(density0, density1, points=5000):
    """Area between two densities, directly and via the overlap formula.

    Returns ``(direct, via_overlap)`` where ``direct = integral |f0 - f1|``
    and ``via_overlap = integral f0 + integral f1 - 2 integral min(f0, f1)``,
    all on a uniform grid over [0, 1].  The identity holds pointwise, so the
    two results agree to floating-point rounding.
    """
    points = int(points)
    if points < 2:
        raise ConfigError(f"need at least 2 grid points, got {points}")
    grid = np.linspace(0.0, 1.0, points)
    f0 = getattr(density0, "evaluate", density0)(grid)
    f1 = getattr(density1, "evaluate", density1)(grid)
    f0 = np.asarray(f0, dtype=np.float64)
    f1 = np.asarray(f1, dtype=np.float64)
    direct = float(np.trapezoid(np.abs(f0 - f1), grid))
    via = float(
        np.trapezoid(f0, grid)
        + np.trapezoid(f1, grid)
        - 2.0 * np.trapezoid(np.minimum(f0, f1), grid)
    )
    return direct, via


def heatmap(bias, bins=100):
    """Accumulate a :class:`BiasDensity` onto a ``bins x bins`` grid over [0,1]^2.

    Cell ``[i, j]`` collects the rho mass of couplings whose source falls in
    bin ``i`` and target in bin ``j``; the grid total equals ``bias.total``.
    """
    bins = int(bins)
    if bins < 1:
        raise ConfigError(f"need at least 1 heatmap bin, got {bins}")
    xi = np.minimum((bias.sources * bins).astype(np.int64), bins - 1)
    yi = np.minimum((bias.targets * bins).astype(np.int64), bins - 1)
    grid = np.zeros((bins, bins))
    np.add.at(grid, (xi, yi), bias.rho)
    return grid


# 10-step sequential ramp (light yellow to dark red) used for SVG heatmaps.
SVG_RAMP = (
    "#ffffcc",
    "#ffeda0",
    "#fed976",
    "#feb24c",
    "#fd8d3c",
    "#fc4e2a",
    "#e31a1c",
    "#bd0026",
    "#800026",
    "#4d0019",
)


def render_svg(grid, path, size=512):
    """Render a heatmap grid as a standalone SVG file.

    Non-empty cells are coloured by a 10-step ramp scaled to the maximum
    cell value; the source axis runs left to right and the target axis
    bottom to top.  Output is deterministic for identical inputs.
    """
    grid = np.asarray(grid, dtype=np.float64)
    bins = grid.shape[0]
    vmax = float(grid.max()) if grid.size else 0.0
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {bins} {bins}">',
        f'<rect width="{bins}" height="{bins}" fill="#ffffff"/>',
    ]
    if vmax > 0.0:
        for i in range(bins):
            for j in range(bins):
                v = grid[i, j]
                if v <= 0.0:
                    continue
                step = min(int(v / vmax * len(SVG_RAMP)), len(SVG_RAMP) - 1)
                lines.append(
                    f'<rect x="{i}" y="{bins - 1 - j}" width="1" height="1" '
                    f'fill="{SVG_RAMP[step]}"/>'
                )
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
