"""One-dimensional optimal transport: couplings, costs, bias density, plots."""

import numpy as np
import pytest
from scipy import stats

from parity_meter import (
    ConfigError,
    SizeError,
    bias_density,
    fit_ecdf,
    fit_kde,
    heatmap,
    optimal_plan,
    overlap_identity,
    render_svg,
    wasserstein1,
)
from parity_meter.core import GroupView
from parity_meter.density import KdeConfig

from conftest import make_rng


def _view(values, gid=0):
    return GroupView(gid, np.asarray(values, dtype=np.float64))


# ---------------------------------------------------------------------------
# W1 distance


def test_wasserstein_matches_scipy():
    rng = make_rng(51)
    for _ in range(25):
        a = rng.uniform(0.0, 1.0, int(rng.integers(2, 50)))
        b = rng.uniform(0.0, 1.0, int(rng.integers(2, 50)))
        assert wasserstein1(a, b) == pytest.approx(
            stats.wasserstein_distance(a, b), abs=1e-12
        )


def test_wasserstein_accepts_views_and_cdfs():
    a = np.array([0.1, 0.2, 0.3])
    b = np.array([0.4, 0.5, 0.6])
    base = wasserstein1(a, b)
    assert wasserstein1(_view(a), _view(b, 1)) == base
    assert wasserstein1(fit_ecdf(_view(a)), fit_ecdf(_view(b, 1))) == base
    assert base == pytest.approx(0.3, abs=1e-15)


def test_wasserstein_triangle_like_shift():
    # Translation by c moves W1 by exactly c.
    a = np.array([0.1, 0.3, 0.5])
    assert wasserstein1(a, a + 0.2) == pytest.approx(0.2, abs=1e-15)


# ---------------------------------------------------------------------------
# couplings


def test_sorted_match_cost_equals_w1():
    rng = make_rng(52)
    for _ in range(30):
        n = int(rng.integers(2, 60))
        a = rng.uniform(0.0, 1.0, n)
        b = rng.uniform(0.0, 1.0, n)
        plan = optimal_plan(a, b, method="sorted_match")
        assert plan.cost() == pytest.approx(wasserstein1(a, b), abs=1e-9)
        assert plan.method == "sorted_match"


def test_sorted_match_is_monotone():
    rng = make_rng(53)
    a = rng.uniform(0.0, 1.0, 40)
    b = rng.uniform(0.0, 1.0, 40)
    plan = optimal_plan(a, b, method="sorted_match")
    assert np.all(np.diff(plan.sources) >= 0)
    assert np.all(np.diff(plan.targets) >= 0)
    assert plan.masses.sum() == pytest.approx(1.0, abs=1e-12)


def test_sorted_match_beats_random_permutations():
    rng = make_rng(54)
    a = rng.uniform(0.0, 1.0, 30)
    b = rng.uniform(0.0, 1.0, 30)
    best = optimal_plan(a, b, method="sorted_match").cost()
    for _ in range(20):
        perm = rng.permutation(30)
        shuffled = float(np.mean(np.abs(np.sort(a) - np.sort(b)[perm])))
        assert shuffled >= best - 1e-12


def test_sorted_match_requires_equal_sizes():
    with pytest.raises(SizeError):
        optimal_plan([0.1, 0.2], [0.3, 0.4, 0.5], method="sorted_match")


def test_quantile_grid_plan():
    rng = make_rng(55)
    a = rng.uniform(0.0, 1.0, 37)
    b = rng.uniform(0.0, 1.0, 83)
    plan = optimal_plan(a, b, resolution=500)
    assert plan.method == "quantile_grid"
    assert plan.resolution == 500
    assert plan.masses.shape == (500,)
    assert np.allclose(plan.masses, 1.0 / 500)
    assert np.all(np.diff(plan.sources) >= 0)
    assert np.all(np.diff(plan.targets) >= 0)


def test_quantile_grid_cost_converges_to_w1():
    rng = make_rng(56)
    a = rng.uniform(0.0, 1.0, 64)
    b = rng.uniform(0.0, 1.0, 64)
    w1 = wasserstein1(a, b)
    coarse = abs(optimal_plan(a, b, resolution=10).cost() - w1)
    fine = abs(optimal_plan(a, b, resolution=20_000).cost() - w1)
    assert fine < coarse
    assert fine < 1e-3


def test_plan_resolution_validation():
    with pytest.raises(ConfigError):
        optimal_plan([0.1, 0.2], [0.3, 0.4], resolution=1)
    with pytest.raises(ValueError):
        optimal_plan([0.1, 0.2], [0.3, 0.4], method="bogus")


# ---------------------------------------------------------------------------
# bias density


def test_bias_density_total_equals_cost():
    rng = make_rng(57)
    a = rng.uniform(0.0, 1.0, 50)
    b = rng.uniform(0.0, 1.0, 50)
    plan = optimal_plan(a, b, method="sorted_match")
    bias = bias_density(plan)
    assert bias.total == plan.cost()
    assert np.array_equal(bias.rho, np.abs(plan.sources - plan.targets) * plan.masses)


def test_identical_groups_diagonal_plan():
    rng = make_rng(58)
    a = rng.uniform(0.0, 1.0, 40)
    plan = optimal_plan(a, a, method="sorted_match")
    assert np.array_equal(plan.sources, plan.targets)
    assert bias_density(plan).total <= 1e-9


def test_point_mass_plan():
    plan = optimal_plan([0.2, 0.2], [0.7, 0.7], method="sorted_match")
    bias = bias_density(plan)
    assert bias.total == pytest.approx(0.5, abs=1e-15)
    assert set(map(tuple, np.column_stack([plan.sources, plan.targets]))) == {(0.2, 0.7)}


# ---------------------------------------------------------------------------
# overlap identity


def test_overlap_identity_consistency():
    rng = make_rng(59)
    x0 = rng.normal(0.4, 0.1, 400).clip(0, 1)
    x1 = rng.normal(0.6, 0.1, 400).clip(0, 1)
    f0 = fit_kde(_view(x0))
    f1 = fit_kde(_view(x1, 1))
    direct, via_overlap = overlap_identity(f0, f1)
    assert direct == pytest.approx(via_overlap, abs=1e-9)
    assert 0.0 <= direct <= 2.0


def test_overlap_identity_identical_density():
    rng = make_rng(60)
    x = rng.normal(0.5, 0.1, 300).clip(0, 1)
    f = fit_kde(_view(x))
    direct, via_overlap = overlap_identity(f, f)
    assert direct == 0.0
    assert via_overlap == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# heatmap and SVG


def test_heatmap_conserves_mass():
    rng = make_rng(61)
    a = rng.uniform(0.0, 1.0, 45)
    b = rng.uniform(0.0, 1.0, 45)
    bias = bias_density(optimal_plan(a, b, method="sorted_match"))
    grid = heatmap(bias, bins=20)
    assert grid.shape == (20, 20)
    assert grid.sum() == pytest.approx(bias.rho.sum(), abs=1e-15)


def test_heatmap_boundary_values_stay_in_grid():
    plan = optimal_plan([0.0, 1.0], [0.0, 1.0], method="sorted_match")
    bias = bias_density(plan)
    grid = heatmap(bias, bins=10)
    # Mass at exactly 1.0 lands in the last bin, not out of bounds.
    assert grid.shape == (10, 10)


def test_point_mass_heatmap_single_cell():
    plan = optimal_plan([0.25, 0.25], [0.75, 0.75], method="sorted_match")
    grid = heatmap(bias_density(plan), bins=10)
    assert np.count_nonzero(grid) == 1
    assert grid[2, 7] > 0


def test_render_svg_deterministic(tmp_path):
    rng = make_rng(62)
    a = rng.uniform(0.0, 1.0, 30)
    b = rng.uniform(0.0, 1.0, 30)
    grid = heatmap(bias_density(optimal_plan(a, b, method="sorted_match")), bins=12)
    p1 = tmp_path / "one.svg"
    p2 = tmp_path / "two.svg"
    render_svg(grid, p1)
    render_svg(grid, p2)
    data = p1.read_bytes()
    assert data == p2.read_bytes()
    text = data.decode()
    assert text.startswith("<svg")
    assert text.count("<rect") >= np.count_nonzero(grid)
