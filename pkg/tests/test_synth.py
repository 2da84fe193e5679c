"""Synthetic data generation, analytic ground truth, convergence machinery."""

import numpy as np
import pytest

from parity_meter import (
    ConfigError,
    DegenerateError,
    DivisionError,
    MixtureSpec,
    NormalSpec,
    SynthSpec,
    UnsupportedSpec,
    abcc,
    abpc,
    analytic_gaussian_abpc,
    convergence_experiment,
    generate,
    ground_truth,
)

TOP_SPEC = SynthSpec(NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), n_per_group=2000, seed=7)


# ---------------------------------------------------------------------------
# spec validation


def test_normal_spec_validation():
    with pytest.raises(ValueError):
        NormalSpec(0.5, 0.0)
    with pytest.raises(ValueError):
        NormalSpec(0.5, -1.0)


def test_mixture_spec_validation():
    with pytest.raises(ValueError):
        MixtureSpec((0.5, 0.6), (NormalSpec(0.2, 0.1), NormalSpec(0.8, 0.1)))
    with pytest.raises(ValueError):
        MixtureSpec((-0.2, 1.2), (NormalSpec(0.2, 0.1), NormalSpec(0.8, 0.1)))
    with pytest.raises(ValueError):
        MixtureSpec((1.0,), (NormalSpec(0.2, 0.1), NormalSpec(0.8, 0.1)))


def test_synth_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), n_per_group=1)
    with pytest.raises(ValueError):
        SynthSpec(NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), seed=-1)


# ---------------------------------------------------------------------------
# generation


def test_generate_shapes_and_groups():
    ps = generate(TOP_SPEC)
    assert ps.n == 4000
    assert ps.group_ids == [0, 1]
    assert int(np.sum(ps.groups == 0)) == 2000
    assert int(np.sum(ps.groups == 1)) == 2000


def test_generate_deterministic():
    a = generate(TOP_SPEC)
    b = generate(TOP_SPEC)
    assert np.array_equal(a.predictions, b.predictions)
    assert np.array_equal(a.groups, b.groups)
    c = generate(SynthSpec(TOP_SPEC.dist0, TOP_SPEC.dist1, 2000, seed=8))
    assert not np.array_equal(a.predictions, c.predictions)


def test_sigmoid_outputs_in_open_interval():
    ps = generate(TOP_SPEC)
    assert np.all(ps.predictions > 0.0)
    assert np.all(ps.predictions < 1.0)


def test_rejection_sampling_range():
    spec = SynthSpec(
        NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), n_per_group=500, seed=3, sigmoid=False
    )
    ps = generate(spec)
    assert np.all(ps.predictions >= 0.0)
    assert np.all(ps.predictions <= 1.0)


def test_rejection_sampling_degenerate_when_mass_outside():
    spec = SynthSpec(
        NormalSpec(5.0, 0.05), NormalSpec(0.5, 0.1), n_per_group=100, seed=1, sigmoid=False
    )
    with pytest.raises(DegenerateError):
        generate(spec)


def test_mixture_generation():
    mix = MixtureSpec((0.5, 0.5), (NormalSpec(0.3, 0.05), NormalSpec(0.7, 0.05)))
    spec = SynthSpec(mix, NormalSpec(0.5, 0.1), n_per_group=400, seed=11)
    ps = generate(spec)
    assert ps.n == 800
    again = generate(spec)
    assert np.array_equal(ps.predictions, again.predictions)


# ---------------------------------------------------------------------------
# ground truth


def test_analytic_gaussian_abpc_formula():
    from scipy.stats import norm

    val = analytic_gaussian_abpc(0.3, 0.4, 0.1)
    assert val == pytest.approx(2.0 * (2.0 * norm.cdf(0.5) - 1.0), abs=1e-15)
    assert analytic_gaussian_abpc(0.4, 0.3, 0.1) == val
    assert analytic_gaussian_abpc(0.5, 0.5, 0.1) == 0.0


def test_ground_truth_identical_distributions():
    spec = SynthSpec(NormalSpec(0.4, 0.1), NormalSpec(0.4, 0.1), n_per_group=100, seed=0)
    truth = ground_truth(spec)
    assert truth.method == "analytic"
    assert truth.abpc == 0.0 and truth.abcc == 0.0 and truth.mi == 0.0


def test_ground_truth_frozen_values():
    truth = ground_truth(TOP_SPEC)
    assert truth.method == "numeric"
    assert truth.abpc == pytest.approx(0.7658498451422155, abs=1e-9)
    assert truth.abcc == pytest.approx(0.024190251804251703, abs=1e-9)
    assert truth.mi == pytest.approx(0.11142148218473658, abs=1e-9)
    assert truth.value("abpc") == truth.abpc


def test_ground_truth_matches_analytic_formula():
    # The sigmoid is strictly monotone, so the density-overlap metric is
    # unchanged by it and the full-line Gaussian formula applies.
    truth = ground_truth(TOP_SPEC)
    assert truth.abpc == pytest.approx(analytic_gaussian_abpc(0.3, 0.4, 0.1), abs=1e-4)


def test_ground_truth_monotone_map_invariance():
    # Wide margin from the interval edges: truncation effects are negligible,
    # so the squashed and clipped variants agree tightly.
    sig = SynthSpec(NormalSpec(0.45, 0.05), NormalSpec(0.55, 0.05), 100, seed=0)
    raw = SynthSpec(NormalSpec(0.45, 0.05), NormalSpec(0.55, 0.05), 100, seed=0, sigmoid=False)
    t_sig = ground_truth(sig)
    t_raw = ground_truth(raw)
    assert t_sig.abpc == pytest.approx(t_raw.abpc, abs=1e-6)


def test_ground_truth_requires_numeric_permission():
    with pytest.raises(UnsupportedSpec):
        ground_truth(TOP_SPEC, allow_numeric=False)


def test_wider_gap_has_larger_truth():
    far = SynthSpec(NormalSpec(0.2, 0.1), NormalSpec(0.4, 0.1), 100, seed=0)
    assert ground_truth(far).abpc > ground_truth(TOP_SPEC).abpc


# ---------------------------------------------------------------------------
# estimates approach truth


def test_estimates_near_truth_at_moderate_n():
    ps = generate(TOP_SPEC)
    truth = ground_truth(TOP_SPEC)
    assert abpc(ps) == pytest.approx(truth.abpc, abs=0.08)
    assert abcc(ps) == pytest.approx(truth.abcc, abs=0.01)


# ---------------------------------------------------------------------------
# convergence experiment


def test_convergence_experiment_shapes_and_determinism():
    spec = SynthSpec(NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), n_per_group=100, seed=5)
    rep1 = convergence_experiment(spec, n_values=(20, 60), trials=3, metrics=("abcc",))
    rep2 = convergence_experiment(spec, n_values=(20, 60), trials=3, metrics=("abcc",))
    assert len(rep1.rows) == 2
    assert [r.n for r in rep1.rows] == [20, 60]
    assert all(r.trials == 3 for r in rep1.rows)
    assert all(r.median_err >= 0 for r in rep1.rows)
    assert [(r.median_err, r.mean_err) for r in rep1.rows] == [
        (r.median_err, r.mean_err) for r in rep2.rows
    ]
    assert "abcc" in rep1.slopes


def test_convergence_validation():
    spec = SynthSpec(NormalSpec(0.3, 0.1), NormalSpec(0.4, 0.1), n_per_group=100, seed=5)
    with pytest.raises(ConfigError):
        convergence_experiment(spec, n_values=(60, 20), trials=3)
    with pytest.raises(ConfigError):
        convergence_experiment(spec, n_values=(20, 60), trials=2)
    with pytest.raises(ConfigError):
        convergence_experiment(spec, n_values=(5, 20), trials=3)
    with pytest.raises(ConfigError):
        convergence_experiment(spec, n_values=(20, 60), trials=3, metrics=("nope",))


def test_convergence_zero_truth_relative_error():
    spec = SynthSpec(NormalSpec(0.4, 0.1), NormalSpec(0.4, 0.1), n_per_group=100, seed=5)
    with pytest.raises(DivisionError):
        convergence_experiment(spec, n_values=(20, 60), trials=3, metrics=("abcc",))
    rep = convergence_experiment(
        spec, n_values=(20, 60), trials=3, metrics=("abcc",), relative=False
    )
    assert rep.relative is False
    assert all(r.median_err >= 0 for r in rep.rows)
