"""Shared fixtures: small hand-checkable prediction sets and RNG helpers."""

import numpy as np
import pytest

from parity_meter import PredictionSet, from_arrays


@pytest.fixture
def mean_matched_set():
    """Two groups with identical means but clearly different shapes.

    Group 0 concentrates at 0.4 with one outlier at 0.9; group 1 sits
    entirely at 0.5.  Mean-difference metrics read zero here while
    distribution-level metrics do not.
    """
    preds = [0.4, 0.4, 0.4, 0.4, 0.5, 0.5, 0.5, 0.5, 0.5, 0.9]
    groups = [0, 0, 0, 0, 1, 1, 1, 1, 1, 0]
    return from_arrays(preds, groups)


@pytest.fixture
def threshold_sensitive_set():
    """Interleaved predictions whose binarised rate gap flips with the cut.

    At threshold 0.5 both groups have one positive of two; at 0.6 only
    group 1 keeps a positive.
    """
    preds = [0.35, 0.45, 0.55, 0.65]
    groups = [0, 1, 0, 1]
    return from_arrays(preds, groups)


@pytest.fixture
def labeled_set():
    """Six labeled predictions with a hand-traceable accuracy and AP."""
    preds = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4]
    groups = [0, 1, 0, 1, 0, 1]
    labels = [1, 0, 1, 1, 0, 0]
    return from_arrays(preds, groups, labels)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def random_two_group_set(seed, n_per_group=200, labeled=False):
    """A reproducible random two-group prediction set on the open unit interval."""
    rng = make_rng(seed)
    p0 = rng.beta(2.0, 3.0, n_per_group)
    p1 = rng.beta(3.0, 2.0, n_per_group)
    preds = np.clip(np.concatenate([p0, p1]), 1e-6, 1.0 - 1e-6)
    groups = np.repeat([0, 1], n_per_group)
    labels = None
    if labeled:
        labels = (rng.uniform(size=2 * n_per_group) < preds).astype(np.int64)
    return from_arrays(preds, groups, labels)
