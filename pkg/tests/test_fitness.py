import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from musselseg.core import FeatureDataset, Partition
from musselseg.fitness import WORST_FITNESS, balanced_sums, classic_sums, rf_fitness, sums_report

import oracles


def make(points, labels):
    pts = np.asarray(points, dtype=float)
    return FeatureDataset(pts), Partition.from_labels(pts, labels)


def random_instance(rng, n_max=60, d_max=4, k_max=6):
    n = int(rng.integers(2, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    pts = rng.normal(scale=rng.uniform(0.1, 50), size=(n, d)) + rng.uniform(-100, 100, size=d)
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)
    return pts, labels


class TestClassic:
    def test_hand_example(self):
        W, B, T = classic_sums(*make([[0], [2], [10], [12]], [0, 0, 1, 1]))
        assert (W, B, T) == pytest.approx((4.0, 100.0, 104.0), rel=1e-12)

    def test_singletons(self):
        W, B, T = classic_sums(*make([[0], [3], [7]], [0, 1, 2]))
        assert W == 0.0 and B == pytest.approx(T)

    def test_single_cluster(self):
        W, B, T = classic_sums(*make([[0], [3], [7]], [0, 0, 0]))
        assert B == pytest.approx(0.0, abs=1e-12) and W == pytest.approx(T)


class TestBalanced:
    def test_equal_sizes_match_classic(self):
        wb, bb, tb = balanced_sums(*make([[0], [2], [10], [12]], [0, 0, 1, 1]))
        assert (wb, bb, tb) == pytest.approx((4.0, 100.0, 104.0), rel=1e-12)

    def test_unequal_sizes(self):
        wb, bb, tb = balanced_sums(*make([[0], [10], [12]], [0, 1, 1]))
        g = 22 / 3
        assert wb == pytest.approx(1.5)
        assert bb == pytest.approx(1.5 * (g ** 2 + (11 - g) ** 2), rel=1e-12)
        assert bb == pytest.approx(100.8333333, rel=1e-8)
        assert tb == pytest.approx(wb + bb, rel=1e-12)

    def test_singletons(self):
        assert balanced_sums(*make([[0], [3], [7]], [0, 1, 2]))[0] == 0.0


class TestRF:
    def test_two_singletons(self):
        assert rf_fitness(*make([[0], [2]], [0, 1])) == 0.0

    def test_hand_example(self):
        assert rf_fitness(*make([[0], [2], [10], [12]], [0, 0, 1, 1])) == pytest.approx(0.04, rel=1e-12)

    def test_single_cluster_sentinel(self):
        assert rf_fitness(*make([[0], [2], [3]], [0, 0, 0])) == WORST_FITNESS
        assert math.isinf(WORST_FITNESS) and WORST_FITNESS > 0

    def test_coincident_means_sentinel(self):
        # two clusters with identical means give B' = 0
        assert rf_fitness(*make([[-1], [1], [-2], [2]], [0, 0, 1, 1])) == WORST_FITNESS


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_identities_and_nonnegativity(seed):
    rng = np.random.default_rng(seed)
    r = sums_report(*make(*random_instance(rng)))
    assert r.T == pytest.approx(r.W + r.B, rel=1e-9, abs=1e-9)
    assert r.T_bal == pytest.approx(r.W_bal + r.B_bal, rel=1e-9, abs=1e-9)
    assert min(r.W, r.B, r.T, r.W_bal, r.B_bal, r.T_bal) >= 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    pts, labels = random_instance(rng, n_max=30)
    got = sums_report(*make(pts, labels))
    want = oracles.sums(pts.tolist(), labels.tolist())
    for g, w in zip((got.W, got.B, got.T, got.W_bal, got.B_bal, got.T_bal), want):
        assert g == pytest.approx(w, rel=1e-9, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1e3, 1e3), st.floats(0.01, 100))
def test_translation_and_scale(seed, shift, scale):
    rng = np.random.default_rng(seed)
    pts, labels = random_instance(rng)
    base = sums_report(*make(pts, labels))
    moved = sums_report(*make(pts + shift, labels))
    scaled = sums_report(*make(pts * scale, labels))
    for f in ("W", "B", "T", "W_bal", "B_bal", "T_bal"):
        ref = getattr(base, f)
        tol = 1e-9 * max(ref, base.T)
        assert getattr(moved, f) == pytest.approx(ref, rel=1e-9, abs=tol * 10)
        assert getattr(scaled, f) == pytest.approx(ref * scale ** 2, rel=1e-9, abs=tol * 10 * scale ** 2)
    rf = rf_fitness(*make(pts, labels))
    if math.isfinite(rf):
        assert rf_fitness(*make(pts * scale, labels)) == pytest.approx(rf, rel=1e-9, abs=1e-12)


def test_weighted_equals_expanded():
    rng = np.random.default_rng(3)
    pts = rng.integers(0, 5, size=(40, 2)).astype(float)
    labels = (pts[:, 0] > 2).astype(int)
    full = sums_report(*make(pts, labels))
    compact = FeatureDataset(pts).deduplicated()
    c_labels = (compact.points[:, 0] > 2).astype(int)
    part = Partition.from_labels(compact.points, c_labels, compact.weights)
    small = sums_report(compact, part)
    for f in ("W", "B", "T", "W_bal", "B_bal", "T_bal"):
        assert getattr(small, f) == pytest.approx(getattr(full, f), rel=1e-12)
