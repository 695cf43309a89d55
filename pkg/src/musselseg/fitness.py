"""Classic and size-balanced sum-of-squares decompositions and the RF fitness.

Squared deviations are scalar squared Euclidean norms.  The balanced forms
weight every cluster by ``n_bar / n_i`` so a large cluster (a background,
say) cannot dominate the between-class term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FeatureDataset, Partition

#: fitness assigned to degenerate solutions; sorts after every real value
WORST_FITNESS = math.inf

_B_FLOOR = 1e-12


@dataclass(frozen=True)
class SumOfSquaresReport:
    W: float
    B: float
    T: float
    W_bal: float
    B_bal: float
    T_bal: float


def _per_cluster(dataset, partition):
    """Per-cluster within scatter, scatter about the grand mean, and squared
    center offset from the grand mean."""
    points = dataset.points
    labels = partition.labels
    k = partition.k_eff
    dev_w = points - partition.cluster_means[labels]
    dev_t = points - partition.grand_mean
    sq_w = np.einsum("ij,ij->i", dev_w, dev_w)
    sq_t = np.einsum("ij,ij->i", dev_t, dev_t)
    if dataset.weights is not None:
        sq_w = sq_w * dataset.weights
        sq_t = sq_t * dataset.weights
    ss_w = np.bincount(labels, weights=sq_w, minlength=k)
    ss_t = np.bincount(labels, weights=sq_t, minlength=k)
    off = partition.cluster_means - partition.grand_mean
    offset_sq = np.einsum("ij,ij->i", off, off)
    return ss_w, ss_t, offset_sq


def classic_sums(dataset: FeatureDataset, partition: Partition):
    """Return ``(W, B, T)``."""
    ss_w, ss_t, offset_sq = _per_cluster(dataset, partition)
    return float(ss_w.sum()), float(partition.counts @ offset_sq), float(ss_t.sum())


def balanced_sums(dataset: FeatureDataset, partition: Partition):
    """Return ``(W_bal, B_bal, T_bal)``; ``T_bal == W_bal + B_bal`` analytically."""
    ss_w, ss_t, offset_sq = _per_cluster(dataset, partition)
    n_bar = partition.n_bar
    counts = partition.counts
    return (
        float(n_bar * np.sum(ss_w / counts)),
        float(n_bar * offset_sq.sum()),
        float(n_bar * np.sum(ss_t / counts)),
    )


def sums_report(dataset: FeatureDataset, partition: Partition) -> SumOfSquaresReport:
    return SumOfSquaresReport(*classic_sums(dataset, partition), *balanced_sums(dataset, partition))


def rf_fitness(dataset: FeatureDataset, partition: Partition) -> float:
    """Balanced within/between ratio, lower is better.

    Single-cluster partitions and partitions whose centers all coincide get
    :data:`WORST_FITNESS` instead of a division error.
    """
    if partition.k_eff < 2:
        return WORST_FITNESS
    w_bal, b_bal, _ = balanced_sums(dataset, partition)
    if b_bal < _B_FLOOR:
        return WORST_FITNESS
    return w_bal / b_bal
