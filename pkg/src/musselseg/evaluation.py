"""Davies-Bouldin validity index and a fixed-k K-means baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import FeatureDataset, Partition, nearest_center
from .errors import InvalidInputError

#: value taken by the index when two cluster centers coincide
WORST_DB = math.inf

_D_FLOOR = 1e-12


@dataclass(frozen=True)
class DbParams:
    q_order: int = 2  # scatter order
    t_order: int = 2  # Minkowski order of the center distance

    def __post_init__(self):
        if self.q_order < 1 or self.t_order < 1:
            raise InvalidInputError("q_order and t_order must be >= 1")


def cluster_scatter(points, center, q: int = 2) -> float:
    """q-th order mean of Euclidean distances from ``center``."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.shape[0] == 0:
        raise InvalidInputError("scatter of an empty cluster is undefined")
    dist = np.linalg.norm(points - np.asarray(center, dtype=np.float64), axis=1)
    return float(np.mean(dist ** q) ** (1.0 / q))


def center_distance(c_i, c_j, t: int = 2) -> float:
    diff = np.abs(np.asarray(c_i, dtype=np.float64) - np.asarray(c_j, dtype=np.float64))
    return float(np.sum(diff ** t) ** (1.0 / t))


def _scatters(dataset, partition, q):
    dev = dataset.points - partition.cluster_means[partition.labels]
    dist_q = np.sqrt(np.einsum("ij,ij->i", dev, dev)) ** q
    if dataset.weights is not None:
        dist_q = dist_q * dataset.weights
    mean_q = np.bincount(partition.labels, weights=dist_q, minlength=partition.k_eff) / partition.counts
    return mean_q ** (1.0 / q)


def db_index(dataset: FeatureDataset, partition: Partition, params: DbParams = DbParams()) -> float:
    """Davies-Bouldin index of ``partition`` (lower is better).

    Any pair of coincident centers makes the result :data:`WORST_DB`.
    """
    k = partition.k_eff
    if k < 2:
        raise InvalidInputError("DB undefined for k < 2")
    s = _scatters(dataset, partition, params.q_order)
    means = partition.cluster_means
    diff = np.abs(means[:, None, :] - means[None, :, :])
    dist = np.sum(diff ** params.t_order, axis=2) ** (1.0 / params.t_order)
    off = ~np.eye(k, dtype=bool)
    if np.any(dist[off] < _D_FLOOR):
        return WORST_DB
    np.fill_diagonal(dist, np.inf)
    ratio = (s[:, None] + s[None, :]) / dist
    return float(ratio.max(axis=1).mean())


def _lloyd(points, centers, max_iter):
    k = centers.shape[0]
    labels = None
    for _ in range(max_iter):
        new_labels = nearest_center(points, centers)
        counts = np.bincount(new_labels, minlength=k)
        if np.any(counts == 0):
            # re-seed each empty cluster at the point currently farthest from its center
            dist = np.sum((points - centers[new_labels]) ** 2, axis=1)
            for c, far in zip(np.flatnonzero(counts == 0), np.argsort(-dist, kind="stable")):
                centers[c] = points[far]
                new_labels[far] = c
            counts = np.bincount(new_labels, minlength=k)
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for m in range(points.shape[1]):
            centers[:, m] = np.bincount(labels, weights=points[:, m], minlength=k) / counts
    return labels


def kmeans_baseline(dataset: FeatureDataset, k: int, restarts: int = 5, max_iter: int = 100,
                    rng=None) -> Partition:
    """Best-of-``restarts`` Lloyd clustering, scored by within sum of squares.

    ``rng`` may be a ``numpy.random.Generator`` or an integer seed.
    """
    if k < 2 or k > dataset.n:
        raise InvalidInputError(f"k must satisfy 2 <= k <= n={dataset.n}, got {k}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    points = dataset.points
    best, best_w = None, math.inf
    for _ in range(max(1, restarts)):
        start = rng.choice(dataset.n, size=k, replace=False)
        labels = _lloyd(points, points[start].copy(), max_iter)
        part = Partition.from_labels(points, labels)
        dev = points - part.cluster_means[part.labels]
        w = float(np.einsum("ij,ij->", dev, dev))
        if w < best_w:
            best, best_w = part, w
    return best
