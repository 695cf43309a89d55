"""Datasets, search bounds, partitions and run configuration.

Everything here is shared by the optimizer, the fitness functions and the
validity index.  Arrays stored on the dataclasses are marked read-only so
instances can be handed to worker threads without copying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigError, InvalidInputError

# rows per distance block in assign_to_centers; bounds peak memory at
# _CHUNK * k * 8 bytes
_CHUNK = 1 << 16


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FeatureDataset:
    """n points by d real features.

    ``reference_labels`` optionally carries externally supplied ground truth
    (e.g. a CSV ``label`` column).  It never takes part in clustering.
    ``weights`` holds positive integer multiplicities when each row stands
    for several identical points (see :meth:`deduplicated`).
    """

    points: np.ndarray
    dim_names: tuple = ()
    reference_labels: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise InvalidInputError(f"points must be a 2-D array, got shape {pts.shape}")
        n, d = pts.shape
        if n < 1 or d < 1:
            raise InvalidInputError(f"dataset needs at least one point and one feature, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("feature values must be finite")
        names = tuple(self.dim_names) if self.dim_names else tuple(f"f{m}" for m in range(d))
        if len(names) != d:
            raise InvalidInputError(f"{len(names)} dimension names for {d} features")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "dim_names", names)
        if self.reference_labels is not None:
            ref = _frozen(self.reference_labels)
            if ref.shape != (n,):
                raise InvalidInputError("reference_labels must have one entry per point")
            object.__setattr__(self, "reference_labels", ref)
        if self.weights is not None:
            wts = _frozen(self.weights, np.int64)
            if wts.shape != (n,) or np.any(wts < 1):
                raise InvalidInputError("weights must be positive integers, one per point")
            object.__setattr__(self, "weights", wts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def total_weight(self) -> int:
        return self.n if self.weights is None else int(self.weights.sum())

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def subset(self, index) -> "FeatureDataset":
        ref = None if self.reference_labels is None else self.reference_labels[index]
        wts = None if self.weights is None else self.weights[index]
        return FeatureDataset(self.points[index], self.dim_names, ref, wts)

    def deduplicated(self) -> "FeatureDataset":
        """Unique rows weighted by multiplicity; reference labels are dropped.

        Sums of squares, means and the DB index of any partition that labels
        identical points alike are unchanged by this compression.
        """
        rows, inverse = np.unique(self.points, axis=0, return_inverse=True)
        base = np.ones(self.n, dtype=np.int64) if self.weights is None else self.weights
        counts = np.bincount(inverse.reshape(-1), weights=base, minlength=rows.shape[0])
        return FeatureDataset(rows, self.dim_names, None, counts.astype(np.int64))


@dataclass(frozen=True, eq=False)
class SearchBounds:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = _frozen(np.atleast_1d(self.lo), np.float64)
        hi = _frozen(np.atleast_1d(self.hi), np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InvalidInputError("lo and hi must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise InvalidInputError("lo must not exceed hi in any dimension")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self) -> int:
        return self.lo.shape[0]


@dataclass(frozen=True, eq=False)
class Partition:
    """Crisp clustering of a dataset with its summary statistics.

    Build instances with :meth:`from_labels`; labels are re-indexed densely so
    no cluster is ever empty.
    """

    labels: np.ndarray
    k_eff: int
    counts: np.ndarray
    cluster_means: np.ndarray
    grand_mean: np.ndarray
    n_bar: float

    @classmethod
    def from_labels(cls, points, labels, weights=None) -> "Partition":
        """Statistics of ``labels`` over ``points``; ``weights`` are row multiplicities."""
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        labels = np.asarray(labels)
        if labels.shape != (points.shape[0],):
            raise InvalidInputError("need exactly one label per point")
        # dense re-indexing keeps the relative order of the original label values
        if labels.dtype.kind in "iu" and labels.size and labels.min() >= 0:
            present = np.bincount(labels) > 0
            remap = np.cumsum(present) - 1
            dense = remap[labels].astype(np.intp)
        else:
            _, dense = np.unique(labels, return_inverse=True)
            dense = dense.reshape(-1).astype(np.intp)
        k = int(dense.max()) + 1
        if weights is None:
            counts = np.bincount(dense, minlength=k)
            weighted = points
            total = points.shape[0]
        else:
            weights = np.asarray(weights)
            counts = np.bincount(dense, weights=weights, minlength=k).astype(np.int64)
            weighted = points * weights[:, None]
            total = int(weights.sum())
        sums = np.stack([np.bincount(dense, weights=weighted[:, m], minlength=k)
                         for m in range(points.shape[1])], axis=1)
        return cls(
            labels=_frozen(dense),
            k_eff=k,
            counts=_frozen(counts),
            cluster_means=_frozen(sums / counts[:, None]),
            grand_mean=_frozen(weighted.sum(axis=0) / total),
            n_bar=total / k,
        )

    @property
    def n(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class MwoConfig:
    """Parameters of one optimizer run.

    ``top_count=None`` resolves to ``max(1, ceil(population / 10))``.
    """

    population: int = 50
    k_max: int = 15
    top_count: Optional[int] = None
    gamma: float = 1.0
    mu: float = 2.0
    activation_threshold: float = 0.5
    max_iter: int = 200
    seed: int = 0
    subsample_cap: int = 16384
    levy_cap: float = 2.0
    levy_resample: bool = True
    stagnation_window: int = 0

    def __post_init__(self):
        if self.top_count is None and isinstance(self.population, int):
            object.__setattr__(self, "top_count", max(1, math.ceil(self.population / 10)))
        self.validate()

    def validate(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.population >= 3, f"population must be >= 3, got {self.population}")
        need(1 <= self.top_count < self.population,
             f"top_count must satisfy 1 <= top_count < population, got {self.top_count}")
        need(self.k_max >= 2, f"k_max must be >= 2, got {self.k_max}")
        need(self.mu > 1, f"mu must be > 1, got {self.mu}")
        need(self.gamma > 0, f"gamma must be > 0, got {self.gamma}")
        need(self.max_iter >= 1, f"max_iter must be >= 1, got {self.max_iter}")
        need(self.levy_cap >= self.gamma, f"levy_cap must be >= gamma, got {self.levy_cap}")
        need(0 < self.activation_threshold <= 1,
             f"activation_threshold must lie in (0, 1], got {self.activation_threshold}")
        need(self.subsample_cap >= 2, f"subsample_cap must be >= 2, got {self.subsample_cap}")
        need(self.stagnation_window >= 0, "stagnation_window must be >= 0")
        need(0 <= self.seed < 2**64, f"seed must be a 64-bit unsigned integer, got {self.seed}")


def compute_bounds(dataset) -> SearchBounds:
    """Per-dimension min/max of the data; flat dimensions are widened by 1."""
    pts = dataset.points if isinstance(dataset, FeatureDataset) else np.asarray(dataset, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.size == 0:
        raise InvalidInputError("cannot compute bounds of an empty dataset")
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    hi = np.where(hi == lo, hi + 1.0, hi)
    return SearchBounds(lo, hi)


def clamp_position(position, bounds: SearchBounds) -> np.ndarray:
    """Clip feature columns into the bounds and the activation column into [0, 1]."""
    position = np.asarray(position, dtype=np.float64)
    if position.ndim != 2 or position.shape[1] != bounds.d + 1:
        raise InvalidInputError(
            f"position must have {bounds.d + 1} columns, got shape {position.shape}")
    out = np.empty_like(position)
    out[:, :-1] = np.clip(position[:, :-1], bounds.lo, bounds.hi)
    out[:, -1] = np.clip(position[:, -1], 0.0, 1.0)
    return out


def nearest_center(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """Index of the Euclidean-nearest center per point, ties to the lowest index."""
    n = points.shape[0]
    out = np.empty(n, dtype=np.intp)
    for start in range(0, n, _CHUNK):
        block = points[start:start + _CHUNK]
        # argmin returns the first minimum, which is the tie rule we want
        out[start:start + _CHUNK] = np.argmin(cdist(block, centers, "sqeuclidean"), axis=1)
    return out


def assign_to_centers(dataset: FeatureDataset, centers) -> Partition:
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim == 1:
        centers = centers[:, None]
    if centers.shape[0] < 1 or centers.shape[1] != dataset.d:
        raise InvalidInputError(f"centers must be k x {dataset.d}, got {centers.shape}")
    if not np.all(np.isfinite(centers)):
        raise InvalidInputError("centers must be finite")
    return Partition.from_labels(dataset.points, nearest_center(dataset.points, centers),
                                 dataset.weights)
