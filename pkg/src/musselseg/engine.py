"""Mussels wandering optimizer for automatic clustering.

Each mussel holds ``k_max`` candidate centers, one per row, with an extra
activation column.  Rows whose activation reaches the threshold take part in
the clustering, so the number of clusters is searched together with the
center positions.  Per iteration the population is evaluated, sorted, and
every mussel outside the elite moves along the line to the elite mean by a
levy-walk step length.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from . import rng as rng_streams
from .core import (FeatureDataset, MwoConfig, Partition, SearchBounds, assign_to_centers,
                   clamp_position, compute_bounds, nearest_center)
from .errors import ConfigError, InvalidInputError
from .evaluation import WORST_DB, DbParams, db_index
from .fitness import WORST_FITNESS, rf_fitness

log = logging.getLogger(__name__)

THREADS_ENV = "MUSSELSEG_THREADS"


@dataclass(frozen=True, eq=False)
class Mussel:
    position: np.ndarray
    levy: float
    fitness: Optional[float] = None
    partition: Optional[Partition] = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    best_rf: float
    best_db: float
    best_k: int


@dataclass(frozen=True)
class ConvergenceTrace:
    records: tuple = ()

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def best_rf(self) -> np.ndarray:
        return np.array([r.best_rf for r in self.records])


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    labels: np.ndarray
    centers: np.ndarray
    k_eff: int
    rf: float
    db: float
    trace: ConvergenceTrace
    seed: int
    wall_ms: float
    iterations: int
    config: MwoConfig
    db_params: DbParams
    degenerate: bool = False  # True when the best solution collapsed to one cluster


def thread_count(workers: Optional[int] = None) -> int:
    """Worker count from the argument or ``MUSSELSEG_THREADS`` (0 = all cores)."""
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "1").strip() or "1"
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if workers < 0:
        raise ConfigError("thread count must be >= 0")
    return workers or (os.cpu_count() or 1)


def draw_levy(u: float, gamma: float = 1.0, mu: float = 2.0, levy_cap: float = 2.0) -> float:
    """Levy-walk step length ``gamma * (1 - u) ** (-1 / (mu - 1))`` capped at ``levy_cap``."""
    if not 0.0 <= u < 1.0:
        raise InvalidInputError(f"uniform draw must lie in [0, 1), got {u}")
    if mu <= 1 or gamma <= 0:
        raise InvalidInputError("levy walk needs mu > 1 and gamma > 0")
    return min(gamma * (1.0 - u) ** (-1.0 / (mu - 1.0)), levy_cap)


def enforce_activation_floor(position, threshold: float, rng: np.random.Generator) -> np.ndarray:
    """Guarantee at least two active rows.

    When fewer than two activations reach ``threshold`` the two largest
    (ties to the lower row) are redrawn uniformly from ``[threshold, 1]``.
    """
    position = np.asarray(position, dtype=np.float64)
    act = position[:, -1]
    if np.count_nonzero(act >= threshold) >= 2:
        return position
    out = position.copy()
    top2 = np.argsort(-act, kind="stable")[:2]
    out[top2, -1] = rng.uniform(threshold, 1.0, size=top2.size)
    return out


def active_centers(mussel, threshold: float = 0.5) -> np.ndarray:
    position = mussel.position if isinstance(mussel, Mussel) else np.asarray(mussel)
    return position[position[:, -1] >= threshold, :-1]


def init_population(config: MwoConfig, bounds: SearchBounds) -> list:
    """Random population; mussel ``i`` draws from its own ``(seed, "init", 0, i)`` stream."""
    pop = []
    d = bounds.d
    for i in range(config.population):
        g = rng_streams.stream(config.seed, "init", 0, i)
        pos = np.empty((config.k_max, d + 1))
        pos[:, :-1] = g.uniform(bounds.lo, bounds.hi, size=(config.k_max, d))
        pos[:, -1] = g.uniform(0.0, 1.0, size=config.k_max)
        pos = enforce_activation_floor(pos, config.activation_threshold, g)
        levy = draw_levy(g.random(), config.gamma, config.mu, config.levy_cap)
        pop.append(Mussel(position=pos, levy=levy))
    return pop


def evaluate(mussel: Mussel, dataset: FeatureDataset, threshold: float = 0.5) -> Mussel:
    """Cluster ``dataset`` with the mussel's active centers and score it."""
    partition = assign_to_centers(dataset, active_centers(mussel, threshold))
    return replace(mussel, fitness=rf_fitness(dataset, partition), partition=partition)


def top_mean(mussels, t_top: int) -> np.ndarray:
    """Element-wise mean position of the first ``t_top`` (already sorted) mussels."""
    if t_top < 1:
        raise InvalidInputError("t_top must be >= 1")
    return np.mean([m.position for m in mussels[:t_top]], axis=0)


def update_step(mussel: Mussel, elite_mean, levy: float, bounds: SearchBounds,
                threshold: float, rng: np.random.Generator) -> Mussel:
    """Move toward (and possibly past) the elite mean, then restore the constraints."""
    pos = mussel.position + levy * (elite_mean - mussel.position)
    pos = enforce_activation_floor(clamp_position(pos, bounds), threshold, rng)
    return Mussel(position=pos, levy=levy)


def _best_db(dataset, partition, db_params):
    if partition is None or partition.k_eff < 2:
        return WORST_DB
    return db_index(dataset, partition, db_params)


def run(dataset: FeatureDataset, config: MwoConfig, *, db_params: DbParams = DbParams(),
        workers: Optional[int] = None,
        callback: Optional[Callable[[int, list], None]] = None):
    """Optimize a clustering of ``dataset``.

    Returns ``(ClusteringResult, ConvergenceTrace)``.  ``callback(iteration,
    population)`` is called at the end of every iteration with the current
    population.  Results do not depend on ``workers``.
    """
    config.validate()
    if dataset.n < 2:
        raise InvalidInputError("clustering needs at least two points")
    t0 = time.perf_counter()
    workers = thread_count(workers)
    thr = config.activation_threshold
    bounds = compute_bounds(dataset)

    if dataset.n > config.subsample_cap:
        g = rng_streams.stream(config.seed, "subsample")
        idx = np.sort(g.choice(dataset.n, size=config.subsample_cap, replace=False))
        sample = dataset.subset(idx)
    else:
        sample = dataset
    compact = sample.deduplicated()
    if compact.n < sample.n:
        sample = compact

    pop = init_population(config, bounds)
    records = []
    best_key, best_db_cached = None, WORST_DB
    stale = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for it in range(1, config.max_iter + 1):
            todo = [i for i, m in enumerate(pop) if not m.evaluated]
            if pool is not None:
                done = list(pool.map(lambda i: evaluate(pop[i], sample, thr), todo))
            else:
                done = [evaluate(pop[i], sample, thr) for i in todo]
            for i, m in zip(todo, done):
                pop[i] = m

            order = sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))
            best = pop[order[0]]
            if best_key is not best:
                improved = records and best.fitness < records[-1].best_rf
                best_key = best
                best_db_cached = _best_db(sample, best.partition, db_params)
            else:
                improved = False
            records.append(TraceRecord(it, best.fitness, best_db_cached, best.partition.k_eff))
            stale = 0 if improved or it == 1 else stale + 1

            last = it == config.max_iter or (config.stagnation_window and stale >= config.stagnation_window)
            if not last:
                elite = top_mean([pop[i] for i in order], config.top_count)
                for i in order[config.top_count:]:
                    g = rng_streams.stream(config.seed, "update", it, i)
                    levy = pop[i].levy
                    if config.levy_resample:
                        levy = draw_levy(g.random(), config.gamma, config.mu, config.levy_cap)
                    pop[i] = update_step(pop[i], elite, levy, bounds, thr, g)
            if callback is not None:
                callback(it, pop)
            if last:
                break
    finally:
        if pool is not None:
            pool.shutdown()

    centers = active_centers(best, thr)
    raw = nearest_center(dataset.points, centers)
    partition = Partition.from_labels(dataset.points, raw)
    retained = centers[np.unique(raw)]
    rf = rf_fitness(dataset, partition)
    db = _best_db(dataset, partition, db_params)
    degenerate = partition.k_eff < 2
    if degenerate:
        log.warning("best solution collapsed to a single cluster; reporting worst fitness")
    trace = ConvergenceTrace(tuple(records))
    result = ClusteringResult(
        labels=partition.labels,
        centers=retained,
        k_eff=partition.k_eff,
        rf=rf if not degenerate else WORST_FITNESS,
        db=db,
        trace=trace,
        seed=config.seed,
        wall_ms=(time.perf_counter() - t0) * 1000.0,
        iterations=len(records),
        config=config,
        db_params=db_params,
        degenerate=degenerate,
    )
    return result, trace
