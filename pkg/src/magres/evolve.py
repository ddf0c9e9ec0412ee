"""Microbial genetic algorithm and random-search baseline over bounded real genotypes."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from magres.errors import ConfigError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenotypeSpace:
    """Named genes with closed bounds [lo, hi]."""

    names: tuple[str, ...]
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        if not (len(self.names) == len(self.lo) == len(self.hi)):
            raise ConfigError("names and bounds must have equal length")
        if np.any(self.hi <= self.lo):
            raise ConfigError("every gene needs hi > lo")

    @classmethod
    def from_pairs(cls, genes: Sequence[tuple[str, float, float]]) -> "GenotypeSpace":
        names, lo, hi = zip(*genes)
        return cls(tuple(names), np.array(lo, float), np.array(hi, float))

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return self.lo + self.span * rng.random(self.size)

    def contains(self, vec: np.ndarray) -> bool:
        return bool(np.all(vec >= self.lo) and np.all(vec <= self.hi))

    def reflect(self, vec: np.ndarray) -> np.ndarray:
        """Fold values back into bounds by mirroring at each edge."""
        vec = np.asarray(vec, dtype=float)
        period = 2 * self.span
        x = np.mod(vec - self.lo, period)
        x = np.where(x > self.span, period - x, x)
        folded = np.clip(self.lo + x, self.lo, self.hi)
        inside = (vec >= self.lo) & (vec <= self.hi)
        return np.where(inside, vec, folded)

    def mutate(self, vec: np.ndarray, rng: np.random.Generator, rate: float, scale: float = 0.1) -> np.ndarray:
        """Gaussian step (sigma = scale * gene range) on each gene with probability ``rate``."""
        hit = rng.random(self.size) < rate
        step = rng.standard_normal(self.size) * scale * self.span
        return self.reflect(np.where(hit, vec + step, vec))

    def recombine(self, winner: np.ndarray, loser: np.ndarray, rng: np.random.Generator, rate: float) -> np.ndarray:
        take = rng.random(self.size) < rate
        return np.where(take, winner, loser)


EvalFn = Callable[[np.ndarray], object]


def _fitness(eval_fn: EvalFn, vec: np.ndarray) -> tuple[float, float]:
    try:
        result = eval_fn(vec)
    except Exception as exc:  # unstable film, singular readout, ...
        log.warning("evaluation failed (%s: %s); fitness set to inf", type(exc).__name__, exc)
        return np.inf, np.inf
    if hasattr(result, "val_nmse"):
        val, test = result.val_nmse, result.test_nmse
    elif isinstance(result, tuple):
        val, test = result
    else:
        val, test = result, np.nan
    val = float(val)
    return (val if np.isfinite(val) else np.inf), float(test)


@dataclass
class HistoryRow:
    run: int
    tournament: int
    best_val_nmse: float
    best_test_nmse: float
    genome_id: int


@dataclass
class MgaResult:
    best: np.ndarray
    best_val_nmse: float
    best_test_nmse: float
    best_id: int
    history: list[HistoryRow]
    population: np.ndarray
    val: np.ndarray
    test: np.ndarray
    evaluations: int


def mga_run(
    eval_fn: EvalFn,
    space: GenotypeSpace,
    pop: int = 100,
    tournaments: int = 2000,
    mut: float = 0.05,
    rec: float = 0.5,
    deme: float = 0.1,
    seed: int = 0,
    run: int = 0,
    initial: np.ndarray | None = None,
    on_tournament: Callable[[HistoryRow], None] | None = None,
) -> MgaResult:
    """Steady-state microbial GA minimising validation NMSE.

    Each tournament draws an individual and a rival within ``deme * pop``
    places on a ring; the loser takes each winner gene with probability
    ``rec``, then mutates each gene with probability ``mut``, and only the
    loser is re-evaluated. History row 0 describes the initial population.
    """
    if pop < 2:
        raise ConfigError("population must hold at least two individuals")
    rng = np.random.default_rng(seed)
    ids = itertools.count()
    population = (
        np.array([space.sample(rng) for _ in range(pop)]) if initial is None else np.array(initial, float)
    )
    genome_ids = np.array([next(ids) for _ in range(pop)])
    scores = [_fitness(eval_fn, v) for v in population]
    val = np.array([s[0] for s in scores])
    test = np.array([s[1] for s in scores])
    evaluations = pop
    reach = max(1, int(round(deme * pop)))
    offsets = np.concatenate([np.arange(-reach, 0), np.arange(1, reach + 1)])

    def record(t: int) -> HistoryRow:
        i = int(np.argmin(val))
        row = HistoryRow(run, t, float(val[i]), float(test[i]), int(genome_ids[i]))
        history.append(row)
        if on_tournament is not None:
            on_tournament(row)
        return row

    history: list[HistoryRow] = []
    record(0)
    for t in range(1, tournaments + 1):
        a = int(rng.integers(pop))
        b = int((a + rng.choice(offsets)) % pop)
        winner, loser = (a, b) if val[a] <= val[b] else (b, a)
        child = space.recombine(population[winner], population[loser], rng, rec)
        child = space.mutate(child, rng, mut)
        population[loser] = child
        genome_ids[loser] = next(ids)
        val[loser], test[loser] = _fitness(eval_fn, child)
        evaluations += 1
        record(t)
    i = int(np.argmin(val))
    return MgaResult(
        best=population[i].copy(),
        best_val_nmse=float(val[i]),
        best_test_nmse=float(test[i]),
        best_id=int(genome_ids[i]),
        history=history,
        population=population,
        val=val,
        test=test,
        evaluations=evaluations,
    )


@dataclass
class BatchBest:
    batch: int
    seed: int
    best: np.ndarray
    val_nmse: float
    test_nmse: float
    vals: np.ndarray = field(repr=False)


def random_search(
    eval_fn: EvalFn,
    space: GenotypeSpace,
    batch: int = 2000,
    batches: int = 20,
    seeds: Sequence[int] | None = None,
) -> list[BatchBest]:
    """Uniform sampling within bounds; the lowest validation NMSE of each batch."""
    seeds = list(range(batches)) if seeds is None else list(seeds)
    if len(seeds) != batches:
        raise ConfigError("need one seed per batch")
    out = []
    for k, s in enumerate(seeds):
        rng = np.random.default_rng(s)
        vecs = [space.sample(rng) for _ in range(batch)]
        scores = [_fitness(eval_fn, v) for v in vecs]
        vals = np.array([sc[0] for sc in scores])
        i = int(np.argmin(vals))
        out.append(BatchBest(k, s, vecs[i], float(vals[i]), float(scores[i][1]), vals))
    return out
