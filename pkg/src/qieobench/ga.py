"""Generational GA with (mu + lambda) truncation survival.

Operators act on batches: a population is an ``(n, m)`` ``uint8`` bit
matrix plus an ``(n,)`` fitness vector. ``NaN`` fitness marks a member that
has not been evaluated yet.

The wrappers at the bottom (``Individual``, ``binary_tournament`` ...) are
the per-individual forms of the same operators, used by the tests and
handy interactively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import random_bitstring
from .objectives import Evaluator, ProblemSpec
from .trial import RunConfig, RunTracker, TrialResult

ALGORITHM = "ga"


def _require_evaluated(fitness: np.ndarray) -> None:
    if np.any(np.isnan(fitness)):
        raise ValueError("selection needs every member to be evaluated")


def tournament_indices(fitness: np.ndarray, rng: np.random.Generator, k: int | None = None) -> np.ndarray:
    """Winners of ``k`` binary tournaments (default ``len(fitness)``).

    Both contestants are drawn uniformly with replacement; the lower fitness
    wins and a tie goes to the first draw.
    """
    fitness = np.asarray(fitness, dtype=np.float64)
    if fitness.size == 0:
        raise ValueError("cannot select from an empty population")
    _require_evaluated(fitness)
    n = fitness.shape[0]
    k = n if k is None else k
    first = rng.integers(n, size=k)
    second = rng.integers(n, size=k)
    return np.where(fitness[second] < fitness[first], second, first)


def crossover_pairs(
    pool: np.ndarray, p_c: float, rng: np.random.Generator
) -> np.ndarray:
    """Single-point crossover of consecutive rows ``(2k, 2k+1)`` of ``pool``.

    Each pair crosses with probability ``p_c`` at a cut drawn uniformly from
    ``1 .. m-1``; the tails after the cut are swapped. An odd last row is
    passed through unchanged.
    """
    pool = np.asarray(pool)
    n, m = pool.shape
    children = pool.copy()
    n_pairs = n // 2
    if n_pairs == 0 or m < 2:
        return children
    do = rng.random(n_pairs) < p_c
    cuts = rng.integers(1, m, size=n_pairs)
    first = pool[0 : 2 * n_pairs : 2]
    second = pool[1 : 2 * n_pairs : 2]
    swap = (np.arange(m)[None, :] >= cuts[:, None]) & do[:, None]
    children[0 : 2 * n_pairs : 2] = np.where(swap, second, first)
    children[1 : 2 * n_pairs : 2] = np.where(swap, first, second)
    return children


def mutate_bits(bits: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("mutation rate must lie in [0, 1]")
    bits = np.asarray(bits, dtype=np.uint8)
    flips = rng.random(bits.shape) < rate
    return bits ^ flips.astype(np.uint8)


def survivor_indices(parent_fitness: np.ndarray, offspring_fitness: np.ndarray) -> np.ndarray:
    """Indices into ``concat(parents, offspring)`` of the ``n`` fittest members.

    Stable sort over the concatenation, so ties prefer parents and then the
    lower index.
    """
    parent_fitness = np.asarray(parent_fitness, dtype=np.float64)
    offspring_fitness = np.asarray(offspring_fitness, dtype=np.float64)
    if parent_fitness.shape != offspring_fitness.shape:
        raise ValueError("parents and offspring must have the same size")
    pooled = np.concatenate([parent_fitness, offspring_fitness])
    _require_evaluated(pooled)
    return np.argsort(pooled, kind="stable")[: parent_fitness.shape[0]]


class GeneticAlgorithm:
    """Stepwise GA run; generation 0 is initialised and evaluated on construction."""

    def __init__(self, spec: ProblemSpec, config: RunConfig, rng: np.random.Generator):
        if config.population_size < 2:
            raise ValueError("the GA needs population_size >= 2")
        self.spec = spec
        self.config = config
        self.rng = rng
        self.p_c = config.ga_params.crossover_probability
        self.mutation_rate = config.ga_params.mutation_rate(spec.layout.total_bits)
        self.evaluator = Evaluator(spec)
        self.tracker = RunTracker(spec, config)
        self.bits = random_bitstring(spec.layout, rng, config.population_size)
        self.fitness = np.asarray(self.evaluator(self.bits), dtype=np.float64)
        self.tracker.record(self.fitness, self.bits)

    @property
    def generation(self) -> int:
        return self.tracker.generation

    def step(self) -> None:
        pool = self.bits[tournament_indices(self.fitness, self.rng)]
        children = crossover_pairs(pool, self.p_c, self.rng)
        offspring = mutate_bits(children, self.mutation_rate, self.rng)
        offspring_fitness = np.asarray(self.evaluator(offspring), dtype=np.float64)
        keep = survivor_indices(self.fitness, offspring_fitness)
        self.bits = np.concatenate([self.bits, offspring])[keep]
        self.fitness = np.concatenate([self.fitness, offspring_fitness])[keep]
        self.tracker.generation += 1
        self.tracker.record(self.fitness, self.bits)


def run_ga(spec: ProblemSpec, config: RunConfig, seed: int) -> TrialResult:
    """One GA trial from ``numpy.random.default_rng(seed)`` until termination."""
    opt = GeneticAlgorithm(spec, config, np.random.default_rng(seed))
    reason = opt.tracker.termination()
    while reason is None:
        opt.step()
        reason = opt.tracker.termination()
    return opt.tracker.result(ALGORITHM, seed, opt.evaluator.count, reason)


# --- per-individual forms -------------------------------------------------


@dataclass(frozen=True)
class Individual:
    bits: np.ndarray
    fitness: float = float("nan")

    @property
    def evaluated(self) -> bool:
        return not np.isnan(self.fitness)

    def evaluate(self, evaluator: Evaluator) -> "Individual":
        return Individual(self.bits, float(evaluator(self.bits)))


def binary_tournament(pop: Sequence[Individual], rng: np.random.Generator) -> list[Individual]:
    fitness = np.array([ind.fitness for ind in pop], dtype=np.float64)
    return [pop[i] for i in tournament_indices(fitness, rng)]


def single_point_crossover(
    a: Individual, b: Individual, p_c: float, rng: np.random.Generator, cut: int | None = None
) -> tuple[Individual, Individual]:
    """Cross two parents. ``cut`` forces the cut point (crossover always happens)."""
    if a.bits.shape != b.bits.shape:
        raise ValueError("parents must have equal genome length")
    if cut is None:
        c1, c2 = crossover_pairs(np.stack([a.bits, b.bits]), p_c, rng)
    else:
        if not 1 <= cut <= a.bits.shape[0] - 1:
            raise ValueError("cut must lie in 1 .. m-1")
        c1 = np.concatenate([a.bits[:cut], b.bits[cut:]])
        c2 = np.concatenate([b.bits[:cut], a.bits[cut:]])
    return Individual(c1), Individual(c2)


def mutate(ind: Individual, rate: float, rng: np.random.Generator) -> Individual:
    return Individual(mutate_bits(ind.bits, rate, rng))


def survivor_selection(parents: Sequence[Individual], offspring: Sequence[Individual]) -> list[Individual]:
    pf = np.array([p.fitness for p in parents], dtype=np.float64)
    of = np.array([o.fitness for o in offspring], dtype=np.float64)
    pooled = list(parents) + list(offspring)
    return [pooled[i] for i in survivor_indices(pf, of)]
