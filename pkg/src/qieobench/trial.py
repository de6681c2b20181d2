"""Run configuration, termination rules and per-trial results.

Both optimizers drive a :class:`RunTracker`, so termination, the
convergence curve and the evaluation identity are handled identically for
QIEO and the GA.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .objectives import ProblemSpec

DEFAULT_DELTA_THETA = 0.01 * math.pi


@dataclass(frozen=True)
class GaParams:
    """GA operator rates. ``mutation_rate_per_bit=None`` means 1/total_bits."""

    crossover_probability: float = 0.9
    mutation_rate_per_bit: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ValueError("crossover_probability must lie in [0, 1]")
        if self.mutation_rate_per_bit is not None and not 0.0 <= self.mutation_rate_per_bit <= 1.0:
            raise ValueError("mutation_rate_per_bit must lie in [0, 1]")

    def mutation_rate(self, total_bits: int) -> float:
        if self.mutation_rate_per_bit is None:
            return 1.0 / total_bits
        return self.mutation_rate_per_bit


@dataclass(frozen=True)
class RunConfig:
    population_size: int
    max_generations: int = 3000
    stagnation_epsilon: float = 1e-8
    stagnation_window: int = 50
    delta_theta: float = DEFAULT_DELTA_THETA
    ga_params: GaParams = field(default_factory=GaParams)
    record_curve: bool = False

    def __post_init__(self):
        if int(self.population_size) != self.population_size or self.population_size < 1:
            raise ValueError(f"population_size must be a positive integer, got {self.population_size!r}")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if self.stagnation_epsilon < 0:
            raise ValueError("stagnation_epsilon must be >= 0")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1")
        if not math.isfinite(self.delta_theta) or self.delta_theta < 0:
            raise ValueError("delta_theta must be a finite non-negative angle")

    def to_dict(self) -> dict:
        return asdict(self)


class TerminationReason(str, enum.Enum):
    TARGET_REACHED = "TargetReached"
    MAX_GENERATIONS = "MaxGenerations"
    STAGNATION = "Stagnation"
    # Not a termination rule: marks a trial whose run raised.
    ERROR = "Error"


@dataclass
class RunState:
    generation: int
    best_history: list[float]

    @property
    def best(self) -> float:
        return self.best_history[-1]


def check_termination(state: RunState, config: RunConfig, spec: ProblemSpec) -> Optional[TerminationReason]:
    """Termination rule evaluated after each generation, checked in priority order.

    ``best_history[g]`` is the best-so-far fitness after generation ``g``.
    Stagnation fires when the best value improved by less than
    ``stagnation_epsilon`` across the last ``stagnation_window`` generations.
    """
    if state.best <= spec.target_tolerance:
        return TerminationReason.TARGET_REACHED
    if state.generation >= config.max_generations:
        return TerminationReason.MAX_GENERATIONS
    w = config.stagnation_window
    if state.generation >= w:
        improvement = state.best_history[state.generation - w] - state.best
        if improvement < config.stagnation_epsilon:
            return TerminationReason.STAGNATION
    return None


@dataclass
class TrialResult:
    algorithm: str
    function: str
    dimension: int
    population_size: int
    seed: int
    best_fitness: float
    best_bits: np.ndarray
    generations_run: int
    evaluations: int
    success: bool
    termination_reason: TerminationReason
    elapsed_ns: int = 0
    # (generation, best_fitness, elapsed_ns) per generation when recorded.
    curve: Optional[np.ndarray] = None
    trial_index: int = 0
    error: Optional[str] = None

    @property
    def evaluations_excl_init(self) -> int:
        """Population size times generations, i.e. without generation 0."""
        return self.population_size * self.generations_run

    def same_outcome(self, other: "TrialResult") -> bool:
        """Equality on everything except wall-clock timing."""
        if self.curve is None or other.curve is None:
            curves_equal = self.curve is None and other.curve is None
        else:
            curves_equal = np.array_equal(self.curve[:, :2], other.curve[:, :2])
        return (
            curves_equal
            and np.array_equal(self.best_bits, other.best_bits)
            and (self.algorithm, self.function, self.dimension, self.population_size, self.seed)
            == (other.algorithm, other.function, other.dimension, other.population_size, other.seed)
            and (self.best_fitness, self.generations_run, self.evaluations, self.success)
            == (other.best_fitness, other.generations_run, other.evaluations, other.success)
            and self.termination_reason == other.termination_reason
        )


class RunTracker:
    """Best-so-far bookkeeping shared by both optimizers."""

    def __init__(self, spec: ProblemSpec, config: RunConfig):
        self.spec = spec
        self.config = config
        self.generation = 0
        self.best_history: list[float] = []
        self.best_bits: Optional[np.ndarray] = None
        self._t0 = time.monotonic_ns()
        self._curve: list[tuple[int, float, int]] = []

    @property
    def best_fitness(self) -> float:
        return self.best_history[-1] if self.best_history else math.inf

    def record(self, fitness: np.ndarray, bits: np.ndarray) -> bool:
        """Log one generation's evaluated population; True if the global best improved."""
        i = int(np.argmin(fitness))
        improved = self.best_bits is None or fitness[i] < self.best_fitness
        if improved:
            self.best_bits = np.array(bits[i], copy=True)
            self.best_history.append(float(fitness[i]))
        else:
            self.best_history.append(self.best_fitness)
        if self.config.record_curve:
            self._curve.append((self.generation, self.best_fitness, time.monotonic_ns() - self._t0))
        return improved

    def termination(self) -> Optional[TerminationReason]:
        return check_termination(RunState(self.generation, self.best_history), self.config, self.spec)

    def result(self, algorithm: str, seed: int, evaluations: int, reason: TerminationReason) -> TrialResult:
        curve = None
        if self.config.record_curve:
            curve = np.array(self._curve, dtype=np.float64).reshape(-1, 3)
        return TrialResult(
            algorithm=algorithm,
            function=self.spec.function_id.value,
            dimension=self.spec.dimension,
            population_size=self.config.population_size,
            seed=int(seed),
            best_fitness=self.best_fitness,
            best_bits=self.best_bits,
            generations_run=self.generation,
            evaluations=evaluations,
            success=bool(self.best_fitness <= self.spec.target_tolerance),
            termination_reason=reason,
            elapsed_ns=time.monotonic_ns() - self._t0,
            curve=curve,
        )
