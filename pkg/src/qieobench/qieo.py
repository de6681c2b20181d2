"""Quantum-inspired evolutionary optimization over a binary genome.

Each individual is a product state of ``m`` independent real qubits stored
as amplitude pairs ``(alpha, beta)``. A generation measures every qubit,
evaluates the collapsed bit strings, updates the global best string ``b``
and rotates every qubit with an R_Y gate towards the corresponding bit of
``b``. Nothing else varies the population.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objectives import Evaluator, ProblemSpec
from .trial import RunConfig, RunTracker, TrialResult

ALGORITHM = "qieo"

# sqrt(0.5) is correctly rounded; 1/sqrt(2) is one ulp low.
_INV_SQRT2 = math.sqrt(0.5)


@dataclass(frozen=True)
class QuantumPopulation:
    """``n`` quantum individuals of ``m`` qubits, as two ``(n, m)`` arrays."""

    alphas: np.ndarray
    betas: np.ndarray

    def __post_init__(self):
        if self.alphas.shape != self.betas.shape or self.alphas.ndim != 2:
            raise ValueError("alphas and betas must be (n, m) arrays of equal shape")
        if 0 in self.alphas.shape:
            raise ValueError("quantum population needs n >= 1 individuals of m >= 1 qubits")

    def __len__(self):
        return self.alphas.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.alphas.shape[1]

    def individual(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        return self.alphas[j], self.betas[j]

    def prob_one(self) -> np.ndarray:
        """Probability that each qubit collapses to 1."""
        return self.betas**2

    def norm_error(self) -> float:
        return float(np.max(np.abs(self.alphas**2 + self.betas**2 - 1.0)))


@dataclass(frozen=True)
class BestRecord:
    bits: np.ndarray
    fitness: float
    found_at_generation: int


def init_quantum_population(n: int, m: int) -> QuantumPopulation:
    """Hadamard-initialised population: every qubit at (1/sqrt2, 1/sqrt2)."""
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    amp = np.full((n, m), _INV_SQRT2)
    return QuantumPopulation(amp, amp.copy())


def measure(qpop: QuantumPopulation, rng: np.random.Generator) -> np.ndarray:
    """Collapse every qubit: bit is 1 iff a uniform draw on [0, 1) exceeds alpha**2."""
    r = rng.random(qpop.alphas.shape)
    return (r > qpop.alphas**2).astype(np.uint8)


def compute_thetas(measured, best, delta_theta: float) -> np.ndarray:
    """Rotation angle per qubit from the measured bits and the best string.

    ====  ======  ===========
    bit   best    angle
    ====  ======  ===========
    0     0       0
    0     1       +delta_theta
    1     0       -delta_theta
    1     1       0
    ====  ======  ===========
    """
    measured = np.atleast_2d(np.asarray(measured))
    best = np.asarray(best)
    if best.ndim != 1 or measured.shape[1] != best.shape[0]:
        raise ValueError(
            f"measured strings of length {measured.shape[1]} do not match best of shape {best.shape}"
        )
    direction = best.astype(np.int8)[None, :] - measured.astype(np.int8)
    return delta_theta * direction


def rotate(qpop: QuantumPopulation, thetas) -> QuantumPopulation:
    """Apply R_Y(theta) to every qubit: (a, b) -> (cos a - sin b, sin a + cos b)."""
    thetas = np.asarray(thetas, dtype=np.float64)
    if thetas.shape != qpop.alphas.shape:
        raise ValueError(f"theta matrix {thetas.shape} does not match population {qpop.alphas.shape}")
    c, s = np.cos(thetas), np.sin(thetas)
    a, b = qpop.alphas, qpop.betas
    return QuantumPopulation(c * a - s * b, s * a + c * b)


class _AmplitudeState:
    """Mutable working copy of a population for the run loop.

    Only qubits whose measured bit differs from the best bit rotate, so the
    update touches just those entries and keeps ``alpha**2`` cached for the
    next measurement. Arithmetic per entry is the same as :func:`rotate`.
    """

    def __init__(self, qpop: QuantumPopulation, delta_theta: float):
        self.alphas = qpop.alphas.copy()
        self.betas = qpop.betas.copy()
        self.prob_zero = self.alphas**2
        self.cos = math.cos(delta_theta)
        self.sin = math.sin(delta_theta)

    def measure(self, rng: np.random.Generator) -> np.ndarray:
        return (rng.random(self.prob_zero.shape) > self.prob_zero).astype(np.uint8)

    def rotate_towards(self, measured: np.ndarray, best: np.ndarray) -> None:
        if self.sin == 0.0:
            return
        idx = np.flatnonzero(measured != best[None, :])
        if idx.size == 0:
            return
        # +delta where the best bit is 1, -delta where it is 0.
        s = np.where(best[idx % best.shape[0]] == 1, self.sin, -self.sin)
        alphas, betas = self.alphas.reshape(-1), self.betas.reshape(-1)
        a = alphas[idx]
        b = betas[idx]
        new_a = self.cos * a - s * b
        betas[idx] = s * a + self.cos * b
        alphas[idx] = new_a
        self.prob_zero.reshape(-1)[idx] = new_a**2

    def snapshot(self) -> QuantumPopulation:
        return QuantumPopulation(self.alphas.copy(), self.betas.copy())


class QIEO:
    """Stepwise QIEO run. ``run_qieo`` drives it to termination.

    After construction generation 0 has been measured and evaluated. Each
    :meth:`step` rotates with the angles from the previous generation,
    re-measures, evaluates and refreshes the global best.
    """

    def __init__(self, spec: ProblemSpec, config: RunConfig, rng: np.random.Generator):
        self.spec = spec
        self.config = config
        self.rng = rng
        self.evaluator = Evaluator(spec)
        self.tracker = RunTracker(spec, config)
        self._state = _AmplitudeState(
            init_quantum_population(config.population_size, spec.layout.total_bits),
            config.delta_theta,
        )
        self.measured = self._state.measure(rng)
        self.fitness = self.evaluator(self.measured)
        self._best_generation = 0
        self.tracker.record(self.fitness, self.measured)

    @property
    def generation(self) -> int:
        return self.tracker.generation

    @property
    def population(self) -> QuantumPopulation:
        """Copy of the current amplitudes."""
        return self._state.snapshot()

    @property
    def best(self) -> BestRecord:
        return BestRecord(self.tracker.best_bits, self.tracker.best_fitness, self._best_generation)

    def step(self) -> None:
        self._state.rotate_towards(self.measured, self.tracker.best_bits)
        self.tracker.generation += 1
        self.measured = self._state.measure(self.rng)
        self.fitness = self.evaluator(self.measured)
        if self.tracker.record(self.fitness, self.measured):
            self._best_generation = self.tracker.generation


def run_qieo(spec: ProblemSpec, config: RunConfig, seed: int) -> TrialResult:
    """One QIEO trial from ``numpy.random.default_rng(seed)`` until termination."""
    opt = QIEO(spec, config, np.random.default_rng(seed))
    reason = opt.tracker.termination()
    while reason is None:
        opt.step()
        reason = opt.tracker.termination()
    return opt.tracker.result(ALGORITHM, seed, opt.evaluator.count, reason)
