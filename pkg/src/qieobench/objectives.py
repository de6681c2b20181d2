"""Benchmark objectives and the counted evaluation boundary.

All three functions are minimised, have their global minimum value 0 and
accept either a single point of shape ``(n,)`` or a batch ``(k, n)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .encoding import DEFAULT_BITS_PER_VARIABLE, GenomeLayout, decode

__all__ = [
    "FunctionId",
    "ProblemSpec",
    "Evaluator",
    "ackley",
    "rosenbrock",
    "rastrigin",
    "evaluate",
    "DEFAULT_BOUNDS",
    "DEFAULT_TOLERANCE",
    "DEFAULT_DIMENSION",
]


class FunctionId(str, enum.Enum):
    ACKLEY = "ackley"
    ROSENBROCK = "rosenbrock"
    RASTRIGIN = "rastrigin"

    @classmethod
    def parse(cls, value) -> "FunctionId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown function {value!r} (choose from {choices})") from None


DEFAULT_BOUNDS = {
    FunctionId.ACKLEY: (-32.768, 32.768),
    FunctionId.ROSENBROCK: (-2.048, 2.048),
    FunctionId.RASTRIGIN: (-5.12, 5.12),
}

DEFAULT_TOLERANCE = {
    FunctionId.ACKLEY: 1e-3,
    FunctionId.ROSENBROCK: 1e-3,
    FunctionId.RASTRIGIN: 1e-6,
}

# Dimensions of the population-size experiments.
DEFAULT_DIMENSION = {
    FunctionId.ACKLEY: 10,
    FunctionId.ROSENBROCK: 2,
    FunctionId.RASTRIGIN: 2,
}


def _points(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] == 0:
        raise ValueError("objective needs at least one design variable")
    return x


def ackley(x) -> np.ndarray | float:
    x = _points(x)
    rms = np.sqrt(np.mean(x * x, axis=-1))
    mean_cos = np.mean(np.cos(2.0 * np.pi * x), axis=-1)
    # exp(1) rather than a rounded literal keeps f(0) at exactly 0.
    return -20.0 * np.exp(-0.2 * rms) - np.exp(mean_cos) + 20.0 + np.exp(1.0)


def rosenbrock(x) -> np.ndarray | float:
    x = _points(x)
    if x.shape[-1] < 2:
        raise ValueError("rosenbrock needs at least two design variables")
    head, tail = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2, axis=-1)


def rastrigin(x, A: float = 10.0, c: float = 2.0 * math.pi) -> np.ndarray | float:
    x = _points(x)
    n = x.shape[-1]
    return A * n + np.sum(x * x - A * np.cos(c * x), axis=-1)


@dataclass(frozen=True)
class ProblemSpec:
    """Objective, genome layout and success tolerance of one benchmark problem."""

    function_id: FunctionId
    layout: GenomeLayout
    target_tolerance: float
    rastrigin_A: float = 10.0
    rastrigin_c: float = 2.0 * math.pi

    def __post_init__(self):
        object.__setattr__(self, "function_id", FunctionId.parse(self.function_id))
        if not self.target_tolerance > 0:
            raise ValueError("target_tolerance must be positive")
        if self.function_id is FunctionId.ROSENBROCK and self.dimension < 2:
            raise ValueError("rosenbrock needs dimension >= 2")

    @classmethod
    def default(
        cls,
        function,
        dimension: int | None = None,
        bits_per_variable: int = DEFAULT_BITS_PER_VARIABLE,
        bounds: tuple[float, float] | None = None,
        target_tolerance: float | None = None,
        **kwargs,
    ) -> "ProblemSpec":
        """Benchmark preset: conventional box, tolerance and dimension."""
        fid = FunctionId.parse(function)
        dimension = DEFAULT_DIMENSION[fid] if dimension is None else dimension
        lo, hi = DEFAULT_BOUNDS[fid] if bounds is None else bounds
        layout = GenomeLayout.uniform(dimension, lo, hi, bits_per_variable)
        tol = DEFAULT_TOLERANCE[fid] if target_tolerance is None else target_tolerance
        return cls(fid, layout, tol, **kwargs)

    @property
    def dimension(self) -> int:
        return self.layout.dimension

    def with_dimension(self, dimension: int) -> "ProblemSpec":
        """Same problem with the first variable's bounds replicated ``dimension`` times."""
        layout = GenomeLayout.uniform(
            dimension,
            self.layout.lower_bounds[0],
            self.layout.upper_bounds[0],
            self.layout.bits_per_variable,
        )
        return replace(self, layout=layout)

    def objective(self, x):
        if self.function_id is FunctionId.ACKLEY:
            return ackley(x)
        if self.function_id is FunctionId.ROSENBROCK:
            return rosenbrock(x)
        return rastrigin(x, self.rastrigin_A, self.rastrigin_c)

    def to_dict(self) -> dict:
        d = {
            "function_id": self.function_id.value,
            "target_tolerance": self.target_tolerance,
            "layout": self.layout.to_dict(),
        }
        if self.function_id is FunctionId.RASTRIGIN:
            d["rastrigin_A"] = self.rastrigin_A
            d["rastrigin_c"] = self.rastrigin_c
        return d


def evaluate(spec: ProblemSpec, bits):
    """Decode genome(s) and apply the objective. Does not count."""
    return spec.objective(decode(bits, spec.layout))


@dataclass
class Evaluator:
    """Counted objective calls for one run.

    Every genome passed through :meth:`__call__` adds exactly one to
    :attr:`count`, whether it arrives alone or as a row of a batch. Each run
    owns its evaluator, so counts from concurrent runs are summed after the
    fact rather than shared.
    """

    spec: ProblemSpec
    count: int = field(default=0)

    def __call__(self, bits):
        arr = np.asarray(bits)
        values = evaluate(self.spec, arr)
        self.count += 1 if arr.ndim == 1 else arr.shape[0]
        return values
