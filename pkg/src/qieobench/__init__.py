"""Quantum-inspired evolutionary optimization and a generational GA on a shared
binary genome, with a benchmark harness for Ackley, Rosenbrock and Rastrigin."""

__version__ = "0.1.0"

from .encoding import GenomeLayout, decode, random_bitstring
from .ga import GeneticAlgorithm, run_ga
from .harness import (
    Algorithm,
    SummaryStats,
    run_trials,
    summarize,
    sweep_dimensions,
    sweep_population_sizes,
)
from .objectives import Evaluator, FunctionId, ProblemSpec, ackley, evaluate, rastrigin, rosenbrock
from .qieo import QIEO, run_qieo
from .trial import GaParams, RunConfig, TerminationReason, TrialResult

__all__ = [
    "Algorithm",
    "Evaluator",
    "FunctionId",
    "GaParams",
    "GeneticAlgorithm",
    "GenomeLayout",
    "ProblemSpec",
    "QIEO",
    "RunConfig",
    "SummaryStats",
    "TerminationReason",
    "TrialResult",
    "ackley",
    "decode",
    "evaluate",
    "random_bitstring",
    "rastrigin",
    "rosenbrock",
    "run_ga",
    "run_qieo",
    "run_trials",
    "summarize",
    "sweep_dimensions",
    "sweep_population_sizes",
]
