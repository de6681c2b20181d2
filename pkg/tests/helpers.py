import numpy as np

from qieobench.trial import TerminationReason, TrialResult


def fake(fitness=1.0, gens=10, pop=100, success=False, k=0):
    return TrialResult(
        algorithm="qieo", function="ackley", dimension=10, population_size=pop, seed=k,
        best_fitness=float(fitness), best_bits=np.zeros(4, np.uint8), generations_run=gens,
        evaluations=pop * (gens + 1), success=success,
        termination_reason=TerminationReason.STAGNATION, trial_index=k,
    )
