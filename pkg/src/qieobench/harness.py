"""Trial batches, parameter sweeps and summary statistics.

Trials are independent and run on a process pool. Trial ``k`` of a batch
gets its seed from ``numpy.random.SeedSequence(base_seed,
spawn_key=stream + (k,))``. Results therefore depend only on the
configuration and the base seed. They do not depend on worker count,
scheduling, or on how many other trials the batch contains.
"""

from __future__ import annotations

import enum
import logging
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .ga import run_ga
from .objectives import FunctionId, ProblemSpec
from .qieo import run_qieo
from .trial import RunConfig, TerminationReason, TrialResult

log = logging.getLogger(__name__)

WORKERS_ENV = "QIEOBENCH_WORKERS"

BENCHMARK_POPULATION_SIZES = (10, 20, 50, 100, 200, 500, 1000, 2000, 4000, 5000, 8000, 10000)
BENCHMARK_DIMENSIONS = (2, 5, 10, 20, 25, 30, 40, 50, 100)
DEFAULT_TRIALS = 30
# Population of the dimension study; not given with the study itself.
DEFAULT_DIMENSION_SWEEP_POPULATION = 100

# Population sizes at which each algorithm first succeeded in every trial,
# used for the head-to-head comparison: {function: (ga_pop, qieo_pop)}.
HEAD_TO_HEAD_POPULATIONS = {
    FunctionId.ACKLEY: (2000, 100),
    FunctionId.ROSENBROCK: (1000, 200),
    FunctionId.RASTRIGIN: (200, 100),
}


class Algorithm(str, enum.Enum):
    QIEO = "qieo"
    GA = "ga"

    @classmethod
    def parse(cls, value) -> "Algorithm":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown algorithm {value!r} (choose qieo or ga)") from None


_RUNNERS = {Algorithm.QIEO: run_qieo, Algorithm.GA: run_ga}


def trial_seed(base_seed: int, *key: int) -> int:
    """64-bit seed for the stream addressed by ``key`` under ``base_seed``."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def _run_one(task) -> TrialResult:
    algorithm, spec, config, seed, index = task
    try:
        result = _RUNNERS[algorithm](spec, config, seed)
    except Exception as exc:  # recorded per trial, the batch carries on
        log.error("trial %d (%s, seed %d) failed: %s", index, algorithm.value, seed, exc)
        result = TrialResult(
            algorithm=algorithm.value,
            function=spec.function_id.value,
            dimension=spec.dimension,
            population_size=config.population_size,
            seed=seed,
            best_fitness=float("nan"),
            best_bits=np.zeros(spec.layout.total_bits, dtype=np.uint8),
            generations_run=0,
            evaluations=0,
            success=False,
            termination_reason=TerminationReason.ERROR,
            error="".join(traceback.format_exception_only(type(exc), exc)).strip(),
        )
    result.trial_index = index
    return result


def run_trials(
    algorithm,
    spec: ProblemSpec,
    config: RunConfig,
    n_trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
    *,
    stream: Sequence[int] = (),
    workers: int | None = None,
) -> list[TrialResult]:
    """Run ``n_trials`` independent trials, returned in trial order."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    algorithm = Algorithm.parse(algorithm)
    tasks = [
        (algorithm, spec, config, trial_seed(base_seed, *stream, k), k) for k in range(n_trials)
    ]
    workers = min(resolve_workers(workers), n_trials)
    if workers == 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, tasks))


class Metric(str, enum.Enum):
    FITNESS = "fitness"
    GENERATIONS = "generations"
    EVALUATIONS = "evaluations"
    EVALUATIONS_EXCL_INIT = "evaluations_excl_init"


def metric_values(results: Iterable[TrialResult], metric) -> np.ndarray:
    metric = Metric(metric)
    ok = [r for r in results if r.termination_reason is not TerminationReason.ERROR]
    if metric is Metric.FITNESS:
        return np.array([r.best_fitness for r in ok], dtype=np.float64)
    if metric is Metric.GENERATIONS:
        return np.array([r.generations_run for r in ok], dtype=np.float64)
    if metric is Metric.EVALUATIONS:
        return np.array([r.evaluations for r in ok], dtype=np.float64)
    return np.array([r.evaluations_excl_init for r in ok], dtype=np.float64)


def evaluations_to_target(results: Iterable[TrialResult], exclude_init: bool = True) -> np.ndarray:
    """Evaluations spent per trial, ``inf`` for trials that never reached the target."""
    return np.array(
        [
            (r.evaluations_excl_init if exclude_init else r.evaluations) if r.success else np.inf
            for r in results
        ],
        dtype=np.float64,
    )


def quantiles(values, probs) -> np.ndarray:
    """Linear-interpolation quantiles that tolerate ``inf`` entries.

    Same values as ``numpy.percentile`` on finite data. With ``inf`` present
    an exact order statistic is returned as is and any interpolation that
    touches ``inf`` gives ``inf``, where numpy would produce ``nan``.
    """
    xs = np.sort(np.asarray(values, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("quantiles of an empty sample")
    pos = np.asarray(probs, dtype=np.float64) * (xs.size - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, xs.size - 1)
    frac = pos - lo
    with np.errstate(invalid="ignore"):
        out = xs[lo] + (xs[hi] - xs[lo]) * frac
    return np.where(frac == 0, xs[lo], np.where(np.isinf(xs[hi]), xs[hi], out))


@dataclass(frozen=True)
class SummaryStats:
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    stddev: float
    success_rate: float
    mean_generations: float
    mean_evaluations: float
    mean_evaluations_excl_init: float
    n: int

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(results: Sequence[TrialResult], metric=Metric.FITNESS) -> SummaryStats:
    """Box-plot numbers for one metric over a batch.

    Quartiles use linear interpolation between order statistics (numpy's
    default ``linear`` method). ``stddev`` is the sample standard deviation
    and is 0 for a single trial. Trials that raised are left out of the
    metric but counted as failures in ``success_rate``.
    """
    if len(results) == 0:
        raise ValueError("cannot summarise an empty batch")
    values = metric_values(results, metric)
    if values.size == 0:
        raise ValueError("every trial in the batch failed with an error")
    q = np.percentile(values, [0, 25, 50, 75, 100])
    gens = metric_values(results, Metric.GENERATIONS)
    return SummaryStats(
        minimum=float(q[0]),
        q1=float(q[1]),
        median=float(q[2]),
        q3=float(q[3]),
        maximum=float(q[4]),
        mean=float(np.mean(values)),
        stddev=float(np.std(values, ddof=1)) if values.size > 1 else 0.0,
        success_rate=sum(r.success for r in results) / len(results),
        mean_generations=float(np.mean(gens)),
        mean_evaluations=float(np.mean(metric_values(results, Metric.EVALUATIONS))),
        mean_evaluations_excl_init=float(np.mean(metric_values(results, Metric.EVALUATIONS_EXCL_INIT))),
        n=int(values.size),
    )


def summarize_all(results: Sequence[TrialResult]) -> dict[str, SummaryStats]:
    return {m.value: summarize(results, m) for m in Metric}


@dataclass
class Sweep:
    """Batches of one algorithm keyed by the swept parameter value."""

    algorithm: Algorithm
    parameter: str
    batches: dict[int, list[TrialResult]] = field(default_factory=dict)

    def table(self) -> dict[int, dict[str, SummaryStats]]:
        return {value: summarize_all(results) for value, results in self.batches.items()}

    def success_rates(self) -> dict[int, float]:
        return {v: sum(r.success for r in rs) / len(rs) for v, rs in self.batches.items()}


def sweep_population_sizes(
    algorithm,
    spec: ProblemSpec,
    sizes: Sequence[int] = BENCHMARK_POPULATION_SIZES,
    config: RunConfig | None = None,
    n_trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
    *,
    workers: int | None = None,
) -> Sweep:
    """One batch per population size; size ``s`` uses seed stream ``(s, k)``."""
    if len(sizes) == 0:
        raise ValueError("need at least one population size")
    config = config or RunConfig(population_size=sizes[0])
    sweep = Sweep(Algorithm.parse(algorithm), "population_size")
    for size in sizes:
        cfg = replace(config, population_size=int(size))
        sweep.batches[int(size)] = run_trials(
            sweep.algorithm, spec, cfg, n_trials, base_seed, stream=(int(size),), workers=workers
        )
    return sweep


def sweep_dimensions(
    algorithm,
    spec: ProblemSpec | FunctionId | str,
    dims: Sequence[int] = BENCHMARK_DIMENSIONS,
    fixed_pop: int = DEFAULT_DIMENSION_SWEEP_POPULATION,
    config: RunConfig | None = None,
    n_trials: int = DEFAULT_TRIALS,
    base_seed: int = 0,
    *,
    workers: int | None = None,
) -> Sweep:
    """One batch per dimension at a fixed population size.

    ``spec`` may be a template problem (its first variable's bounds are
    replicated) or just a function id, which uses the benchmark preset.
    """
    if len(dims) == 0:
        raise ValueError("need at least one dimension")
    template = spec if isinstance(spec, ProblemSpec) else ProblemSpec.default(spec)
    cfg = replace(config, population_size=fixed_pop) if config else RunConfig(population_size=fixed_pop)
    sweep = Sweep(Algorithm.parse(algorithm), "dimension")
    for d in dims:
        sweep.batches[int(d)] = run_trials(
            sweep.algorithm, template.with_dimension(int(d)), cfg, n_trials, base_seed,
            stream=(int(d),), workers=workers,
        )
    return sweep
