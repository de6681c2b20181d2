"""Quick invariant checks behind ``qieobench validate``.

Every check runs on a small instance in well under a second and returns
``(passed, detail)``.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import qieo
from .encoding import GenomeLayout, decode, random_bitstring
from .ga import run_ga
from .objectives import ProblemSpec, ackley, rastrigin, rosenbrock
from .trial import RunConfig


def _optima():
    vals = [ackley(np.zeros(7)), rosenbrock(np.ones(7)), rastrigin(np.zeros(7))]
    return max(abs(v) for v in vals) <= 1e-12, f"max |f(x*)| = {max(abs(v) for v in vals):.3g}"


def _decode_bounds():
    layout = GenomeLayout.uniform(3, -5.12, 5.12, 16)
    lo = decode(np.zeros(layout.total_bits, np.uint8), layout)
    hi = decode(np.ones(layout.total_bits, np.uint8), layout)
    x = decode(random_bitstring(layout, np.random.default_rng(0), 500), layout)
    ok = np.all(lo == -5.12) and np.all(hi == 5.12) and np.all((x >= -5.12) & (x <= 5.12))
    return bool(ok), "endpoints map to bounds, samples stay inside"


def _normalization():
    rng = np.random.default_rng(1)
    pop = qieo.init_quantum_population(4, 8)
    for _ in range(10_000):
        pop = qieo.rotate(pop, rng.uniform(-math.pi, math.pi, size=(4, 8)))
    err = pop.norm_error()
    return err < 1e-9, f"max |a^2 + b^2 - 1| = {err:.3g} after 1e4 rotations"


def _theta_table():
    d = 0.1
    got = [float(qieo.compute_thetas([[m]], np.array([b]), d)[0, 0]) for m in (0, 1) for b in (0, 1)]
    return got == [0.0, d, -d, 0.0], f"(0,0),(0,1),(1,0),(1,1) -> {got}"


def _hadamard_measurement():
    bits = qieo.measure(qieo.init_quantum_population(100, 1000), np.random.default_rng(2))
    n = bits.size
    frac = bits.mean()
    bound = 4 * math.sqrt(0.25 / n)
    return abs(frac - 0.5) <= bound, f"ones fraction {frac:.4f} over {n} bits (4 sigma = {bound:.4f})"


def _runs_consistent():
    spec = ProblemSpec.default("rastrigin", 2, bits_per_variable=12)
    cfg = RunConfig(population_size=10, max_generations=40, record_curve=True)
    problems = []
    for name, run in (("qieo", qieo.run_qieo), ("ga", run_ga)):
        a, b = run(spec, cfg, 7), run(spec, cfg, 7)
        if not a.same_outcome(b):
            problems.append(f"{name} not deterministic")
        if a.evaluations != cfg.population_size * (a.generations_run + 1):
            problems.append(f"{name} evaluation count {a.evaluations}")
        if np.any(np.diff(a.curve[:, 1]) > 0):
            problems.append(f"{name} curve increases")
    return not problems, "; ".join(problems) or "deterministic, counted, monotone"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "objective optima are zero": _optima,
    "decode respects bounds": _decode_bounds,
    "rotation preserves normalisation": _normalization,
    "theta lookup table": _theta_table,
    "hadamard measurement is fair": _hadamard_measurement,
    "runs deterministic, counted and monotone": _runs_consistent,
}


def run_checks() -> list[tuple[str, bool, str]]:
    out = []
    for name, check in CHECKS.items():
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"raised {exc!r}"
        out.append((name, bool(ok), detail))
    return out
