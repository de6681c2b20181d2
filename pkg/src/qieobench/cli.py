"""``qieobench`` command line.

Subcommands
-----------
run        one batch per (algorithm, function, dimension, population)
sweep-pop  population-size sweep (default: the 12 benchmark sizes)
sweep-dim  dimension sweep at fixed population (default: Ackley, 100)
compare    QIEO vs GA at the head-to-head population sizes, plus ratios
validate   quick invariant checks on small instances

Values come from built-in defaults, then ``--config FILE`` (JSON, same
keys as ``manifest.json``), then command-line flags.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .encoding import DEFAULT_BITS_PER_VARIABLE, MAX_BITS_PER_VARIABLE
from .harness import (
    DEFAULT_DIMENSION_SWEEP_POPULATION,
    BENCHMARK_DIMENSIONS,
    BENCHMARK_POPULATION_SIZES,
    HEAD_TO_HEAD_POPULATIONS,
    Algorithm,
    run_trials,
    summarize_all,
)
from .objectives import DEFAULT_DIMENSION, FunctionId, ProblemSpec
from .report import COMPARISON_COLUMNS, compare_report, format_table
from .trial import DEFAULT_DELTA_THETA, GaParams, RunConfig, TrialResult

log = logging.getLogger("qieobench")

COMMANDS = ("run", "sweep-pop", "sweep-dim", "compare", "validate")
FORMATS = ("csv", "json")

TRIALS_COLUMNS = (
    "algorithm",
    "function",
    "dim",
    "pop",
    "seed",
    "generations",
    "evaluations",
    "best_fitness",
    "success",
    "termination_reason",
    "elapsed_ns",
    "trial",
    "evaluations_excl_init",
    "config_id",
    "error",
)
CURVE_COLUMNS = ("generation", "best_fitness", "elapsed_ns")


@dataclass
class ExperimentManifest:
    """Everything needed to reproduce a CLI invocation.

    ``None`` means "use the command's default": all three functions (only
    Ackley for ``sweep-dim``), each function's preset dimension, the benchmark
    population list, the head-to-head sizes for ``compare``, and
    ``1/total_bits`` mutation.
    """

    command: str = "run"
    algorithms: list = field(default_factory=lambda: [a.value for a in Algorithm])
    functions: Optional[list] = None
    dimensions: Optional[list] = None
    population_sizes: Optional[list] = None
    qieo_population: Optional[int] = None
    ga_population: Optional[int] = None
    trials: int = 30
    base_seed: int = 0
    max_generations: int = 3000
    stagnation_epsilon: float = 1e-8
    stagnation_window: int = 50
    delta_theta: float = DEFAULT_DELTA_THETA
    crossover_probability: float = 0.9
    mutation_rate_per_bit: Optional[float] = None
    bits_per_variable: int = DEFAULT_BITS_PER_VARIABLE
    bounds: dict = field(default_factory=dict)
    target_tolerance: dict = field(default_factory=dict)
    rastrigin_A: float = 10.0
    rastrigin_c: float = 2.0 * math.pi
    workers: Optional[int] = None
    output_dir: str = "results"
    formats: list = field(default_factory=lambda: list(FORMATS))
    record_curves: bool = False
    record_timing: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentManifest":
        if "manifest" in data and isinstance(data["manifest"], dict):
            data = data["manifest"]
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown manifest keys: {', '.join(sorted(unknown))}")
        m = cls(**data)
        m.validate()
        return m

    def validate(self) -> None:
        """Raise ``ValueError`` naming the first offending field."""

        def bad(name, why):
            raise ValueError(f"{name}: {why}")

        if self.command not in COMMANDS:
            bad("command", f"must be one of {', '.join(COMMANDS)}")
        for a in self.algorithms:
            Algorithm.parse(a)
        for f in self.functions or ():
            FunctionId.parse(f)
        for name in ("dimensions", "population_sizes"):
            for v in getattr(self, name) or ():
                if not isinstance(v, int) or v < 1:
                    bad(name, f"entries must be positive integers, got {v!r}")
        for name in ("qieo_population", "ga_population", "workers"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                bad(name, f"must be a positive integer, got {v!r}")
        for name in ("trials", "max_generations", "stagnation_window"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                bad(name, f"must be a positive integer, got {v!r}")
        if not isinstance(self.base_seed, int) or self.base_seed < 0:
            bad("base_seed", "must be a non-negative integer")
        if self.stagnation_epsilon < 0:
            bad("stagnation_epsilon", "must be >= 0")
        if not math.isfinite(self.delta_theta) or self.delta_theta < 0:
            bad("delta_theta", "must be a finite angle >= 0")
        if not 0 <= self.crossover_probability <= 1:
            bad("crossover_probability", "must lie in [0, 1]")
        if self.mutation_rate_per_bit is not None and not 0 <= self.mutation_rate_per_bit <= 1:
            bad("mutation_rate_per_bit", "must lie in [0, 1]")
        if not 1 <= self.bits_per_variable <= MAX_BITS_PER_VARIABLE:
            bad("bits_per_variable", f"must lie in [1, {MAX_BITS_PER_VARIABLE}]")
        for f, b in self.bounds.items():
            FunctionId.parse(f)
            if len(b) != 2 or not b[0] < b[1]:
                bad("bounds", f"{f}: need [lower, upper] with lower < upper")
        for f, t in self.target_tolerance.items():
            FunctionId.parse(f)
            if not t > 0:
                bad("target_tolerance", f"{f}: must be > 0")
        for fmt in self.formats:
            if fmt not in FORMATS:
                bad("formats", f"unknown format {fmt!r}")

    # -- resolution -------------------------------------------------------

    def resolved_functions(self) -> list[FunctionId]:
        if self.functions:
            return [FunctionId.parse(f) for f in self.functions]
        if self.command == "sweep-dim":
            return [FunctionId.ACKLEY]
        return list(FunctionId)

    def problem(self, function: FunctionId, dimension: int) -> ProblemSpec:
        bounds = self.bounds.get(function.value)
        extra = {}
        if function is FunctionId.RASTRIGIN:
            extra = {"rastrigin_A": self.rastrigin_A, "rastrigin_c": self.rastrigin_c}
        return ProblemSpec.default(
            function,
            dimension,
            bits_per_variable=self.bits_per_variable,
            bounds=tuple(bounds) if bounds else None,
            target_tolerance=self.target_tolerance.get(function.value),
            **extra,
        )

    def run_config(self, population_size: int) -> RunConfig:
        return RunConfig(
            population_size=population_size,
            max_generations=self.max_generations,
            stagnation_epsilon=self.stagnation_epsilon,
            stagnation_window=self.stagnation_window,
            delta_theta=self.delta_theta,
            ga_params=GaParams(self.crossover_probability, self.mutation_rate_per_bit),
            record_curve=self.record_curves,
        )


@dataclass
class Batch:
    algorithm: Algorithm
    spec: ProblemSpec
    config: RunConfig
    n_trials: int
    base_seed: int
    stream: tuple = ()
    results: list = field(default_factory=list)

    def describe(self) -> dict:
        run = self.config.to_dict()
        if self.algorithm is Algorithm.GA:
            run["ga_params"]["mutation_rate_resolved"] = self.config.ga_params.mutation_rate(
                self.spec.layout.total_bits
            )
        else:
            run.pop("ga_params")
        return {
            "algorithm": self.algorithm.value,
            "problem": self.spec.to_dict(),
            "run_config": run,
            "n_trials": self.n_trials,
            "base_seed": self.base_seed,
            "seed_stream": list(self.stream),
        }

    @property
    def config_id(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    @property
    def label(self) -> str:
        return f"{self.algorithm.value}_{self.spec.function_id.value}_d{self.spec.dimension}_p{self.config.population_size}"


def plan_batches(m: ExperimentManifest) -> list[Batch]:
    """Expand a manifest into the batches it asks for, in output order."""
    algorithms = [Algorithm.parse(a) for a in m.algorithms]
    batches = []
    for fn in m.resolved_functions():
        if m.command == "sweep-dim":
            dims = m.dimensions or list(BENCHMARK_DIMENSIONS)
        else:
            dims = m.dimensions or [DEFAULT_DIMENSION[fn]]
        for d in dims:
            spec = m.problem(fn, d)
            for alg in algorithms:
                if m.command == "compare":
                    ga_pop, qieo_pop = HEAD_TO_HEAD_POPULATIONS[fn]
                    default = qieo_pop if alg is Algorithm.QIEO else ga_pop
                    override = m.qieo_population if alg is Algorithm.QIEO else m.ga_population
                    pops = [override] if override else (m.population_sizes or [default])
                elif m.command == "sweep-dim":
                    pops = m.population_sizes or [DEFAULT_DIMENSION_SWEEP_POPULATION]
                else:
                    pops = m.population_sizes or list(BENCHMARK_POPULATION_SIZES)
                for p in pops:
                    if m.command == "sweep-pop":
                        stream = (p,)
                    elif m.command == "sweep-dim":
                        stream = (d,)
                    else:
                        stream = ()
                    batches.append(Batch(alg, spec, m.run_config(p), m.trials, m.base_seed, stream))
    return batches


def execute(batches: list[Batch], workers: Optional[int] = None) -> None:
    for b in batches:
        log.info("running %s (%d trials)", b.label, b.n_trials)
        b.results = run_trials(
            b.algorithm, b.spec, b.config, b.n_trials, b.base_seed, stream=b.stream, workers=workers
        )


# -- output ---------------------------------------------------------------


def _num(v) -> str:
    # repr round-trips doubles exactly.
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def trial_row(r: TrialResult, config_id: str, timing: bool) -> list[str]:
    return [
        r.algorithm,
        r.function,
        str(r.dimension),
        str(r.population_size),
        str(r.seed),
        str(r.generations_run),
        str(r.evaluations),
        _num(float(r.best_fitness)),
        "true" if r.success else "false",
        r.termination_reason.value,
        str(r.elapsed_ns) if timing else "",
        str(r.trial_index),
        str(r.evaluations_excl_init),
        config_id,
        r.error or "",
    ]


def emit_results(batches: list[Batch], manifest: ExperimentManifest, out_dir=None) -> list[Path]:
    """Write trials.csv, summary.json, optional curve files and manifest.json.

    Data files contain no timestamps; elapsed times are written only when
    ``record_timing`` is set, so identical manifests give identical bytes.
    """
    if not any(b.results for b in batches):
        raise ValueError("nothing to write: no batch has results")
    out = Path(out_dir or manifest.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    timing = manifest.record_timing
    written = []

    if "csv" in manifest.formats:
        path = out / "trials.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRIALS_COLUMNS)
            for b in batches:
                cid = b.config_id
                for r in b.results:
                    w.writerow(trial_row(r, cid, timing))
        written.append(path)
        if manifest.record_curves:
            for b in batches:
                for r in b.results:
                    if r.curve is None:
                        continue
                    path = out / f"curve_{b.label}_t{r.trial_index}.csv"
                    with path.open("w", newline="") as fh:
                        w = csv.writer(fh, lineterminator="\n")
                        w.writerow(CURVE_COLUMNS)
                        for g, f, t in r.curve:
                            w.writerow([str(int(g)), _num(float(f)), str(int(t)) if timing else ""])
                    written.append(path)

    if "json" in manifest.formats:
        entries = []
        for b in batches:
            entry = {
                "config_id": b.config_id,
                "algorithm": b.algorithm.value,
                "function": b.spec.function_id.value,
                "dimension": b.spec.dimension,
                "population_size": b.config.population_size,
                "n_trials": len(b.results),
                "config": b.describe(),
            }
            try:
                stats = summarize_all(b.results)
                entry["metrics"] = {k: s.to_dict() for k, s in stats.items()}
                first = next(iter(stats.values()))
                entry["success_rate"] = first.success_rate
                entry["mean_generations"] = first.mean_generations
                entry["mean_evaluations"] = first.mean_evaluations
                entry["mean_evaluations_excl_init"] = first.mean_evaluations_excl_init
            except ValueError as exc:
                entry["metrics"] = None
                entry["error"] = str(exc)
            entries.append(entry)
        path = out / "summary.json"
        path.write_text(json.dumps(_json_safe(entries), indent=2) + "\n")
        written.append(path)

    path = out / "manifest.json"
    echo = {
        "manifest": manifest.to_dict(),
        "version": __version__,
        "batches": [{"config_id": b.config_id, **b.describe()} for b in batches],
    }
    path.write_text(json.dumps(_json_safe(echo), indent=2) + "\n")
    written.append(path)
    return written


def emit_comparison(rows: list[dict], out_dir) -> list[Path]:
    out = Path(out_dir)
    csv_path = out / "comparison.csv"
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_COLUMNS)
        for r in rows:
            w.writerow([_num(r[c]) for c in COMPARISON_COLUMNS])
    json_path = out / "comparison.json"
    payload = {"note": "wallclock_ratio is hardware-dependent and informational only", "rows": rows}
    json_path.write_text(json.dumps(_json_safe(payload), indent=2) + "\n")
    return [csv_path, json_path]


# -- argument parsing -----------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return v


def _nonneg_float(text: str) -> float:
    v = _float(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _positive_float(text: str) -> float:
    v = _float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _probability(text: str) -> float:
    v = _float(text)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _angle(text: str) -> float:
    """Radians; a trailing ``pi`` multiplies, so ``0.01pi`` works."""
    t = text.strip().lower()
    if t.endswith("pi"):
        head = t[:-2].strip().rstrip("*") or "1"
        v = _nonneg_float(head) * math.pi
    else:
        v = _nonneg_float(t)
    return v


def _bits(text: str) -> int:
    v = _positive_int(text)
    if v > MAX_BITS_PER_VARIABLE:
        raise argparse.ArgumentTypeError(f"must be <= {MAX_BITS_PER_VARIABLE}, got {v}")
    return v


def _common_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("experiment")
    g.add_argument("--config", metavar="FILE", help="JSON manifest; flags override its values")
    g.add_argument("--algo", dest="algorithms", nargs="+", choices=["qieo", "ga", "both"])
    g.add_argument("--function", dest="functions", nargs="+",
                   choices=[f.value for f in FunctionId] + ["all"])
    g.add_argument("--dim", "--dims", dest="dimensions", nargs="+", type=_positive_int)
    g.add_argument("--pop", "--sizes", dest="population_sizes", nargs="+", type=_positive_int)
    g.add_argument("--trials", type=_positive_int)
    g.add_argument("--seed", dest="base_seed", type=_nonneg_int)
    g.add_argument("--workers", type=_positive_int,
                   help="process pool size (default: $QIEOBENCH_WORKERS or CPU count)")
    g = p.add_argument_group("termination")
    g.add_argument("--max-gen", dest="max_generations", type=_positive_int)
    g.add_argument("--stagnation-eps", dest="stagnation_epsilon", type=_nonneg_float)
    g.add_argument("--stagnation-window", type=_positive_int)
    g = p.add_argument_group("operators")
    g.add_argument("--delta-theta", type=_angle, help="rotation step in radians, or e.g. 0.01pi")
    g.add_argument("--crossover-prob", dest="crossover_probability", type=_probability)
    g.add_argument("--mutation-rate", dest="mutation_rate_per_bit", type=_probability,
                   help="per-bit flip probability (default 1/total_bits)")
    g = p.add_argument_group("problem")
    g.add_argument("--bits", dest="bits_per_variable", type=_bits)
    g.add_argument("--bounds", nargs=2, type=_float, metavar=("LO", "HI"),
                   help="search box for every selected function")
    g.add_argument("--target-tol", type=_positive_float, help="success tolerance for every selected function")
    g.add_argument("--rastrigin-A", dest="rastrigin_A", type=_float)
    g.add_argument("--rastrigin-c", dest="rastrigin_c", type=_float)
    g = p.add_argument_group("output")
    g.add_argument("--out", dest="output_dir", metavar="DIR")
    g.add_argument("--formats", nargs="+", choices=list(FORMATS))
    g.add_argument("--curves", dest="record_curves", action="store_true",
                   help="write one convergence curve file per trial")
    g.add_argument("--timing", dest="record_timing", action="store_true",
                   help="include wall-clock columns (makes output run-dependent)")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="qieobench", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "run": "run trial batches",
        "sweep-pop": "sweep population sizes",
        "sweep-dim": "sweep problem dimension at fixed population",
        "validate": "run quick invariant checks",
    }
    parser.commands = {}
    for name, text in helps.items():
        parser.commands[name] = sub.add_parser(
            name, parents=[common], help=text, argument_default=argparse.SUPPRESS
        )
    cmp_ = sub.add_parser("compare", parents=[common], help="QIEO vs GA head-to-head",
                          argument_default=argparse.SUPPRESS)
    cmp_.add_argument("--qieo-pop", dest="qieo_population", type=_positive_int)
    cmp_.add_argument("--ga-pop", dest="ga_population", type=_positive_int)
    parser.commands["compare"] = cmp_
    return parser


def parse_args(argv=None) -> ExperimentManifest:
    """Flags over config file over defaults. Exits with status 2 on bad input."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    sub = parser.commands[command]
    ns.pop("verbose", None)

    data = {}
    if "config" in ns:
        path = ns.pop("config")
        try:
            data = json.loads(Path(path).read_text())
            if "manifest" in data and isinstance(data["manifest"], dict):
                data = data["manifest"]
        except (OSError, json.JSONDecodeError) as exc:
            sub.error(f"argument --config: cannot read {path}: {exc}")
    data["command"] = command

    if "algorithms" in ns:
        algos = ns.pop("algorithms")
        data["algorithms"] = ["qieo", "ga"] if "both" in algos else list(dict.fromkeys(algos))
    if "functions" in ns:
        fns = ns.pop("functions")
        data["functions"] = [f.value for f in FunctionId] if "all" in fns else list(dict.fromkeys(fns))
    selected = data.get("functions") or [
        f.value for f in ExperimentManifest(command=command).resolved_functions()
    ]
    if "bounds" in ns:
        lo, hi = ns.pop("bounds")
        if not lo < hi:
            sub.error(f"argument --bounds: LO must be below HI, got {lo} {hi}")
        data["bounds"] = {**data.get("bounds", {}), **{f: [lo, hi] for f in selected}}
    if "target_tol" in ns:
        tol = ns.pop("target_tol")
        data["target_tolerance"] = {**data.get("target_tolerance", {}), **{f: tol for f in selected}}
    data.update(ns)

    try:
        manifest = ExperimentManifest.from_dict(data)
    except (TypeError, ValueError) as exc:
        sub.error(f"invalid configuration: {exc}")
    if manifest.command != "validate" and FunctionId.ROSENBROCK in manifest.resolved_functions():
        if any(d < 2 for d in manifest.dimensions or ()):
            sub.error("argument --dim: rosenbrock needs dimension >= 2")
    return manifest


def _print_batches(batches: list[Batch]) -> None:
    rows = []
    for b in batches:
        rs = b.results
        rows.append({
            "algorithm": b.algorithm.value,
            "function": b.spec.function_id.value,
            "dim": b.spec.dimension,
            "pop": b.config.population_size,
            "success": sum(r.success for r in rs) / len(rs),
            "mean_gen": sum(r.generations_run for r in rs) / len(rs),
            "mean_evals": sum(r.evaluations for r in rs) / len(rs),
            "best": min(r.best_fitness for r in rs),
            "errors": sum(r.error is not None for r in rs),
        })
    print(format_table(rows))


def main(argv=None) -> int:
    raw = sys.argv[1:] if argv is None else list(argv)
    logging.basicConfig(
        level=logging.INFO if ("-v" in raw or "--verbose" in raw) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    manifest = parse_args(raw)

    if manifest.command == "validate":
        from .validation import run_checks

        results = run_checks()
        for name, ok, detail in results:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        return 0 if all(ok for _, ok, _ in results) else 1

    if manifest.command == "compare":
        manifest.algorithms = ["qieo", "ga"]
    batches = plan_batches(manifest)
    try:
        execute(batches, manifest.workers)
    except ValueError as exc:
        print(f"qieobench: error: {exc}", file=sys.stderr)
        return 1
    _print_batches(batches)
    try:
        emit_results(batches, manifest)
        if manifest.command == "compare":
            qieo = [r for b in batches if b.algorithm is Algorithm.QIEO for r in b.results]
            ga = [r for b in batches if b.algorithm is Algorithm.GA for r in b.results]
            rows = compare_report(qieo, ga)
            print()
            print(format_table(rows, ["function", "qieo_population", "ga_population",
                                      "qieo_mean_evaluations_excl_init", "ga_mean_evaluations_excl_init",
                                      "evaluation_ratio", "wallclock_ratio"]))
            emit_comparison(rows, manifest.output_dir)
    except (OSError, ValueError) as exc:
        print(f"qieobench: error: cannot write results to {manifest.output_dir}: {exc}", file=sys.stderr)
        return 1
    return 0
