"""Head-to-head comparison of a QIEO batch against a GA batch."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Sequence

import numpy as np

from .harness import evaluations_to_target, quantiles
from .trial import TrialResult

COMPARISON_COLUMNS = (
    "function",
    "dimension",
    "qieo_population",
    "ga_population",
    "qieo_success_rate",
    "ga_success_rate",
    "qieo_mean_generations",
    "ga_mean_generations",
    "qieo_mean_evaluations",
    "ga_mean_evaluations",
    "qieo_mean_evaluations_excl_init",
    "ga_mean_evaluations_excl_init",
    "qieo_median_evaluations_to_target",
    "ga_median_evaluations_to_target",
    "qieo_iqr_evaluations_to_target",
    "ga_iqr_evaluations_to_target",
    "evaluation_ratio",
    "evaluation_ratio_raw",
    "qieo_mean_elapsed_ns",
    "ga_mean_elapsed_ns",
    "wallclock_ratio",
)


def _ratio(num: float, den: float) -> float:
    if den == 0 or not math.isfinite(den) or not math.isfinite(num):
        return float("nan")
    return num / den


def _side(results: Sequence[TrialResult]) -> dict:
    pops = {r.population_size for r in results}
    if len(pops) != 1:
        raise ValueError(f"a batch must use a single population size, found {sorted(pops)}")
    to_target = evaluations_to_target(results)
    q1, median, q3 = quantiles(to_target, [0.25, 0.5, 0.75])
    return {
        "population": pops.pop(),
        "success_rate": sum(r.success for r in results) / len(results),
        "mean_generations": float(np.mean([r.generations_run for r in results])),
        "mean_evaluations": float(np.mean([r.evaluations for r in results])),
        "mean_evaluations_excl_init": float(np.mean([r.evaluations_excl_init for r in results])),
        "median_evaluations_to_target": float(median),
        # inf - inf is nan; an all-failed side has no finite spread.
        "iqr_evaluations_to_target": float(q3 - q1) if math.isfinite(q3) else math.inf,
        "mean_elapsed_ns": float(np.mean([r.elapsed_ns for r in results])),
    }


def _group(results: Sequence[TrialResult]) -> dict[str, list[TrialResult]]:
    groups: dict[str, list[TrialResult]] = defaultdict(list)
    for r in results:
        groups[r.function].append(r)
    return groups


def compare_report(qieo_results: Sequence[TrialResult], ga_results: Sequence[TrialResult]) -> list[dict]:
    """One row per function comparing cost and reliability of the two batches.

    ``evaluation_ratio`` is GA over QIEO mean evaluations counted as
    population times generations; ``evaluation_ratio_raw`` uses the raw
    counter, which includes generation 0. ``wallclock_ratio`` is GA over
    QIEO mean trial time and only informative on the machine it ran on.

    Raises
    ------
    ValueError
        If either batch is empty, or the two batches do not cover the same
        functions at the same dimension.
    """
    if not qieo_results or not ga_results:
        raise ValueError("both batches must be non-empty")
    q_groups, g_groups = _group(qieo_results), _group(ga_results)
    if set(q_groups) != set(g_groups):
        raise ValueError(
            f"batches cover different functions: {sorted(q_groups)} vs {sorted(g_groups)}"
        )
    rows = []
    for function in sorted(q_groups):
        qs, gs = q_groups[function], g_groups[function]
        dims = {r.dimension for r in qs} | {r.dimension for r in gs}
        if len(dims) != 1:
            raise ValueError(f"{function}: batches use different dimensions {sorted(dims)}")
        q, g = _side(qs), _side(gs)
        row = {"function": function, "dimension": dims.pop()}
        for key in q:
            row[f"qieo_{key}"] = q[key]
            row[f"ga_{key}"] = g[key]
        row["evaluation_ratio"] = _ratio(g["mean_evaluations_excl_init"], q["mean_evaluations_excl_init"])
        row["evaluation_ratio_raw"] = _ratio(g["mean_evaluations"], q["mean_evaluations"])
        row["wallclock_ratio"] = _ratio(g["mean_elapsed_ns"], q["mean_elapsed_ns"])
        rows.append({k: row[k] for k in COMPARISON_COLUMNS})
    return rows


def format_table(rows: list[dict], columns: Sequence[str] | None = None) -> str:
    """Plain fixed-width rendering for the terminal."""
    if not rows:
        return ""
    columns = list(columns or rows[0].keys())

    def cell(v):
        if isinstance(v, float):
            return f"{v:.4g}"
        return str(v)

    body = [[cell(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(b[i]) for b in body)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(b, widths)) for b in body]
    return "\n".join(lines)
