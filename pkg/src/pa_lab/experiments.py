"""Monte Carlo studies over the attachment-function grid.

Three studies, all emitting long-format CSV with deterministic seeding:

* consistency: normalized estimates per (function, size, replicate, degree),
  the raw material for box plots against the normalized truth f(k)/f(1);
* variance: per-degree sample variance of the raw estimates at a single
  network size;
* normality: sqrt(n)-rescaled estimation errors at one degree, with
  variance summaries and normal-quantile pairs for QQ plots.

Each replicate draws its seed from the master seed and its position in the
plan grid, so any single cell can be reproduced in isolation and parallel
execution cannot change results: workers only fill a results table that is
written in plan order.

Desk-scale defaults (sizes 10^4 and 10^5, 100 replicates) keep a full run
in CI territory; the published-scale grid (10^4/10^5/10^6, 1000
replicates) runs through the same harness via `full_scale` settings.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .estimator import estimate, normalize_by_degree_one
from .exceptions import ConfigError, FormatError
from .generator import GrowthConfig, grow
from .model import PAFunction, census_from_snapshot
from .rng import derive_seed
from .theory import rescaled_preference, solve_malthusian

DEFAULT_SIZES = (10_000, 100_000)
DEFAULT_REPLICATES = 100
DEFAULT_DEGREES = (1, 2, 3, 4, 5, 6)
DEFAULT_MASTER_SEED = 20_177
DEFAULT_MAX_DEGREE = 30

FULL_SCALE_SIZES = (10_000, 100_000, 1_000_000)
FULL_SCALE_REPLICATES = 1000
FULL_SCALE_MAX_DEGREE = 70


def default_functions() -> tuple[tuple[str, PAFunction], ...]:
    """The three reference attachment functions, normalized to f(1) = 1."""
    return (
        ("f1", PAFunction.affine(0.5, scale=1.0 / 1.5)),
        ("f2", PAFunction.power(2.0 / 3.0)),
        ("f3", PAFunction.power(0.25, shift=2.0, scale=3.0 ** -0.25)),
    )


@dataclass(frozen=True)
class ExperimentPlan:
    functions: tuple[tuple[str, PAFunction], ...] = ()
    sizes: tuple[int, ...] = DEFAULT_SIZES
    replicates: int = DEFAULT_REPLICATES
    master_seed: int = DEFAULT_MASTER_SEED
    degrees_of_interest: tuple[int, ...] = DEFAULT_DEGREES
    max_degree: int = DEFAULT_MAX_DEGREE
    outputs: Optional[str] = None

    def __post_init__(self):
        if not self.functions:
            object.__setattr__(self, "functions", default_functions())
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if any(n < 2 for n in self.sizes):
            raise ConfigError("all sizes must be >= 2")

    @staticmethod
    def from_dict(d: dict) -> "ExperimentPlan":
        functions: tuple[tuple[str, PAFunction], ...] = ()
        if "functions" in d:
            functions = tuple(
                (entry["id"], PAFunction.from_dict(entry["f"]))
                for entry in d["functions"]
            )
        kwargs = {}
        for key in ("replicates", "master_seed", "max_degree"):
            if key in d:
                kwargs[key] = int(d[key])
        if "sizes" in d:
            kwargs["sizes"] = tuple(int(n) for n in d["sizes"])
        if "degrees_of_interest" in d:
            kwargs["degrees_of_interest"] = tuple(int(k) for k in d["degrees_of_interest"])
        if "outputs" in d:
            kwargs["outputs"] = d["outputs"]
        return ExperimentPlan(functions=functions, **kwargs)

    @staticmethod
    def from_json(s: str) -> "ExperimentPlan":
        return ExperimentPlan.from_dict(json.loads(s))

    def to_dict(self) -> dict:
        return {
            "functions": [
                {"id": fid, "f": f.to_dict()} for fid, f in self.functions
            ],
            "sizes": list(self.sizes),
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "degrees_of_interest": list(self.degrees_of_interest),
            "max_degree": self.max_degree,
            "outputs": self.outputs,
        }

    def full_scale(self) -> "ExperimentPlan":
        """The published-scale grid; hours of compute, never a default."""
        return replace(
            self,
            sizes=FULL_SCALE_SIZES,
            replicates=FULL_SCALE_REPLICATES,
            max_degree=FULL_SCALE_MAX_DEGREE,
        )


def replicate_seed(plan: ExperimentPlan, f_index: int, size_index: int,
                   rep: int) -> int:
    """Seed of one grid cell; depends only on the cell's plan coordinates."""
    stream_id = (f_index * len(plan.sizes) + size_index) * plan.replicates + rep
    return derive_seed(plan.master_seed, stream_id)


# -- replicate workers (top level so process pools can pickle them) -----------

def _consistency_cell(task):
    f, n, seed, degrees = task
    snapshot, _ = grow(GrowthConfig(n, f, seed))
    table = normalize_by_degree_one(estimate(census_from_snapshot(snapshot)))
    return [table.r_hat(k) for k in degrees]


def _raw_estimates_cell(task):
    f, n, seed, kmax = task
    snapshot, _ = grow(GrowthConfig(n, f, seed))
    table = estimate(census_from_snapshot(snapshot))
    return [table.r_hat(k) for k in range(1, kmax + 1)]


def _normality_cell(task):
    f, n, seed, k, r_true = task
    snapshot, _ = grow(GrowthConfig(n, f, seed))
    r_hat = estimate(census_from_snapshot(snapshot)).r_hat(k)
    if r_hat is None:
        return None
    return math.sqrt(n) * (r_hat - r_true)


def _map_tasks(worker, tasks, workers: int):
    if workers <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, tasks, chunksize=4))


# -- studies -------------------------------------------------------------------

CONSISTENCY_HEADER = ("f_id", "n", "rep", "k", "r_hat_normalized")


def run_consistency_study(plan: ExperimentPlan, workers: int = 1):
    """Normalized estimates for every cell of the (f, n, rep) grid."""
    tasks = []
    for fi, (_, f) in enumerate(plan.functions):
        for ni, n in enumerate(plan.sizes):
            for rep in range(plan.replicates):
                tasks.append((f, n, replicate_seed(plan, fi, ni, rep),
                              plan.degrees_of_interest))
    results = _map_tasks(_consistency_cell, tasks, workers)

    rows = []
    i = 0
    for fid, _ in plan.functions:
        for n in plan.sizes:
            for rep in range(plan.replicates):
                values = results[i]
                i += 1
                for k, v in zip(plan.degrees_of_interest, values):
                    rows.append((fid, n, rep, k, v))
    return CONSISTENCY_HEADER, rows


VARIANCE_HEADER = ("f_id", "k", "s_k", "support_count")


def run_variance_study(plan: ExperimentPlan, workers: int = 1):
    """Unbiased sample variance of the raw estimate per degree.

    Requires a single network size in the plan; degrees with fewer than
    two defined replicates are omitted.
    """
    if len(plan.sizes) != 1:
        raise ConfigError("the variance study expects exactly one network size")
    n = plan.sizes[0]
    tasks = []
    for fi, (_, f) in enumerate(plan.functions):
        for rep in range(plan.replicates):
            tasks.append((f, n, replicate_seed(plan, fi, 0, rep), plan.max_degree))
    results = _map_tasks(_raw_estimates_cell, tasks, workers)

    rows = []
    i = 0
    for fid, _ in plan.functions:
        block = results[i:i + plan.replicates]
        i += plan.replicates
        for k in range(1, plan.max_degree + 1):
            defined = [vals[k - 1] for vals in block if vals[k - 1] is not None]
            if len(defined) < 2:
                continue
            rows.append((fid, k, statistics.variance(defined), len(defined)))
    return VARIANCE_HEADER, rows


NORMALITY_HEADER = ("f_id", "n", "rep", "sqrt_n_error")
NORMALITY_SUMMARY_HEADER = ("f_id", "n", "count", "variance")
NORMALITY_QQ_HEADER = ("f_id", "n", "i", "normal_quantile", "studentized_value")


def run_normality_study(plan: ExperimentPlan, k: int, workers: int = 1):
    """sqrt(n)-rescaled errors at degree k against the exact limit value.

    Returns three (header, rows) tables: long-format errors, per-(f, n)
    variance summaries, and normal-quantile pairs of the studentized
    errors for QQ diagnostics.
    """
    truths = {}
    for fid, f in plan.functions:
        sol = solve_malthusian(f)
        truths[fid] = rescaled_preference(f, sol, k)

    tasks = []
    for fi, (fid, f) in enumerate(plan.functions):
        for ni, n in enumerate(plan.sizes):
            for rep in range(plan.replicates):
                tasks.append((f, n, replicate_seed(plan, fi, ni, rep), k,
                              truths[fid]))
    results = _map_tasks(_normality_cell, tasks, workers)

    rows = []
    summary_rows = []
    qq_rows = []
    normal = statistics.NormalDist()
    i = 0
    for fid, _ in plan.functions:
        for n in plan.sizes:
            values = []
            for rep in range(plan.replicates):
                v = results[i]
                i += 1
                rows.append((fid, n, rep, v))
                if v is not None:
                    values.append(v)
            if len(values) >= 2:
                summary_rows.append((fid, n, len(values), statistics.variance(values)))
                mean = statistics.fmean(values)
                sd = statistics.stdev(values)
                m = len(values)
                for j, v in enumerate(sorted(values), start=1):
                    q = normal.inv_cdf((j - 0.5) / m)
                    qq_rows.append((fid, n, j, q, (v - mean) / sd))
            else:
                summary_rows.append((fid, n, len(values), None))
    return (
        (NORMALITY_HEADER, rows),
        (NORMALITY_SUMMARY_HEADER, summary_rows),
        (NORMALITY_QQ_HEADER, qq_rows),
    )


# -- summaries -------------------------------------------------------------------

SUMMARY_HEADER = ("f_id", "n", "k", "count", "mean", "variance",
                  "min", "q1", "median", "q3", "max")


def _hinge_quartiles(sorted_values: Sequence[float]):
    """Median-of-halves quartiles (the odd middle element joins neither half)."""
    m = len(sorted_values)
    med = statistics.median(sorted_values)
    lower = sorted_values[: m // 2]
    upper = sorted_values[(m + 1) // 2:]
    q1 = statistics.median(lower) if lower else med
    q3 = statistics.median(upper) if upper else med
    return q1, med, q3


def summarize_rows(header: Sequence[str], rows):
    """Per-(f_id, n, k) count/mean/variance and quartiles of the value column.

    Accepts long-format study rows whose last column is the value;
    insensitive to input row order.
    """
    header = tuple(header)
    required = ("f_id", "n", "k")
    if len(header) < 4 or any(c not in header for c in required):
        raise FormatError(f"expected long-format columns {required} + value, got {header}")
    pos = {c: header.index(c) for c in required}
    value_col = len(header) - 1
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        value = row[value_col]
        if value is None or value == "":
            continue
        key = (str(row[pos["f_id"]]), int(row[pos["n"]]), int(row[pos["k"]]))
        groups.setdefault(key, []).append(float(value))

    out = []
    for key in sorted(groups):
        vals = sorted(groups[key])
        q1, med, q3 = _hinge_quartiles(vals)
        variance = statistics.variance(vals) if len(vals) >= 2 else 0.0
        out.append(key + (len(vals), statistics.fmean(vals), variance,
                          vals[0], q1, med, q3, vals[-1]))
    return SUMMARY_HEADER, out


def summarize_csv(in_path):
    """File-level wrapper around summarize_rows."""
    with open(in_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{in_path} is empty") from None
        rows = list(reader)
    return summarize_rows(header, rows)


# -- CSV output ------------------------------------------------------------------

def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, header: Sequence[str], rows) -> None:
    """RFC-4180-style CSV: one header row, CRLF line endings, empty = absent."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
