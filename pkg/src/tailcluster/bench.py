"""Replication harness: accuracy and MSE sweeps over simulated designs.

A sweep is the Cartesian product of axis values for (g, q, delta, k,
k_star, beta) at fixed (model, n). Each point runs `reps` replications;
each replication draws a dataset, runs the selected methods, and scores
order-aware accuracy plus the MSE of group-aggregated tail-index
estimates. Failed replications are first-class data: the error is
recorded, the failure is counted, and means are taken over successes.

Seeding: the data seed of a replication is derived from the master seed
plus the data-generating design (model, g, q, delta, n) and the rep
index -- not from the point's position in the sweep. Two points that
share a design (for example a k sweep) therefore see identical
datasets, which pairs the comparison (common random numbers), while any
change to the design decouples the streams. Results are independent of
worker scheduling.

Method k conventions: the baseline's internal Hill step uses the same k
as the threshold method (both receive the swept clustering k), while
the post-clustering aggregation Hill step uses k_hill (default: the
clustering k) uniformly for every method.
"""

from __future__ import annotations

import io
import json
import struct
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import __version__
from .cluster import cluster_known_g, cluster_unknown_g
from .core import (
    ClusterParams,
    TailClusterError,
    TailPartition,
    ValidationError,
    accuracy,
    mse,
    resolve_params,
)
from .hill import _hill_per_column, estimate_group_indices, tail_kmeans
from .simulate import MODELS, SimModelSpec, generate

__all__ = [
    "METHODS",
    "DEFAULT_MASTER_SEED",
    "SweepConfig",
    "MethodResult",
    "MethodCell",
    "PointReport",
    "BenchReport",
    "run_replication",
    "run_sweep",
    "merge_reports",
    "emit_report",
    "parse_report",
    "PRESETS",
]

METHODS = ("proposed_known_g", "proposed_unknown_g", "tail_kmeans")

DEFAULT_MASTER_SEED = 314159

_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a model/n template plus axis values and rep settings.

    Axis entries of None for k, k_star, or beta mean "use the
    dimension-driven default at that point" (k and k_star from the
    default formulas, beta recomputed from the effective k and k_star).
    """

    model: str
    n: int
    reps: int
    master_seed: int = DEFAULT_MASTER_SEED
    methods: tuple[str, ...] = ("proposed_unknown_g",)
    g: tuple[int, ...] = (3,)
    q: tuple[int, ...] = (15,)
    delta: tuple[float, ...] = (0.5,)
    k: tuple[int | None, ...] = (None,)
    k_star: tuple[int | None, ...] = (None,)
    beta: tuple[float | None, ...] = (None,)
    k_hill: int | None = None
    include_raw_hill: bool = False

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.n < 2:
            raise ValidationError(f"n must be >= 2, got {self.n}")
        if self.reps < 1:
            raise ValidationError(f"reps must be >= 1, got {self.reps}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValidationError(f"unknown methods {bad}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ValidationError("methods must not repeat")
        if self.k_hill is not None and self.k_hill < 1:
            raise ValidationError(f"k_hill must be >= 1, got {self.k_hill}")
        for name in ("g", "q", "delta", "k", "k_star", "beta"):
            axis = getattr(self, name)
            if not isinstance(axis, tuple):
                object.__setattr__(self, name, tuple(axis))
        object.__setattr__(self, "methods", tuple(self.methods))


@dataclass(frozen=True)
class MethodResult:
    """Outcome of one method on one replication."""

    partition: TailPartition | None
    accuracy: float | None
    mse: float | None
    error: str | None = None
    seconds: float = 0.0


def _rep_seed(master_seed: int, model: str, g: int, q: int, delta: float, n: int, rep: int) -> int:
    entropy = [
        int(master_seed),
        zlib.crc32(model.encode("utf-8")),
        int(g),
        int(q),
        struct.unpack("<Q", struct.pack("<d", float(delta)))[0],
        int(n),
        int(rep),
    ]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def run_replication(
    spec: SimModelSpec,
    params: ClusterParams,
    methods=METHODS,
    k_hill: int | None = None,
    include_raw_hill: bool = False,
) -> dict[str, MethodResult]:
    """One dataset, every requested method, scored against the truth.

    A method that raises a domain error is recorded in its result's
    error field rather than aborting the replication. When
    include_raw_hill is set, an extra "raw_hill" entry carries the MSE
    of per-column Hill estimates without any grouping.
    """
    data, truth = generate(spec)
    k_used = k_hill if k_hill is not None else params.k
    true_cols = truth.column_gammas()
    out: dict[str, MethodResult] = {}
    for method in methods:
        t0 = time.perf_counter()
        try:
            if method == "proposed_known_g":
                part, _ = cluster_known_g(data, params.with_known_g(truth.g))
            elif method == "proposed_unknown_g":
                part, _ = cluster_unknown_g(data, params.with_known_g(None))
            elif method == "tail_kmeans":
                part = tail_kmeans(data, truth.g, params.k)
            else:
                raise ValidationError(f"unknown method {method!r}")
            _, per_col = estimate_group_indices(data, part, k_used)
            out[method] = MethodResult(
                partition=part,
                accuracy=accuracy(truth, part),
                mse=mse(true_cols, per_col),
                seconds=time.perf_counter() - t0,
            )
        except TailClusterError as exc:
            out[method] = MethodResult(
                None, None, None,
                error=f"{type(exc).__name__}: {exc}",
                seconds=time.perf_counter() - t0,
            )
    if include_raw_hill:
        t0 = time.perf_counter()
        try:
            raw = np.array([e.gamma_hat for e in _hill_per_column(data, k_used)])
            out["raw_hill"] = MethodResult(
                None, None, mse(true_cols, raw), seconds=time.perf_counter() - t0
            )
        except TailClusterError as exc:
            out["raw_hill"] = MethodResult(
                None, None, None,
                error=f"{type(exc).__name__}: {exc}",
                seconds=time.perf_counter() - t0,
            )
    return out


@dataclass(frozen=True)
class MethodCell:
    """Aggregated results of one method at one sweep point."""

    method: str
    accuracies: tuple[float, ...]
    mses: tuple[float, ...]
    failures: tuple[tuple[int, str], ...]
    mean_accuracy: float | None
    mean_mse: float | None
    wall_time: float

    def __post_init__(self):
        if self.mean_accuracy is not None and self.accuracies:
            lhs = float(np.mean(self.accuracies))
            if abs(lhs - self.mean_accuracy) > 1e-12:
                raise ValidationError("mean_accuracy does not match its raw values")
        if self.mean_mse is not None and self.mses:
            if abs(float(np.mean(self.mses)) - self.mean_mse) > 1e-12:
                raise ValidationError("mean_mse does not match its raw values")


@dataclass(frozen=True)
class PointReport:
    """Everything recorded at one point of the sweep grid."""

    model: str
    g: int
    q: int
    delta: float
    n: int
    k: int
    k_star: int
    beta: float
    k_hill: int
    defaults_used: tuple[str, ...]
    rep_seeds: tuple[int, ...]
    cells: tuple[MethodCell, ...]


@dataclass(frozen=True)
class BenchReport:
    """Sweep output: per-point per-method raw values and means."""

    model: str
    n: int
    reps: int
    master_seed: int
    methods: tuple[str, ...]
    points: tuple[PointReport, ...]
    version: str = __version__
    wall_time_total: float = 0.0
    schema_version: int = _SCHEMA_VERSION

    def to_json(self) -> str:
        def cell(c: MethodCell):
            return {
                "method": c.method,
                "accuracies": list(c.accuracies),
                "mses": list(c.mses),
                "failures": [[i, msg] for i, msg in c.failures],
                "mean_accuracy": c.mean_accuracy,
                "mean_mse": c.mean_mse,
                "wall_time": c.wall_time,
            }

        payload = {
            "schema_version": self.schema_version,
            "model": self.model,
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "methods": list(self.methods),
            "version": self.version,
            "wall_time_total": self.wall_time_total,
            "points": [
                {
                    "model": pt.model,
                    "g": pt.g,
                    "q": pt.q,
                    "delta": pt.delta,
                    "n": pt.n,
                    "k": pt.k,
                    "k_star": pt.k_star,
                    "beta": pt.beta,
                    "k_hill": pt.k_hill,
                    "defaults_used": list(pt.defaults_used),
                    "rep_seeds": list(pt.rep_seeds),
                    "cells": [cell(c) for c in pt.cells],
                }
                for pt in self.points
            ],
        }
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        raw = json.loads(text)
        if raw.get("schema_version") != _SCHEMA_VERSION:
            raise ValidationError(
                f"unsupported report schema_version {raw.get('schema_version')!r}"
            )

        def cell(c) -> MethodCell:
            return MethodCell(
                method=c["method"],
                accuracies=tuple(c["accuracies"]),
                mses=tuple(c["mses"]),
                failures=tuple((int(i), str(m)) for i, m in c["failures"]),
                mean_accuracy=c["mean_accuracy"],
                mean_mse=c["mean_mse"],
                wall_time=c["wall_time"],
            )

        points = tuple(
            PointReport(
                model=pt["model"],
                g=pt["g"],
                q=pt["q"],
                delta=pt["delta"],
                n=pt["n"],
                k=pt["k"],
                k_star=pt["k_star"],
                beta=pt["beta"],
                k_hill=pt["k_hill"],
                defaults_used=tuple(pt["defaults_used"]),
                rep_seeds=tuple(int(s) for s in pt["rep_seeds"]),
                cells=tuple(cell(c) for c in pt["cells"]),
            )
            for pt in raw["points"]
        )
        return cls(
            model=raw["model"],
            n=raw["n"],
            reps=raw["reps"],
            master_seed=raw["master_seed"],
            methods=tuple(raw["methods"]),
            points=points,
            version=raw["version"],
            wall_time_total=raw["wall_time_total"],
        )


@dataclass(frozen=True)
class _Point:
    g: int
    q: int
    delta: float
    k: int
    k_star: int
    beta: float
    k_hill: int
    defaults_used: tuple[str, ...]


def _resolve_point(config: SweepConfig, g, q, delta, k, k_star, beta) -> _Point:
    p = g * q
    if p < 2 and (k is None or k_star is None):
        raise ValidationError(
            "the default parameter formulas need p >= 2; give k and "
            "k_star explicitly for single-column designs"
        )
    # n0 = n: simulated data is all-positive by construction
    params, defaults_used = resolve_params(p, config.n, k=k, k_star=k_star, beta=beta)
    params.validate_for(config.n, p)
    k_hill = config.k_hill if config.k_hill is not None else params.k
    return _Point(
        g=int(g),
        q=int(q),
        delta=float(delta),
        k=params.k,
        k_star=params.k_star,
        beta=params.beta,
        k_hill=int(k_hill),
        defaults_used=tuple(defaults_used),
    )


def _expand_points(config: SweepConfig) -> list[_Point]:
    points = []
    for g, q, delta, k, k_star, beta in product(
        config.g, config.q, config.delta, config.k, config.k_star, config.beta
    ):
        points.append(_resolve_point(config, g, q, delta, k, k_star, beta))
    return points


def _task(args) -> tuple[int, int, dict]:
    """One (point, rep) unit of work; returns plain data for aggregation."""
    (pt_idx, rep_idx, seed, model, n, point, methods, include_raw_hill) = args
    spec = SimModelSpec(model=model, g=point.g, q=point.q, delta=point.delta, n=n, seed=seed)
    params = ClusterParams(k=point.k, k_star=point.k_star, beta=point.beta)
    res = run_replication(
        spec, params, methods=methods, k_hill=point.k_hill, include_raw_hill=include_raw_hill
    )
    results = {
        m: {"accuracy": r.accuracy, "mse": r.mse, "error": r.error, "seconds": r.seconds}
        for m, r in res.items()
    }
    return pt_idx, rep_idx, results


def run_sweep(config: SweepConfig, workers: int = 1) -> BenchReport:
    """Run every replication of every sweep point and aggregate.

    With workers > 1 the replications run in a process pool; aggregation
    is keyed by (point, rep) so the report is identical to a sequential
    run.
    """
    t_start = time.perf_counter()
    points = _expand_points(config)
    tasks = []
    seeds_by_point: list[list[int]] = []
    for pt_idx, pt in enumerate(points):
        seeds = [
            _rep_seed(config.master_seed, config.model, pt.g, pt.q, pt.delta, config.n, r)
            for r in range(config.reps)
        ]
        seeds_by_point.append(seeds)
        for rep_idx, seed in enumerate(seeds):
            tasks.append(
                (pt_idx, rep_idx, seed, config.model, config.n, pt,
                 config.methods, config.include_raw_hill)
            )
    raw: dict[tuple[int, int], dict] = {}
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for pt_idx, rep_idx, results in pool.map(_task, tasks, chunksize=4):
                raw[(pt_idx, rep_idx)] = results
    else:
        for args in tasks:
            pt_idx, rep_idx, results = _task(args)
            raw[(pt_idx, rep_idx)] = results
    point_reports = []
    cell_methods = list(config.methods) + (["raw_hill"] if config.include_raw_hill else [])
    for pt_idx, pt in enumerate(points):
        cells = []
        for method in cell_methods:
            accs, mses, fails, secs = [], [], [], 0.0
            for rep_idx in range(config.reps):
                r = raw[(pt_idx, rep_idx)][method]
                secs += r["seconds"]
                if r["error"] is not None:
                    fails.append((rep_idx, r["error"]))
                    continue
                if r["accuracy"] is not None:
                    accs.append(float(r["accuracy"]))
                if r["mse"] is not None:
                    mses.append(float(r["mse"]))
            cells.append(
                MethodCell(
                    method=method,
                    accuracies=tuple(accs),
                    mses=tuple(mses),
                    failures=tuple(fails),
                    mean_accuracy=float(np.mean(accs)) if accs else None,
                    mean_mse=float(np.mean(mses)) if mses else None,
                    wall_time=secs,
                )
            )
        point_reports.append(
            PointReport(
                model=config.model,
                g=pt.g,
                q=pt.q,
                delta=pt.delta,
                n=config.n,
                k=pt.k,
                k_star=pt.k_star,
                beta=pt.beta,
                k_hill=pt.k_hill,
                defaults_used=pt.defaults_used,
                rep_seeds=tuple(seeds_by_point[pt_idx]),
                cells=tuple(cells),
            )
        )
    return BenchReport(
        model=config.model,
        n=config.n,
        reps=config.reps,
        master_seed=config.master_seed,
        methods=config.methods,
        points=tuple(point_reports),
        wall_time_total=time.perf_counter() - t_start,
    )


def merge_reports(reports) -> BenchReport:
    """Concatenate the points of sweeps that share every template field."""
    reports = list(reports)
    if not reports:
        raise ValidationError("nothing to merge")
    head = reports[0]
    for other in reports[1:]:
        same = (
            other.model == head.model
            and other.n == head.n
            and other.reps == head.reps
            and other.master_seed == head.master_seed
            and other.methods == head.methods
        )
        if not same:
            raise ValidationError("reports differ in template fields; cannot merge")
    return BenchReport(
        model=head.model,
        n=head.n,
        reps=head.reps,
        master_seed=head.master_seed,
        methods=head.methods,
        points=tuple(pt for rep in reports for pt in rep.points),
        wall_time_total=sum(r.wall_time_total for r in reports),
    )


CSV_COLUMNS = (
    "model,g,q,delta,n,k,k_star,beta,method,reps,failures,mean_accuracy,mean_mse"
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(report: BenchReport, format: str) -> bytes:
    """Serialize a report: "json" nests everything, "csv" is one row per
    (point, method) in the fixed column order."""
    if format == "json":
        return report.to_json().encode("utf-8")
    if format != "csv":
        raise ValidationError(f"format must be 'json' or 'csv', got {format!r}")
    buf = io.StringIO()
    buf.write(CSV_COLUMNS + "\n")
    for pt in report.points:
        for cell in pt.cells:
            row = [
                pt.model, pt.g, pt.q, pt.delta, pt.n, pt.k, pt.k_star, pt.beta,
                cell.method, report.reps, len(cell.failures),
                cell.mean_accuracy, cell.mean_mse,
            ]
            buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue().encode("utf-8")


def parse_report(blob: bytes) -> BenchReport:
    """Inverse of emit_report for the JSON format."""
    return BenchReport.from_json(blob.decode("utf-8"))


def _preset_fig1(reps: int, master_seed: int) -> list[SweepConfig]:
    return [
        SweepConfig(
            model="A", n=2000, reps=reps, master_seed=master_seed,
            methods=METHODS, g=(3, 4, 5), q=(5, 10, 15, 20), delta=(0.5,),
        )
    ]


def _preset_fig2(reps: int, master_seed: int) -> list[SweepConfig]:
    return [
        SweepConfig(
            model="A", n=2000, reps=reps, master_seed=master_seed,
            methods=METHODS, g=(3, 4, 5), q=(15,),
            delta=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9),
        )
    ]


def _preset_fig3(reps: int, master_seed: int) -> list[SweepConfig]:
    # vary one tuning parameter at a time, others at their defaults
    shared = dict(
        model="A", n=2000, reps=reps, master_seed=master_seed,
        methods=METHODS, g=(3, 4, 5), q=(15,), delta=(0.5,),
    )
    return [
        SweepConfig(**shared, k=(4, 8, 12, 16, 24, 32)),
        SweepConfig(**shared, beta=(0.55, 0.65, 0.75, 0.85, 0.95)),
        SweepConfig(**shared, k_star=(600, 1000, 1400, 1717, 1950)),
    ]


def _preset_fig5(reps: int, master_seed: int) -> list[SweepConfig]:
    return [
        SweepConfig(
            model="A", n=2000, reps=reps, master_seed=master_seed,
            methods=METHODS, g=(3, 4, 5), q=(5, 10, 15, 20), delta=(0.5,),
            include_raw_hill=True,
        )
    ]


PRESETS = {
    "fig1": _preset_fig1,
    "fig2": _preset_fig2,
    "fig3": _preset_fig3,
    "fig5": _preset_fig5,
}
