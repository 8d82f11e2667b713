"""Experiment orchestration: the six compared algorithms, sweeps and outputs."""

from __future__ import annotations

import csv
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .engine import DEFAULT_MAX_STEPS, NonTermination, RunMetrics, run
from .protocol import Method, Selection, SuppressionPolicy
from .world import WorldConfig

ALGORITHMS = ("TS-1", "STS-1", "DAS-1", "TS-2", "STS-2", "DAS-2")

ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(15))  # 0.0 .. 1.4
DDAS_GRID = tuple(range(0, 41, 5))  # 0 .. 40

# settings with the shortest capture time in the paper's detailed comparison
BEST_SETTINGS = {
    "TS-1": None,
    "STS-1": 0.9,
    "DAS-1": 15,
    "TS-2": None,
    "STS-2": 0.7,
    "DAS-2": 0,
}

METRICS = ("ttc", "hops", "transfers")


class SweepFailure(NonTermination):
    def __init__(self, algorithm: str, param, seed: int, cause: NonTermination):
        super().__init__(f"{algorithm} param={param} seed={seed}: {cause}")
        self.algorithm = algorithm
        self.param = param
        self.seed = seed
        self.cause = cause

    def __reduce__(self):
        return type(self), (self.algorithm, self.param, self.seed, self.cause)


def parse_algorithm(name: str) -> tuple[Method, Selection]:
    try:
        method, suffix = name.upper().split("-")
        selection = {"1": Selection.NEAREST, "2": Selection.MIN_LOAD}[suffix]
        return Method[method], selection
    except (ValueError, KeyError):
        raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")


def policy_for(algorithm: str, param=None) -> SuppressionPolicy:
    method, selection = parse_algorithm(algorithm)
    if method is Method.TS:
        return SuppressionPolicy.ts(selection)
    if param is None:
        raise ValueError(f"{algorithm} needs a parameter")
    if method is Method.STS:
        return SuppressionPolicy.sts(float(param), selection)
    if float(param) != int(param):
        raise ValueError(f"d_DAS must be an integer, got {param}")
    return SuppressionPolicy.das(int(param), selection)


def default_grid(algorithm: str) -> tuple:
    method, _ = parse_algorithm(algorithm)
    return {Method.TS: (None,), Method.STS: ALPHA_GRID, Method.DAS: DDAS_GRID}[method]


def default_seeds(base: int = 0, count: int = 20) -> tuple[int, ...]:
    return tuple(base + k for k in range(count))


@dataclass(frozen=True)
class ExperimentSpec:
    algorithm: str
    params: tuple = ()
    seeds: tuple[int, ...] = field(default_factory=default_seeds)
    world: WorldConfig = field(default_factory=WorldConfig)

    def __post_init__(self) -> None:
        if parse_algorithm(self.algorithm)[0] is Method.TS:
            object.__setattr__(self, "params", (None,))
        elif not self.params:
            object.__setattr__(self, "params", default_grid(self.algorithm))
        if not self.seeds:
            raise ValueError("at least one seed is required")


@dataclass(frozen=True)
class CellResult:
    algorithm: str
    param: Optional[float]
    seed: int
    metrics: RunMetrics


@dataclass(frozen=True)
class Stat:
    min: float
    mean: float
    max: float


@dataclass(frozen=True)
class AggregateRow:
    algorithm: str
    param: Optional[float]
    ttc: Stat
    hops: Stat
    transfers: Stat
    n: int


def _run_cell(job) -> CellResult:
    algorithm, param, seed, world, max_steps = job
    try:
        metrics = run(world, policy_for(algorithm, param), seed=seed, max_steps=max_steps)
    except NonTermination as exc:
        raise SweepFailure(algorithm, param, seed, exc) from exc
    return CellResult(algorithm, param, seed, metrics)


def run_cells(
    spec: ExperimentSpec, jobs: int = 1, max_steps: int = DEFAULT_MAX_STEPS
) -> list[CellResult]:
    work = [(spec.algorithm, p, s, spec.world, max_steps) for p in spec.params for s in spec.seeds]
    if jobs <= 1:
        return [_run_cell(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, work))


def _stat(values: Sequence[float]) -> Stat:
    return Stat(min(values), statistics.fmean(values), max(values))


def aggregate(cells: Iterable[CellResult]) -> list[AggregateRow]:
    grouped: dict[tuple, list[CellResult]] = {}
    for c in cells:
        grouped.setdefault((c.algorithm, c.param), []).append(c)

    def order(key):
        algorithm, param = key
        return (ALGORITHMS.index(algorithm.upper()), -1.0 if param is None else param)

    rows = []
    for key in sorted(grouped, key=order):
        # seed order must not influence the aggregate
        group = sorted(grouped[key], key=lambda c: c.seed)
        rows.append(
            AggregateRow(
                key[0],
                key[1],
                _stat([c.metrics.mean_capture_time for c in group]),
                _stat([c.metrics.hops for c in group]),
                _stat([c.metrics.transfers for c in group]),
                len(group),
            )
        )
    return rows


def run_sweep(
    spec: ExperimentSpec, jobs: int = 1, max_steps: int = DEFAULT_MAX_STEPS
) -> list[AggregateRow]:
    return aggregate(run_cells(spec, jobs, max_steps))


def fmt(value) -> str:
    """Six significant digits, positional notation."""
    if value is None:
        return ""
    return np.format_float_positional(
        float(value), precision=6, unique=False, fractional=False, trim="-"
    )


def emit_csv(rows: Sequence[AggregateRow], path) -> Path:
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "param", "metric", "min", "mean", "max", "n"])
        for row in rows:
            for metric in METRICS:
                s: Stat = getattr(row, metric)
                w.writerow([row.algorithm, fmt(row.param), metric,
                            fmt(s.min), fmt(s.mean), fmt(s.max), row.n])
    return path


def emit_scatter(
    rows: Sequence[AggregateRow],
    path,
    algorithms: Optional[Iterable[str]] = None,
    svg: bool = False,
) -> Path:
    """Write mean hops vs mean time-to-capture per parameter, one series per algorithm.

    With ``svg=True`` a labelled scatter plot is also written next to the CSV.
    """
    if algorithms is not None:
        wanted = {a.upper() for a in algorithms}
        rows = [r for r in rows if r.algorithm.upper() in wanted]
    if not rows:
        raise ValueError("no rows for the requested algorithms")
    path = Path(path)
    series: dict[str, list[AggregateRow]] = {}
    for r in rows:
        series.setdefault(r.algorithm, []).append(r)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["algorithm", "param", "hops_mean", "ttc_mean"])
        for name, pts in series.items():
            for r in pts:
                w.writerow([name, fmt(r.param), fmt(r.hops.mean), fmt(r.ttc.mean)])
    if svg:
        _plot(series, path.with_suffix(".svg"))
    return path


def _plot(series: dict[str, list[AggregateRow]], out: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "wsansim"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name, pts in series.items():
        xs = [r.hops.mean for r in pts]
        ys = [r.ttc.mean for r in pts]
        ax.plot(xs, ys, marker="o", linestyle="-", label=name)
        for r, x, y in zip(pts, xs, ys):
            if r.param is not None:
                ax.annotate(fmt(r.param), (x, y), textcoords="offset points",
                            xytext=(3, 3), fontsize=7)
    ax.set_xlabel("hop count")
    ax.set_ylabel("time to capture [steps]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
