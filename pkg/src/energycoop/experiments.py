"""Experiment sweeps reproducing the four simulation studies, as CSV.

Each experiment maps a (theta, s_max) grid to metrics and serializes the
result with a metadata block, so a run is reproducible byte for byte from
its spec.  Grid points are independent and dispatch to a process pool;
set the ENERGYCOOP_WORKERS environment variable or pass ``workers=1`` to
run serially.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from statistics import mean, stdev

from . import __version__
from .greedy import CASE_TOL, run_greedy
from .hybrid import run_hybrid_stream
from .model import SystemParams, total_cost
from .offline import EPS_LEX_FACTOR, offline_cost, plan_offline, single_bs_cost
from .profiles import add_gaussian_noise, sinusoid

EXPERIMENT_IDS = ("cost-vs-storage", "saving-vs-theta",
                  "greedy-loss-vs-theta", "hybrid-vs-greedy")

WORKERS_ENV = "ENERGYCOOP_WORKERS"

DEFAULT_THETAS = tuple(k * math.pi / 8 for k in range(17))
DEFAULT_SMAX_GRID = (0.25, 0.5, 1.0, 2.0, 3.0, 4.0)
FIG2_THETAS = (math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi)
DEFAULT_OMEGA = 2 * math.pi / 24
DEFAULT_SEEDS = tuple(range(20))


@dataclass(frozen=True)
class ExperimentSpec:
    """Sweep definition: which study, over which grid, with what system."""

    experiment: str
    thetas: tuple[float, ...]
    s_max_grid: tuple[float, ...]
    alpha: float = 0.9
    beta: float = 0.8
    n_slots: int = 240
    amplitude: float = 3.0
    omega: float = DEFAULT_OMEGA
    noise_scale: float = 0.125
    seeds: tuple[int, ...] = ()
    gamma: float | None = None
    out_path: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(
                f"unknown experiment {self.experiment!r}; "
                f"expected one of {EXPERIMENT_IDS}")
        if not self.thetas or not self.s_max_grid:
            raise ValueError("theta and s_max grids must be non-empty")
        if self.experiment == "hybrid-vs-greedy" and not self.seeds:
            raise ValueError("hybrid-vs-greedy needs at least one seed")

    def params(self, s_max: float) -> SystemParams:
        return SystemParams(self.alpha, self.beta, s_max, self.n_slots)

    def profile(self, theta: float):
        return sinusoid(self.amplitude, self.omega, theta, self.n_slots)


def default_spec(experiment: str, **overrides) -> ExperimentSpec:
    """Reference defaults for each study; keyword overrides win."""
    base: dict = {"experiment": experiment, "thetas": DEFAULT_THETAS,
                  "s_max_grid": (1.0,)}
    if experiment == "cost-vs-storage":
        base.update(thetas=FIG2_THETAS, s_max_grid=DEFAULT_SMAX_GRID)
    elif experiment == "hybrid-vs-greedy":
        base.update(s_max_grid=(3.5,), amplitude=5.0, seeds=DEFAULT_SEEDS)
    base.update(overrides)
    return ExperimentSpec(**base)


@dataclass(frozen=True)
class ResultRow:
    theta: float | None
    s_max: float | None
    metric: str
    value: float


@dataclass(frozen=True)
class ExperimentResult:
    spec: ExperimentSpec
    rows: tuple[ResultRow, ...]

    def value(self, metric: str, theta: float | None = None,
              s_max: float | None = None) -> float:
        hits = [r.value for r in self.rows
                if r.metric == metric
                and (theta is None or r.theta == theta)
                and (s_max is None or r.s_max == s_max)]
        if len(hits) != 1:
            raise KeyError(
                f"{len(hits)} rows for metric={metric} theta={theta} "
                f"s_max={s_max}")
        return hits[0]

    def metadata(self) -> list[tuple[str, str]]:
        s = self.spec
        gamma = s.gamma if s.gamma is not None else s.alpha * s.beta / 2.0
        return [
            ("experiment", s.experiment),
            ("alpha", repr(s.alpha)),
            ("beta", repr(s.beta)),
            ("s_max_grid", ",".join(repr(v) for v in s.s_max_grid)),
            ("n_slots", str(s.n_slots)),
            ("amplitude", repr(s.amplitude)),
            ("omega", repr(s.omega)),
            ("noise_scale", repr(s.noise_scale)),
            ("gamma", repr(gamma)),
            ("eps_lex_factor", repr(EPS_LEX_FACTOR)),
            ("case_tol", repr(CASE_TOL)),
            ("seeds", ",".join(str(v) for v in s.seeds)),
            ("version", __version__),
        ]


def write_result(result: ExperimentResult,
                 path: str | Path | None = None) -> None:
    """CSV with a '# key: value' metadata block, then theta,s_max,metric,value."""
    if path is None:
        path = result.spec.out_path
    if path is None:
        raise ValueError("no output path: pass one or set spec.out_path")
    with open(path, "w", newline="") as fh:
        for key, val in result.metadata():
            fh.write(f"# {key}: {val}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta", "s_max", "metric", "value"])
        for row in result.rows:
            writer.writerow([
                "" if row.theta is None else repr(row.theta),
                "" if row.s_max is None else repr(row.s_max),
                row.metric, repr(row.value)])


def read_result_rows(path: str | Path) -> list[ResultRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(reader)
        assert header == ["theta", "s_max", "metric", "value"]
        for theta, s_max, metric, value in reader:
            rows.append(ResultRow(
                float(theta) if theta else None,
                float(s_max) if s_max else None, metric, float(value)))
    return rows


def _pool_size(n_tasks: int, workers: int | None) -> int:
    cap = os.environ.get(WORKERS_ENV)
    limit = workers if workers is not None else (
        int(cap) if cap else (os.cpu_count() or 1))
    return max(1, min(n_tasks, limit))


def _run_tasks(fn, tasks, workers: int | None) -> list:
    size = _pool_size(len(tasks), workers)
    if size == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=size) as pool:
        return list(pool.map(fn, tasks))


def _point_cost_vs_storage(task) -> list[ResultRow]:
    spec, theta, s_max = task
    cost = offline_cost(spec.params(s_max), spec.profile(theta))
    return [ResultRow(theta, s_max, "cost_per_bs", cost / 2.0)]


def _point_single_bs(task) -> list[ResultRow]:
    spec, s_max = task
    profile = spec.profile(0.0)
    cost = single_bs_cost(spec.params(s_max), profile.e1)
    return [ResultRow(None, s_max, "single_bs_cost", cost)]


def exp_cost_vs_storage(spec: ExperimentSpec,
                        workers: int | None = None) -> ExperimentResult:
    """Average per-BS offline cost against storage size, per phase shift."""
    tasks = [(spec, th, sm) for th in spec.thetas for sm in spec.s_max_grid]
    rows = _run_tasks(_point_cost_vs_storage, tasks, workers)
    rows += _run_tasks(_point_single_bs,
                       [(spec, sm) for sm in spec.s_max_grid], workers)
    return ExperimentResult(spec, tuple(r for batch in rows for r in batch))


def _point_saving(task) -> list[ResultRow]:
    spec, theta, s_max, single_cost = task
    pair = offline_cost(spec.params(s_max), spec.profile(theta))
    saving = 100.0 * (single_cost - pair / 2.0) / single_cost
    return [ResultRow(theta, s_max, "saving_pct", saving)]


def exp_saving_vs_theta(spec: ExperimentSpec,
                        workers: int | None = None) -> ExperimentResult:
    """Percentage cost saving of the cooperating pair over a single BS."""
    s_max = spec.s_max_grid[0]
    profile = spec.profile(0.0)
    single = single_bs_cost(spec.params(s_max), profile.e1)
    tasks = [(spec, th, s_max, single) for th in spec.thetas]
    rows = _run_tasks(_point_saving, tasks, workers)
    flat = [r for batch in rows for r in batch]
    flat.append(ResultRow(None, s_max, "single_bs_cost", single))
    return ExperimentResult(spec, tuple(flat))


def _point_greedy_loss(task) -> list[ResultRow]:
    spec, theta, s_max = task
    params = spec.params(s_max)
    profile = spec.profile(theta)
    off = offline_cost(params, profile)
    gre = total_cost(run_greedy(params, profile))
    return [ResultRow(theta, s_max, "offline_cost", off),
            ResultRow(theta, s_max, "greedy_cost", gre),
            ResultRow(theta, s_max, "loss_pct", 100.0 * (gre - off) / off)]


def exp_greedy_loss_vs_theta(spec: ExperimentSpec,
                             workers: int | None = None) -> ExperimentResult:
    """Greedy online cost increase over the offline optimum, per theta."""
    s_max = spec.s_max_grid[0]
    tasks = [(spec, th, s_max) for th in spec.thetas]
    rows = _run_tasks(_point_greedy_loss, tasks, workers)
    return ExperimentResult(spec, tuple(r for batch in rows for r in batch))


def _point_hybrid(task) -> list[ResultRow]:
    spec, theta, s_max = task
    params = spec.params(s_max)
    deterministic = spec.profile(theta)
    offline_det = plan_offline(params, deterministic)
    greedy_losses, hybrid_losses = [], []
    for seed in spec.seeds:
        realized = add_gaussian_noise(deterministic, spec.noise_scale, seed)
        off = offline_cost(params, realized)
        gre = total_cost(run_greedy(params, realized))
        hyb = total_cost(run_hybrid_stream(
            params, deterministic, zip(realized.e1, realized.e2),
            offline_traj=offline_det).combined)
        greedy_losses.append(100.0 * (gre - off) / off)
        hybrid_losses.append(100.0 * (hyb - off) / off)
    rows = []
    for name, losses in (("greedy", greedy_losses), ("hybrid", hybrid_losses)):
        err = (stdev(losses) / math.sqrt(len(losses))
               if len(losses) > 1 else 0.0)
        rows.append(ResultRow(theta, s_max, f"{name}_loss_mean_pct",
                              mean(losses)))
        rows.append(ResultRow(theta, s_max, f"{name}_loss_stderr_pct", err))
    return rows


def exp_hybrid_vs_greedy(spec: ExperimentSpec,
                         workers: int | None = None) -> ExperimentResult:
    """Greedy vs hybrid loss against the full-knowledge offline optimum.

    Losses are computed per noise seed against the offline plan for that
    seed's realized profile, then averaged; the same seeds are used at
    every theta so the comparison is paired.
    """
    s_max = spec.s_max_grid[0]
    tasks = [(spec, th, s_max) for th in spec.thetas]
    rows = _run_tasks(_point_hybrid, tasks, workers)
    return ExperimentResult(spec, tuple(r for batch in rows for r in batch))


_RUNNERS = {
    "cost-vs-storage": exp_cost_vs_storage,
    "saving-vs-theta": exp_saving_vs_theta,
    "greedy-loss-vs-theta": exp_greedy_loss_vs_theta,
    "hybrid-vs-greedy": exp_hybrid_vs_greedy,
}


def run_experiment(spec: ExperimentSpec,
                   workers: int | None = None) -> ExperimentResult:
    return _RUNNERS[spec.experiment](spec, workers=workers)
