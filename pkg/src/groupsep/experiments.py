"""Ensemble studies: single trajectories, size sweeps, and slope fits.

The sweep protocol mirrors the reference numerical study: for each group
size N, many independent runs with freshly sampled couplings and uniform
initial opinions, collecting the separation indicator at the final time,
discarding the largest values (rare non-separating samples), and fitting a
log-log slope of the trimmed mean against N.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .diagnostics import SeparationReport, separation_report
from .errors import ConfigurationError, DegenerateGapError, SweepError
from .integrate import PropagationPlan, propagate
from .model import AgentConfiguration
from .sampling import (
    STREAM_INITIAL_STATE,
    ScenarioConfig,
    build_schedule,
    derive_seed,
    stream_rng,
)

DEFAULT_TRAJECTORY_SAMPLES = 401


class TrajectoryPoint(NamedTuple):
    config: AgentConfiguration
    report: SeparationReport | None  # None when the group means coincide


def _initial_state(cfg: ScenarioConfig, dim: int) -> AgentConfiguration:
    # i.i.d. uniform [0,1]^dim opinions; the draw stream is disjoint from
    # the coupling streams of the same seed
    rng = stream_rng(cfg.seed, 0, STREAM_INITIAL_STATE)
    return AgentConfiguration(x=rng.random((cfg.n1, dim)), y=rng.random((cfg.n2, dim)))


def run_trajectory(
    cfg: ScenarioConfig,
    t_final: float,
    dim: int = 1,
    sample_count: int = DEFAULT_TRAJECTORY_SAMPLES,
    renormalize: bool = True,
) -> list[TrajectoryPoint]:
    """One full simulation with separation diagnostics along the way.

    Initial opinions are i.i.d. uniform on [0,1]^dim, sampled states sit on
    a uniform grid over [0, t_final] and (by default) are rescaled to
    stacked l2-norm sqrt(N1+N2) for plotting.  Diagnostics are scale
    invariant, so the rescaling never changes them; times where the group
    means coincide carry ``report=None``.
    """
    if sample_count < 2:
        raise ConfigurationError(f"sample_count must be >= 2, got {sample_count}")
    schedule = build_schedule(cfg, t_final)
    plan = PropagationPlan(
        schedule=schedule,
        t_end=t_final,
        sample_times=tuple(np.linspace(0.0, t_final, sample_count)),
        renormalize=renormalize,
    )
    points = []
    for state in propagate(_initial_state(cfg, dim), plan):
        try:
            report = separation_report(state)
        except DegenerateGapError:
            report = None
        points.append(TrajectoryPoint(config=state, report=report))
    return points


@dataclass(frozen=True)
class SweepConfig:
    """Ensemble sweep over group sizes.

    ``base`` supplies p, q, scenario and tau; its sizes and seed are
    ignored (each member runs at n1 = n2 = N with a seed derived from
    ``master_seed``, N, and the member index).  The ``n_discard`` largest
    indicator values per size are dropped before averaging.
    """

    n_values: tuple[int, ...]
    n_test: int
    n_discard: int
    t_final: float
    base: ScenarioConfig
    master_seed: int
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values:
            raise ConfigurationError("n_values must not be empty")
        if len(set(self.n_values)) != len(self.n_values):
            raise ConfigurationError("n_values must be distinct")
        if any(n < 2 for n in self.n_values):
            raise ConfigurationError("all n_values must be >= 2")
        if self.n_test < 1:
            raise ConfigurationError("n_test must be >= 1")
        if not (0 <= self.n_discard < self.n_test):
            raise ConfigurationError("n_discard must satisfy 0 <= n_discard < n_test")
        if not self.t_final > 0.0:
            raise ConfigurationError("t_final must be positive")
        if self.dim < 1:
            raise ConfigurationError("dim must be >= 1")


class Quantiles(NamedTuple):
    q00: float
    q25: float
    q50: float
    q75: float
    q100: float


@dataclass(frozen=True)
class SizeRecord:
    """Sweep outcome at one group size."""

    n: int
    mean_lambda: float  # trimmed mean of the final separation indicator
    n_degenerate: int
    quantiles: Quantiles  # untrimmed distribution of the collected values


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SizeRecord, ...]
    fitted_slope: float
    fitted_intercept: float
    r_squared: float


def _sweep_sample(task: tuple) -> float | None:
    """Final separation indicator of one ensemble member (None if degenerate).

    Module-level and tuple-argument so process pools can pickle it; fully
    determined by the task tuple.
    """
    n, member, master_seed, p, q, scenario, tau, t_final, dim = task
    cfg = ScenarioConfig(
        n1=n, n2=n, p=p, q=q, scenario=scenario, tau=tau,
        seed=derive_seed(master_seed, n, member),
    )
    schedule = build_schedule(cfg, t_final)
    plan = PropagationPlan(schedule=schedule, t_end=t_final, sample_times=(t_final,))
    final = propagate(_initial_state(cfg, dim), plan)[0]
    try:
        return separation_report(final).lam
    except DegenerateGapError:
        return None


def run_sweep(cfg: SweepConfig, n_jobs: int = 1) -> SweepResult:
    """Run the full ensemble sweep and fit the log-log size scaling.

    Members are independent and individually seeded, and aggregation
    happens in (size, member-index) order, so the result is bit-identical
    for any ``n_jobs``.
    """
    tasks = [
        (n, k, cfg.master_seed, cfg.base.p, cfg.base.q, cfg.base.scenario.value,
         cfg.base.tau, cfg.t_final, cfg.dim)
        for n in cfg.n_values
        for k in range(cfg.n_test)
    ]
    if n_jobs == 1:
        values = [_sweep_sample(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            values = list(pool.map(_sweep_sample, tasks, chunksize=8))

    records = []
    for i, n in enumerate(cfg.n_values):
        chunk = values[i * cfg.n_test : (i + 1) * cfg.n_test]
        kept = np.sort(np.array([v for v in chunk if v is not None]))
        n_degenerate = cfg.n_test - kept.size
        if kept.size == 0:
            raise SweepError(f"all {cfg.n_test} samples degenerate at N = {n}")
        if kept.size <= cfg.n_discard:
            raise SweepError(
                f"only {kept.size} usable samples at N = {n}, cannot discard {cfg.n_discard}"
            )
        trimmed = kept[: kept.size - cfg.n_discard] if cfg.n_discard else kept
        records.append(
            SizeRecord(
                n=n,
                mean_lambda=float(trimmed.mean()),
                n_degenerate=n_degenerate,
                quantiles=Quantiles(*(float(np.quantile(kept, f)) for f in (0, 0.25, 0.5, 0.75, 1))),
            )
        )

    fit = fit_slope([(r.n, r.mean_lambda) for r in records]) if len(records) >= 2 else None
    return SweepResult(
        records=tuple(records),
        fitted_slope=fit.slope if fit else float("nan"),
        fitted_intercept=fit.intercept if fit else float("nan"),
        r_squared=fit.r_squared if fit else float("nan"),
    )


class SlopeFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def fit_slope(points: Sequence[tuple[float, float]]) -> SlopeFit:
    """Ordinary least squares of log(value) against log(N)."""
    if len(points) < 2:
        raise ConfigurationError("need at least 2 points to fit a slope")
    ns = np.array([float(p[0]) for p in points])
    vals = np.array([float(p[1]) for p in points])
    if np.any(ns <= 0.0) or np.any(vals <= 0.0):
        raise ConfigurationError("slope fit requires positive sizes and values")
    lx, ly = np.log(ns), np.log(vals)
    slope, intercept = np.polyfit(lx, ly, 1)
    residuals = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(residuals**2)) / ss_tot
    return SlopeFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared)
