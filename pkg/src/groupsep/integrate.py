"""Exact piecewise propagation of the linear dynamics.

On every interval where the couplings are constant the system is a linear
constant-coefficient ODE, so the state is advanced by a matrix exponential
(scipy's scaling-and-squaring implementation).  A classical fixed-step RK4
integrator over the same piecewise-constant matrices is provided purely as
an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .errors import ConfigurationError, ScheduleError
from .model import AgentConfiguration, system_matrix
from .sampling import CommunicationSchedule, Scenario


@dataclass(frozen=True)
class PropagationPlan:
    """What to propagate: a schedule, a horizon, and where to sample.

    ``renormalize`` rescales each *output* state to stacked l2-norm
    sqrt(N1+N2) (the plotting normalization), with ``log_scale`` adjusted so
    the physical state is unchanged.  ``rescale_threshold`` is an internal
    overflow guard: whenever any entry exceeds it the state is divided by
    its norm and the log booked, which is invisible to all scale-invariant
    diagnostics because the dynamics are linear.
    """

    schedule: CommunicationSchedule
    t_end: float
    sample_times: tuple[float, ...]
    renormalize: bool = False
    rescale_threshold: float = 1e100

    def __post_init__(self):
        if not self.t_end > 0.0:
            raise ConfigurationError(f"t_end must be positive, got {self.t_end}")
        times = tuple(float(t) for t in self.sample_times)
        object.__setattr__(self, "sample_times", times)
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ConfigurationError("sample_times must be sorted ascending")
        if times and (times[0] < 0.0 or times[-1] > self.t_end):
            raise ConfigurationError("sample_times must lie within [0, t_end]")
        if not self.rescale_threshold > 0.0:
            raise ConfigurationError("rescale_threshold must be positive")
        if times and self.schedule.kind is Scenario.RESAMPLED:
            needed = max(1, math.ceil(times[-1] / self.schedule.tau - 1e-12))
            if needed > len(self.schedule.entries):
                raise ScheduleError(
                    f"schedule covers {len(self.schedule.entries)} intervals but "
                    f"reaching t={times[-1]} needs {needed}"
                )


def _check_initial(initial: AgentConfiguration, plan: PropagationPlan):
    if initial.t != 0.0:
        raise ConfigurationError("propagation starts at t = 0; rebase the initial state")
    if (initial.n1, initial.n2) != (plan.schedule.n1, plan.schedule.n2):
        raise ConfigurationError(
            f"initial state sizes {(initial.n1, initial.n2)} do not match the "
            f"schedule sizes {(plan.schedule.n1, plan.schedule.n2)}"
        )


def _walk(
    initial: AgentConfiguration,
    plan: PropagationPlan,
    advance: Callable[[int, float, np.ndarray], np.ndarray],
) -> list[AgentConfiguration]:
    """March through sample times and interval boundaries, emitting states."""
    _check_initial(initial, plan)
    samples = list(plan.sample_times)
    if not samples:
        return []
    schedule = plan.schedule

    boundaries: set[float] = set()
    if schedule.kind is Scenario.RESAMPLED:
        k = 1
        while k * schedule.tau < samples[-1] - 1e-12:
            boundaries.add(k * schedule.tau)
            k += 1

    n1, n2 = initial.n1, initial.n2
    target_norm = math.sqrt(n1 + n2)
    z = initial.stacked().astype(float, copy=True)
    log_scale = initial.log_scale
    t_cur = 0.0
    interval = 0
    si = 0
    outputs: list[AgentConfiguration] = []

    for t_event in sorted(set(samples) | boundaries):
        dt = t_event - t_cur
        if dt > 0.0:
            z = advance(interval, dt, z)
            if np.max(np.abs(z)) > plan.rescale_threshold:
                norm = float(np.linalg.norm(z))
                log_scale += math.log(norm)
                z = z / norm
            t_cur = t_event
        while si < len(samples) and samples[si] == t_event:
            out_z, out_ls = z, log_scale
            if plan.renormalize:
                norm = float(np.linalg.norm(z))
                if norm > 0.0:
                    out_z = z * (target_norm / norm)
                    out_ls = log_scale + math.log(norm / target_norm)
            outputs.append(
                AgentConfiguration(
                    x=out_z[:n1].copy(), y=out_z[n1:].copy(), t=t_event, log_scale=out_ls
                )
            )
            si += 1
        if t_event in boundaries:
            interval += 1
    return outputs


def propagate(initial: AgentConfiguration, plan: PropagationPlan) -> list[AgentConfiguration]:
    """Advance the state exactly and return it at every sample time.

    Within each constant-coupling interval the state moves by
    ``expm(M * dt)`` applied to all spatial coordinates at once; interval
    boundaries are honored exactly.  Exponentials are cached per
    (interval, dt), so uniform sampling grids cost one exponential per
    distinct step size.
    """
    matrices: dict[int, np.ndarray] = {}
    propagators: dict[tuple[int, float], np.ndarray] = {}

    def advance(interval: int, dt: float, z: np.ndarray) -> np.ndarray:
        key = (interval, dt)
        if key not in propagators:
            if interval not in matrices:
                matrices[interval] = system_matrix(plan.schedule.coupling_for_interval(interval))
            propagators[key] = expm(matrices[interval] * dt)
        return propagators[key] @ z

    return _walk(initial, plan, advance)


def propagate_rk(
    initial: AgentConfiguration, plan: PropagationPlan, step: float
) -> list[AgentConfiguration]:
    """Classical fixed-step RK4 over the same piecewise-constant matrices.

    Cross-validation oracle for ``propagate``; identical sampling contract.
    Any remainder shorter than ``step`` at the end of a segment is covered
    by one shortened step.
    """
    if not step > 0.0:
        raise ConfigurationError(f"step must be positive, got {step}")
    if plan.schedule.kind is Scenario.RESAMPLED and step > plan.schedule.tau:
        raise ConfigurationError(
            f"step {step} exceeds the resampling interval tau = {plan.schedule.tau}"
        )
    matrices: dict[int, np.ndarray] = {}

    def advance(interval: int, dt: float, z: np.ndarray) -> np.ndarray:
        if interval not in matrices:
            matrices[interval] = system_matrix(plan.schedule.coupling_for_interval(interval))
        m = matrices[interval]
        n_full = int(dt / step + 1e-9)
        remainder = dt - n_full * step
        for _ in range(n_full):
            z = _rk4_step(m, z, step)
        if remainder > 1e-12 * max(dt, 1.0):
            z = _rk4_step(m, z, remainder)
        return z

    return _walk(initial, plan, advance)


def _rk4_step(m: np.ndarray, z: np.ndarray, h: float) -> np.ndarray:
    k1 = m @ z
    k2 = m @ (z + 0.5 * h * k1)
    k3 = m @ (z + 0.5 * h * k2)
    k4 = m @ (z + h * k3)
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
