"""Separation functionals and the bi-stable comparison-ODE machinery.

The central quantity is the separation indicator: total within-group
variance divided by the squared distance between group means.  Small values
mean the groups are tight relative to how far apart they sit.  The
comparison lemma turns coupled differential inequalities for the gap and
the variance into explicit decay thresholds, verified here against a
direct numerical integration of the underlying scalar Riccati equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateGapError,
    InsufficientDataError,
    NoGapError,
)
from .model import AgentConfiguration, decompose

# mean gaps below this fraction of the state scale count as degenerate
DEGENERATE_GAP_RTOL = 1e-14


@dataclass(frozen=True)
class SeparationReport:
    """Separation diagnostics of one state.

    ``lam`` is the L2 indicator (variance over squared mean gap),
    ``lam_tilde`` its L-infinity analog using maximal squared deviations.
    ``hyperplane_vector`` points from the group-1 mean to the group-2 mean;
    ``margin`` is the smallest group-2 projection minus the largest group-1
    projection along it, so positive margin means a separating hyperplane
    exists, and ``separating_constant`` is the midpoint of that projected
    gap (the offset of the separating hyperplane when one exists).  All
    fields except ``margin`` and ``separating_constant`` are invariant
    under positive rescaling of the state; ``log_scale`` is carried over
    from the state so physically scaled quantities can be reconstructed.
    """

    t: float
    lam: float
    lam_tilde: float
    mean_gap_sq: float
    hyperplane_vector: np.ndarray
    hyperplane_separated: bool
    margin: float
    separating_constant: float
    log_scale: float = 0.0

    @property
    def log_gap_sq_physical(self) -> float:
        """log of the squared mean gap on the physical (unrescaled) scale."""
        return math.log(self.mean_gap_sq) + 2.0 * self.log_scale


def separation_report(config: AgentConfiguration) -> SeparationReport:
    """Compute all separation diagnostics for one state.

    Raises ``DegenerateGapError`` when the group means coincide (gap below
    1e-14 of the state scale), where the indicator is +inf semantically.
    """
    stats = decompose(config)
    gap_vec = stats.mean_y - stats.mean_x
    gap = float(np.linalg.norm(gap_vec))
    scale = max(
        float(np.max(np.abs(config.x))) if config.x.size else 0.0,
        float(np.max(np.abs(config.y))) if config.y.size else 0.0,
    )
    if gap <= DEGENERATE_GAP_RTOL * scale or gap == 0.0:
        raise DegenerateGapError(
            f"group means coincide at t={config.t} (gap {gap:.3e}, state scale {scale:.3e})"
        )
    v = gap_vec / gap
    gap_sq = gap * gap
    top_x = float(np.max(config.x @ v))
    bottom_y = float(np.min(config.y @ v))
    return SeparationReport(
        t=config.t,
        lam=(stats.var_x + stats.var_y) / gap_sq,
        lam_tilde=(stats.max_dev_x**2 + stats.max_dev_y**2) / gap_sq,
        mean_gap_sq=gap_sq,
        hyperplane_vector=v,
        hyperplane_separated=bottom_y - top_x > 0.0,
        margin=bottom_y - top_x,
        separating_constant=(top_x + bottom_y) / 2.0,
        log_scale=config.log_scale,
    )


@dataclass(frozen=True)
class OdeBoundParams:
    """Coefficients of the coupled differential inequalities.

        df/dt >= a11 f - a12 g,     dg/dt <= a21 f - a22 g,

    with a12, a21 > 0.  The ratio g/f then obeys a scalar Riccati
    inequality whose equilibria are the roots of
    a12 L^2 - (a11 + a22) L + a21.
    """

    a11: float
    a12: float
    a21: float
    a22: float

    def __post_init__(self):
        if not (self.a12 > 0.0 and self.a21 > 0.0):
            raise ConfigurationError("a12 and a21 must be positive")
        for name in ("a11", "a12", "a21", "a22"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")

    @property
    def delta(self) -> float:
        """Discriminant (a11+a22)^2 - 4 a21 a12 of the ratio equation."""
        s = self.a11 + self.a22
        return s * s - 4.0 * self.a21 * self.a12

    @property
    def lambda_plus(self) -> float:
        """Larger (unstable) root; requires a nonnegative discriminant."""
        d = self.delta
        if d < 0.0:
            raise NoGapError("no separation gap: discriminant is negative")
        return (self.a11 + self.a22 + math.sqrt(d)) / (2.0 * self.a12)

    @property
    def lambda_minus(self) -> float:
        """Smaller (stable) root, written in its cancellation-free form."""
        d = self.delta
        if d < 0.0:
            raise NoGapError("no separation gap: discriminant is negative")
        return 2.0 * self.a21 / (self.a11 + self.a22 + math.sqrt(d))


class BoundRates(NamedTuple):
    lambda_plus: float
    lambda_minus: float
    mu: float


def ode_bounds(params: OdeBoundParams, initial_ratio: float) -> BoundRates:
    """Decay thresholds and rate of the comparison lemma.

    A ratio starting strictly below ``lambda_plus`` decays onto
    ``lambda_minus`` at exponential rate at least
    ``mu = a12 (lambda_plus - initial_ratio)``:

        ratio(t) <= lambda_minus + initial_ratio * exp(-mu t).
    """
    if params.delta <= 0.0:
        raise NoGapError("no separation gap: discriminant must be positive")
    lam_plus = params.lambda_plus
    lam_minus = params.lambda_minus
    if not initial_ratio < lam_plus:
        raise ConfigurationError(
            f"initial ratio {initial_ratio} is above the stable basin (lambda_plus = {lam_plus})"
        )
    mu = params.a12 * (lam_plus - initial_ratio)
    return BoundRates(lambda_plus=lam_plus, lambda_minus=lam_minus, mu=mu)


def riccati_oracle(
    params: OdeBoundParams, lambda0: float, t_end: float, step: float = 1e-3
) -> float:
    """Worst-case slack of the lemma bound against the exact Riccati flow.

    Integrates  dL/dt = a12 L^2 - (a11+a22) L + a21  from ``lambda0`` with
    fixed-step RK4 and returns the minimum over the grid of

        lambda_minus + lambda0 * exp(-mu t) - L(t),

    which the lemma asserts is nonnegative (up to integration error).
    """
    if not (0.0 < lambda0):
        raise ConfigurationError(f"lambda0 must be positive, got {lambda0}")
    if not (t_end > 0.0 and step > 0.0):
        raise ConfigurationError("t_end and step must be positive")
    rates = ode_bounds(params, lambda0)  # also validates delta > 0, lambda0 < lambda_plus
    a12, a21 = params.a12, params.a21
    s = params.a11 + params.a22

    def f(lam: float) -> float:
        return a12 * lam * lam - s * lam + a21

    n_steps = max(1, math.ceil(t_end / step))
    h = t_end / n_steps
    lam = lambda0
    t = 0.0
    min_slack = rates.lambda_minus  # slack at t = 0
    for _ in range(n_steps):
        k1 = f(lam)
        k2 = f(lam + 0.5 * h * k1)
        k3 = f(lam + 0.5 * h * k2)
        k4 = f(lam + h * k3)
        lam = lam + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        slack = rates.lambda_minus + lambda0 * math.exp(-rates.mu * t) - lam
        if slack < min_slack:
            min_slack = slack
    return min_slack


class GrowthRateResult(NamedTuple):
    passed: bool
    measured_rate: float
    threshold: float
    n_intervals: int


def growth_rate_check(
    reports: Sequence[SeparationReport],
    q_bar: float,
    burn_in: float = 5.0,
    tol: float = 0.2,
) -> GrowthRateResult:
    """Check that the mean gap keeps growing at the predicted exponential rate.

    The anti-alignment pushes the two group means apart at rate about twice
    the mean cross weight, so after a burn-in the gap |mean(x) - mean(y)|
    should grow like exp(2 q_bar t).  ``measured_rate`` is the smallest
    per-interval log-slope of the physical gap between consecutive samples
    past ``burn_in`` (for the two-agent closed-form system it equals
    2 q_bar exactly), and the check passes when it is at least
    ``2 q_bar (1 - tol)``.  Expects a uniform sampling grid.
    """
    post = [r for r in reports if r.t >= burn_in]
    if len(post) < 3:
        raise InsufficientDataError(
            f"need at least 3 samples after burn-in t >= {burn_in}, got {len(post)}"
        )
    rates = []
    for r0, r1 in zip(post, post[1:]):
        dt = r1.t - r0.t
        if dt <= 0.0:
            raise ConfigurationError("trajectory sample times must be strictly increasing")
        rates.append((r1.log_gap_sq_physical - r0.log_gap_sq_physical) / (2.0 * dt))
    measured = min(rates)
    threshold = 2.0 * q_bar * (1.0 - tol)
    return GrowthRateResult(
        passed=measured >= threshold,
        measured_rate=measured,
        threshold=threshold,
        n_intervals=len(rates),
    )
