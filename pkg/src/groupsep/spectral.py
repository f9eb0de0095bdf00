"""Probabilistic descriptors of sampled coupling matrices.

Covers the quantities that drive the separation estimates: the Fiedler
number (algebraic connectivity) of each intra-group matrix, row/column mean
statistics of the cross matrix, the combined "good coupling" condition
bundle, and a binomial tail bound with its exact counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ConfigurationError
from .model import CouplingSet, alignment_laplacian
from .sampling import ScenarioConfig, derive_seed, sample_coupling_set

# default radius used when testing how often the Fiedler number strays from p
DEFAULT_FIEDLER_RADIUS = 0.1


def fiedler_number(psi_plus: np.ndarray) -> float:
    """Second smallest eigenvalue of the scaled Laplacian of one coupling matrix.

    Zero iff the weighted graph is disconnected; concentrates near the
    communication rate for large Bernoulli matrices.  Input must be
    symmetric with zero diagonal and entries in [0, 1].
    """
    lap = alignment_laplacian(psi_plus)
    return float(np.linalg.eigvalsh(lap)[1])


@dataclass(frozen=True)
class RowColumnStats:
    """Row means, column means, their common overall mean, and D, the
    largest absolute deviation of any row or column mean from the overall
    mean."""

    row_means: np.ndarray
    col_means: np.ndarray
    overall_mean: float
    max_deviation: float


def row_column_stats(m: np.ndarray) -> RowColumnStats:
    """Row/column mean statistics of a (cross or intra) coupling matrix.

    For intra-group matrices the zero diagonal means the row mean equals
    the sum over the other agents divided by the group size, which is the
    per-agent mean weight convention used everywhere here.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ConfigurationError(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigurationError("matrix contains non-finite entries")
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    overall = float(m.mean())
    max_dev = float(
        max(np.max(np.abs(row_means - overall)), np.max(np.abs(col_means - overall)))
    )
    return RowColumnStats(
        row_means=row_means, col_means=col_means, overall_mean=overall, max_deviation=max_dev
    )


class ConditionCheck(NamedTuple):
    name: str
    observed: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the good-coupling condition bundle.

    ``checks`` holds one (observed, threshold, pass) triple per condition;
    for the two intra-group conditions the observed value is the worse of
    the two groups.
    """

    fiedler_x: float
    fiedler_y: float
    fiedler_min: float
    alpha: float
    checks: tuple[ConditionCheck, ...]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def check_conditions(couplings: CouplingSet, p: float, q: float, alpha: float) -> ConditionReport:
    """Evaluate the condition bundle under which separation is guaranteed.

    Conditions (N = min(N1, N2)):
      * min Fiedler number over the two groups >= p - p/12
      * |overall cross mean - q| <= min(q/24, p/24)
      * cross max deviation D   <= min(N^(-(1-alpha)/2), p/24)
      * |overall intra mean - p| <= p/24         (worst group)
      * intra max deviation D    <= min(N^(-(1-alpha)/2), p/24)  (worst group)
    """
    if not (0.0 < alpha < 1.0):
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    n = min(couplings.n1, couplings.n2)
    size_threshold = n ** (-(1.0 - alpha) / 2.0)

    f1 = fiedler_number(couplings.psi_plus_x)
    f2 = fiedler_number(couplings.psi_plus_y)
    f_min = min(f1, f2)

    cross = row_column_stats(couplings.psi_minus)
    plus_x = row_column_stats(couplings.psi_plus_x)
    plus_y = row_column_stats(couplings.psi_plus_y)
    intra_mean_err = max(abs(plus_x.overall_mean - p), abs(plus_y.overall_mean - p))
    intra_dev = max(plus_x.max_deviation, plus_y.max_deviation)

    checks = (
        ConditionCheck("fiedler_min", f_min, p - p / 12.0, f_min >= p - p / 12.0),
        ConditionCheck(
            "cross_mean",
            abs(cross.overall_mean - q),
            min(q / 24.0, p / 24.0),
            abs(cross.overall_mean - q) <= min(q / 24.0, p / 24.0),
        ),
        ConditionCheck(
            "cross_deviation",
            cross.max_deviation,
            min(size_threshold, p / 24.0),
            cross.max_deviation <= min(size_threshold, p / 24.0),
        ),
        ConditionCheck("intra_mean", intra_mean_err, p / 24.0, intra_mean_err <= p / 24.0),
        ConditionCheck(
            "intra_deviation",
            intra_dev,
            min(size_threshold, p / 24.0),
            intra_dev <= min(size_threshold, p / 24.0),
        ),
    )
    return ConditionReport(fiedler_x=f1, fiedler_y=f2, fiedler_min=f_min, alpha=alpha, checks=checks)


class TailBound(NamedTuple):
    exact: float
    bound: float


def binomial_tail(n: int, q: float, z: float) -> TailBound:
    """Upper tail P(mean of n Bernoulli(q) draws >= z), exact and bounded.

    ``exact`` sums the binomial upper tail from z*n successes in the log
    domain, which stays stable for n in the thousands.  ``bound`` is the
    analytic estimate  n(n+1)/e * exp[n (z log(q/z) + (1-z) log((1-q)/(1-z)))],
    valid on z >= q; below q the chain of inequalities behind it does not
    apply and NaN is returned for the bound.  At z = 1 the (1-z) log(1-z)
    term is taken at its limit value 0.
    """
    if n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if not (0.0 < q < 1.0):
        raise ConfigurationError(f"q must lie in (0, 1), got {q}")
    if not (0.0 <= z <= 1.0):
        raise ConfigurationError(f"z must lie in [0, 1], got {z}")
    m = z * n
    m_int = round(m)
    if abs(m - m_int) > 1e-9:
        raise ConfigurationError(f"z*n must be an integer, got {m}")

    ks = np.arange(m_int, n + 1)
    log_terms = (
        gammaln(n + 1)
        - gammaln(ks + 1)
        - gammaln(n - ks + 1)
        + ks * math.log(q)
        + (n - ks) * math.log1p(-q)
    )
    exact = float(np.exp(logsumexp(log_terms)))
    exact = min(exact, 1.0)  # clip accumulated rounding above the full mass

    if z < q:
        return TailBound(exact=exact, bound=float("nan"))
    if z == 1.0:
        exponent = n * math.log(q)
    else:
        exponent = n * (
            z * (math.log(q) - math.log(z))
            + (1.0 - z) * (math.log1p(-q) - math.log1p(-z))
        )
    bound = n * (n + 1) / math.e * math.exp(exponent)
    return TailBound(exact=exact, bound=float(bound))


class ConcentrationResult(NamedTuple):
    freq_fiedler_far: float
    freq_rowmean_far: float


def concentration_trial(
    cfg: ScenarioConfig,
    alpha: float,
    n_samples: int,
    delta: float = DEFAULT_FIEDLER_RADIUS,
) -> ConcentrationResult:
    """Monte Carlo frequencies of 'bad' coupling draws.

    ``freq_fiedler_far``: fraction of samples where either intra-group
    Fiedler number differs from p by more than ``delta``.
    ``freq_rowmean_far``: fraction where some row mean of the cross matrix
    deviates from q by at least N^(-(1-alpha)/2), N = min(N1, N2).

    Sample k uses the derived seed ``derive_seed(cfg.seed, k)``; counts are
    aggregated, so the result is independent of evaluation order.
    """
    if n_samples < 1:
        raise ConfigurationError("n_samples must be >= 1")
    if not (0.0 < alpha < 1.0):
        raise ConfigurationError(f"alpha must lie in (0, 1), got {alpha}")
    n = min(cfg.n1, cfg.n2)
    row_threshold = n ** (-(1.0 - alpha) / 2.0)

    fiedler_far = 0
    rowmean_far = 0
    for k in range(n_samples):
        sample_cfg = ScenarioConfig(
            n1=cfg.n1, n2=cfg.n2, p=cfg.p, q=cfg.q,
            scenario=cfg.scenario, tau=cfg.tau, seed=derive_seed(cfg.seed, k),
        )
        cs = sample_coupling_set(sample_cfg, 0)
        f1 = fiedler_number(cs.psi_plus_x)
        f2 = fiedler_number(cs.psi_plus_y)
        if abs(f1 - cfg.p) > delta or abs(f2 - cfg.p) > delta:
            fiedler_far += 1
        row_means = cs.psi_minus.mean(axis=1)
        if np.max(np.abs(row_means - cfg.q)) >= row_threshold:
            rowmean_far += 1
    return ConcentrationResult(
        freq_fiedler_far=fiedler_far / n_samples,
        freq_rowmean_far=rowmean_far / n_samples,
    )
