"""State and coupling data model for the two-group dynamics.

Two groups of agents carry d-dimensional opinion vectors.  Agents inside a
group align with intra-group weights, agents across groups anti-align with
cross weights, and all weights enter a linear right-hand side:

    dx_i/dt = (1/N1) sum_{i'!=i} w+_{i,i'} (x_{i'} - x_i)
            - (1/N2) sum_j      w-_{i,j}  (y_j    - x_i)

and symmetrically for the second group.  Because the weights do not depend
on positions, the whole system is linear and admits an exact matrix form,
assembled here as ``system_matrix``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


def _as_state_matrix(a, name: str) -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ConfigurationError(f"{name} must be a nonempty N x d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    return m


@dataclass(frozen=True)
class AgentConfiguration:
    """Positions of both groups at one time instant.

    ``x`` is N1 x d, ``y`` is N2 x d.  One-dimensional inputs are promoted to
    column matrices.  ``log_scale`` accumulates the logarithm of any internal
    rescaling applied during propagation; the physical state is
    ``exp(log_scale) * (x, y)``.
    """

    x: np.ndarray
    y: np.ndarray
    t: float = 0.0
    log_scale: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", _as_state_matrix(self.x, "x"))
        object.__setattr__(self, "y", _as_state_matrix(self.y, "y"))
        if self.x.shape[1] != self.y.shape[1]:
            raise ConfigurationError(
                f"x and y must share the spatial dimension, got {self.x.shape[1]} and {self.y.shape[1]}"
            )
        if not (np.isfinite(self.t) and np.isfinite(self.log_scale)):
            raise ConfigurationError("t and log_scale must be finite")

    @property
    def n1(self) -> int:
        return self.x.shape[0]

    @property
    def n2(self) -> int:
        return self.y.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def stacked(self) -> np.ndarray:
        """Group-major stacked state, shape (N1+N2) x d."""
        return np.vstack([self.x, self.y])


def _check_intra(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    if np.any(m < 0.0) or np.any(m > 1.0):
        raise ConfigurationError(f"{name} entries must lie in [0, 1]")
    if np.any(np.diagonal(m) != 0.0):
        raise ConfigurationError(f"{name} must have a zero diagonal")
    if not np.array_equal(m, m.T):
        raise ConfigurationError(f"{name} must be symmetric")
    return m


@dataclass(frozen=True)
class CouplingSet:
    """Communication weights: intra-group matrices plus the cross matrix.

    Intra matrices are symmetric with zero diagonal; all entries lie in
    [0, 1].  Bernoulli draws are 0/1, but real-valued weights are accepted so
    the deterministic mean-field system (constant p and q) can be built too.
    """

    psi_plus_x: np.ndarray
    psi_plus_y: np.ndarray
    psi_minus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "psi_plus_x", _check_intra(self.psi_plus_x, "psi_plus_x"))
        object.__setattr__(self, "psi_plus_y", _check_intra(self.psi_plus_y, "psi_plus_y"))
        pm = np.asarray(self.psi_minus, dtype=float)
        if pm.ndim != 2 or pm.shape != (self.psi_plus_x.shape[0], self.psi_plus_y.shape[0]):
            raise ConfigurationError(
                f"psi_minus must be N1 x N2 = {self.psi_plus_x.shape[0]} x "
                f"{self.psi_plus_y.shape[0]}, got shape {pm.shape}"
            )
        if not np.all(np.isfinite(pm)):
            raise ConfigurationError("psi_minus contains non-finite entries")
        if np.any(pm < 0.0) or np.any(pm > 1.0):
            raise ConfigurationError("psi_minus entries must lie in [0, 1]")
        object.__setattr__(self, "psi_minus", pm)

    @property
    def n1(self) -> int:
        return self.psi_plus_x.shape[0]

    @property
    def n2(self) -> int:
        return self.psi_plus_y.shape[0]


@dataclass(frozen=True)
class GroupStatistics:
    """Mean/deviation decomposition of one state."""

    mean_x: np.ndarray
    mean_y: np.ndarray
    var_x: float
    var_y: float
    max_dev_x: float
    max_dev_y: float


def decompose(config: AgentConfiguration) -> GroupStatistics:
    """Per-group means, variances, and maximal deviation magnitudes.

    The variance is the mean squared deviation from the group mean,
    ``var(x) = (1/N1) sum_i |x_i - mean(x)|^2``, and ``max_dev`` is the
    largest deviation norm ``max_i |x_i - mean(x)|``.
    """
    mean_x = config.x.mean(axis=0)
    mean_y = config.y.mean(axis=0)
    dev_x = config.x - mean_x
    dev_y = config.y - mean_y
    sq_x = np.sum(dev_x * dev_x, axis=1)
    sq_y = np.sum(dev_y * dev_y, axis=1)
    return GroupStatistics(
        mean_x=mean_x,
        mean_y=mean_y,
        var_x=float(sq_x.mean()),
        var_y=float(sq_y.mean()),
        max_dev_x=float(np.sqrt(sq_x.max())),
        max_dev_y=float(np.sqrt(sq_y.max())),
    )


def rhs(config: AgentConfiguration, couplings: CouplingSet) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of the state under the given couplings.

    Evaluates the alignment/anti-alignment sums directly (no system matrix),
    which keeps this the independent counterpart of ``system_matrix`` in
    cross-validation tests.  Returns ``(dx, dy)`` with the shapes of x, y.
    """
    if (config.n1, config.n2) != (couplings.n1, couplings.n2):
        raise ConfigurationError(
            f"coupling dimensions {(couplings.n1, couplings.n2)} do not match "
            f"state dimensions {(config.n1, config.n2)}"
        )
    x, y = config.x, config.y
    n1, n2 = config.n1, config.n2
    ppx, ppy, pm = couplings.psi_plus_x, couplings.psi_plus_y, couplings.psi_minus

    # zero diagonal makes the full matrix product equal the i' != i sums
    align_x = (ppx @ x - ppx.sum(axis=1)[:, None] * x) / n1
    anti_x = (pm @ y - pm.sum(axis=1)[:, None] * x) / n2
    align_y = (ppy @ y - ppy.sum(axis=1)[:, None] * y) / n2
    anti_y = (pm.T @ x - pm.sum(axis=0)[:, None] * y) / n1
    return align_x - anti_x, align_y - anti_y


def alignment_laplacian(psi_plus: np.ndarray) -> np.ndarray:
    """Scaled graph Laplacian of one intra-group coupling matrix.

    Off-diagonal entries are ``-w_{i,i'}/n`` and the diagonal carries the row
    sums divided by n, so the matrix is positive semidefinite with the
    all-ones vector in its kernel.
    """
    psi_plus = _check_intra(psi_plus, "psi_plus")
    n = psi_plus.shape[0]
    return (np.diag(psi_plus.sum(axis=1)) - psi_plus) / n


def system_matrix(couplings: CouplingSet) -> np.ndarray:
    """Full linear generator M with dz/dt = M z for the stacked state z = (x; y).

    Block structure: the diagonal blocks combine the negated alignment
    Laplacian with a positive diagonal of per-agent mean cross weights (the
    self-repulsion part of anti-alignment), and the off-diagonal blocks are
    the negated, size-normalized cross matrix.  M acts identically on every
    spatial coordinate.
    """
    n1, n2 = couplings.n1, couplings.n2
    pm = couplings.psi_minus
    m_xx = -alignment_laplacian(couplings.psi_plus_x) + np.diag(pm.sum(axis=1) / n2)
    m_yy = -alignment_laplacian(couplings.psi_plus_y) + np.diag(pm.sum(axis=0) / n1)
    return np.block([[m_xx, -pm / n2], [-pm.T / n1, m_yy]])
