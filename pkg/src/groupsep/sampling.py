"""Deterministic Bernoulli sampling of coupling sets and schedules.

Every random draw comes from a counter-based generator keyed by
``(seed, interval_index, stream)``, so any matrix of any interval can be
regenerated bit-identically in isolation, in any order, on any worker.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigurationError, ScheduleError
from .model import CouplingSet

_UINT64 = 2**64

# stream ids within one (seed, interval) key
STREAM_PLUS_X = 0
STREAM_PLUS_Y = 1
STREAM_MINUS = 2
STREAM_INITIAL_STATE = 3


class Scenario(str, Enum):
    STATIC = "static"
    RESAMPLED = "resampled"


def derive_seed(master_seed: int, *parts: int) -> int:
    """Stable 64-bit child seed from a master seed and integer labels.

    Used to give ensemble members independent, reproducible streams:
    the child is the master XOR a blake2b hash of the labels.  Python's
    builtin ``hash`` is avoided because it is not stable across processes.
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(int(part).to_bytes(16, "little", signed=True))
    return (int(master_seed) ^ int.from_bytes(h.digest(), "little")) % _UINT64


def stream_rng(seed: int, interval_index: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one (seed, interval, stream) triple."""
    key = np.random.SeedSequence((seed % _UINT64, interval_index, stream))
    return np.random.Generator(np.random.Philox(key))


@dataclass(frozen=True)
class ScenarioConfig:
    """Group sizes, communication rates, and the randomness scenario.

    ``p`` is the intra-group communication rate, ``q`` the cross-group rate.
    The closed interval [0, 1] is accepted so that the degenerate all-ones /
    all-zeros couplings remain constructible for deterministic tests; the
    file-config loader enforces the strict (0, 1) range.
    """

    n1: int
    n2: int
    p: float
    q: float
    scenario: Scenario = Scenario.STATIC
    tau: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigurationError("group sizes n1, n2 must be >= 1")
        if not (0.0 <= self.p <= 1.0):
            raise ConfigurationError(f"p must lie in [0, 1], got {self.p}")
        if not (0.0 <= self.q <= 1.0):
            raise ConfigurationError(f"q must lie in [0, 1], got {self.q}")
        if not self.tau > 0.0:
            raise ConfigurationError(f"tau must be positive, got {self.tau}")
        if not (0 <= int(self.seed) < _UINT64):
            raise ConfigurationError("seed must be an unsigned 64-bit integer")
        object.__setattr__(self, "scenario", Scenario(self.scenario))

    @property
    def kappa(self) -> float:
        """Size comparability ratio max(n1,n2)/min(n1,n2); recorded, not enforced."""
        return max(self.n1, self.n2) / min(self.n1, self.n2)


def _symmetric_bernoulli(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    # draw only the upper triangle, mirror it, keep the diagonal zero
    m = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    draws = (rng.random(iu[0].size) < p).astype(float)
    m[iu] = draws
    return m + m.T


def sample_coupling_set(cfg: ScenarioConfig, interval_index: int = 0) -> CouplingSet:
    """One independent Bernoulli coupling set for the given time interval.

    Intra-group entries are Bernoulli(p) on the upper triangle mirrored to
    the lower, cross entries Bernoulli(q); all draws are mutually
    independent and a pure function of (seed, interval_index, stream,
    position), so repeated calls are bit-identical.
    """
    if interval_index < 0:
        raise ConfigurationError("interval_index must be >= 0")
    if cfg.scenario is Scenario.STATIC and interval_index != 0:
        raise ConfigurationError("static scenario has a single interval (index 0)")
    ppx = _symmetric_bernoulli(cfg.n1, cfg.p, stream_rng(cfg.seed, interval_index, STREAM_PLUS_X))
    ppy = _symmetric_bernoulli(cfg.n2, cfg.p, stream_rng(cfg.seed, interval_index, STREAM_PLUS_Y))
    pm = (stream_rng(cfg.seed, interval_index, STREAM_MINUS).random((cfg.n1, cfg.n2)) < cfg.q)
    return CouplingSet(psi_plus_x=ppx, psi_plus_y=ppy, psi_minus=pm.astype(float))


@dataclass(frozen=True)
class CommunicationSchedule:
    """Time-indexed sequence of coupling sets.

    Static schedules hold one entry valid for all t >= 0.  Resampled
    schedules hold contiguous entries from k = 0, with entry k governing
    t in [k*tau, (k+1)*tau); the last entry also covers a trailing partial
    interval when the horizon is not a multiple of tau.
    """

    kind: Scenario
    entries: tuple[tuple[int, CouplingSet], ...]
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "kind", Scenario(self.kind))
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.tau > 0.0:
            raise ConfigurationError("tau must be positive")
        if not self.entries:
            raise ConfigurationError("schedule must contain at least one entry")
        if self.kind is Scenario.STATIC and len(self.entries) != 1:
            raise ConfigurationError("static schedule must contain exactly one entry")
        for pos, (k, _) in enumerate(self.entries):
            if k != pos:
                raise ConfigurationError("schedule entries must be contiguous from interval 0")

    @property
    def n1(self) -> int:
        return self.entries[0][1].n1

    @property
    def n2(self) -> int:
        return self.entries[0][1].n2

    def coupling_for_interval(self, k: int) -> CouplingSet:
        if self.kind is Scenario.STATIC:
            return self.entries[0][1]
        if not (0 <= k < len(self.entries)):
            raise ScheduleError(f"no coupling entry for interval {k}")
        return self.entries[k][1]

    def interval_of(self, t: float) -> int:
        """Index of the interval governing time t (last entry covers overhang)."""
        if self.kind is Scenario.STATIC:
            return 0
        return min(int(t / self.tau), len(self.entries) - 1)


def build_schedule(cfg: ScenarioConfig, t_end: float) -> CommunicationSchedule:
    """Sample the full schedule covering [0, t_end].

    Static: a single draw.  Resampled: ceil(t_end/tau) independent draws,
    the final one also governing any partial last interval.
    """
    if not t_end > 0.0:
        raise ConfigurationError(f"t_end must be positive, got {t_end}")
    if cfg.scenario is Scenario.STATIC:
        return CommunicationSchedule(
            kind=Scenario.STATIC, entries=((0, sample_coupling_set(cfg, 0)),), tau=cfg.tau
        )
    count = max(1, int(np.ceil(t_end / cfg.tau - 1e-12)))
    entries = tuple((k, sample_coupling_set(cfg, k)) for k in range(count))
    return CommunicationSchedule(kind=Scenario.RESAMPLED, entries=entries, tau=cfg.tau)
