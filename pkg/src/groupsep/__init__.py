"""Two-group opinion dynamics with Bernoulli-random communication.

Simulation of a linear alignment/anti-alignment model between two opposing
groups, exact matrix-exponential propagation, separation diagnostics, the
spectral and tail-bound machinery behind the separation estimates, and
reproducible Monte Carlo ensemble sweeps.
"""

__version__ = "0.1.0"

from .diagnostics import (
    BoundRates,
    GrowthRateResult,
    OdeBoundParams,
    SeparationReport,
    growth_rate_check,
    ode_bounds,
    riccati_oracle,
    separation_report,
)
from .errors import (
    ConfigurationError,
    DegenerateGapError,
    GroupDynamicsError,
    InsufficientDataError,
    NoGapError,
    ScheduleError,
    SweepError,
)
from .experiments import (
    SizeRecord,
    SlopeFit,
    SweepConfig,
    SweepResult,
    TrajectoryPoint,
    fit_slope,
    run_sweep,
    run_trajectory,
)
from .integrate import PropagationPlan, propagate, propagate_rk
from .model import (
    AgentConfiguration,
    CouplingSet,
    GroupStatistics,
    alignment_laplacian,
    decompose,
    rhs,
    system_matrix,
)
from .sampling import (
    CommunicationSchedule,
    Scenario,
    ScenarioConfig,
    build_schedule,
    derive_seed,
    sample_coupling_set,
)
from .spectral import (
    ConditionCheck,
    ConditionReport,
    ConcentrationResult,
    RowColumnStats,
    TailBound,
    binomial_tail,
    check_conditions,
    concentration_trial,
    fiedler_number,
    row_column_stats,
)

__all__ = [
    "__version__",
    # model
    "AgentConfiguration", "CouplingSet", "GroupStatistics",
    "decompose", "rhs", "system_matrix", "alignment_laplacian",
    # sampling
    "Scenario", "ScenarioConfig", "CommunicationSchedule",
    "sample_coupling_set", "build_schedule", "derive_seed",
    # spectral
    "RowColumnStats", "ConditionCheck", "ConditionReport", "TailBound",
    "ConcentrationResult", "fiedler_number", "row_column_stats",
    "check_conditions", "binomial_tail", "concentration_trial",
    # integrate
    "PropagationPlan", "propagate", "propagate_rk",
    # diagnostics
    "SeparationReport", "OdeBoundParams", "BoundRates", "GrowthRateResult",
    "separation_report", "ode_bounds", "riccati_oracle", "growth_rate_check",
    # experiments
    "SweepConfig", "SweepResult", "SizeRecord", "SlopeFit", "TrajectoryPoint",
    "run_trajectory", "run_sweep", "fit_slope",
    # errors
    "GroupDynamicsError", "ConfigurationError", "ScheduleError",
    "DegenerateGapError", "NoGapError", "InsufficientDataError", "SweepError",
]
