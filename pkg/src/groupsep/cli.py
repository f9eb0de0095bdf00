"""Command-line surface and bit-stable tabular output.

Subcommands:
  simulate       one trajectory -> CSV time series + JSON report
  sweep          size-scaling ensemble -> per-size CSV + JSON slope summary
  lemma-ode      comparison-lemma thresholds + Riccati oracle slack
  spectral       Fiedler / row-stats / condition report for a coupling set
  concentration  Monte Carlo concentration frequencies over group sizes

All numeric output is printed with 17 significant digits, and every JSON
document embeds the resolved configuration, so identical configurations
reproduce identical bytes (the manifest timestamp aside).
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from . import __version__
from .diagnostics import (
    OdeBoundParams,
    SeparationReport,
    ode_bounds,
    riccati_oracle,
)
from .errors import ConfigurationError, GroupDynamicsError
from .experiments import SweepConfig, TrajectoryPoint, run_sweep, run_trajectory
from .model import AgentConfiguration, CouplingSet
from .sampling import ScenarioConfig, sample_coupling_set
from .spectral import check_conditions, concentration_trial, row_column_stats

_DEFAULTS = {
    "n1": 40,
    "n2": 40,
    "p": 0.3,
    "q": 0.2,
    "scenario": "static",
    "tau": 1.0,
    "t_final": 20.0,
    "dim": 1,
    "seed": 0,
    "sample_count": 401,
}
_SWEEP_DEFAULTS = {
    "n_values": (10, 20, 40, 80, 160),
    "n_test": 10000,
    "n_discard": 100,
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration (file defaults + overrides)."""

    n1: int
    n2: int
    p: float
    q: float
    scenario: str
    tau: float
    t_final: float
    dim: int
    seed: int
    sample_count: int
    sweep_n_values: tuple[int, ...]
    sweep_n_test: int
    sweep_n_discard: int

    def to_dict(self) -> dict:
        return {
            "n1": self.n1,
            "n2": self.n2,
            "p": self.p,
            "q": self.q,
            "scenario": self.scenario,
            "tau": self.tau,
            "t_final": self.t_final,
            "dim": self.dim,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "sweep": {
                "n_values": list(self.sweep_n_values),
                "n_test": self.sweep_n_test,
                "n_discard": self.sweep_n_discard,
            },
        }

    def scenario_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            n1=self.n1, n2=self.n2, p=self.p, q=self.q,
            scenario=self.scenario, tau=self.tau, seed=self.seed,
        )


def _require(cond: bool, field: str, message: str):
    if not cond:
        raise ConfigurationError(f"{field}: {message}")


def resolve_config(data: dict) -> RunConfig:
    """Validate a raw config mapping and fill unset fields with defaults."""
    if not isinstance(data, dict):
        raise ConfigurationError("config: top level must be a JSON object")
    unknown = set(data) - set(_DEFAULTS) - {"sweep"}
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    merged = {**_DEFAULTS, **{k: v for k, v in data.items() if k != "sweep"}}

    sweep_raw = data.get("sweep", {})
    if not isinstance(sweep_raw, dict):
        raise ConfigurationError("sweep: must be a JSON object")
    unknown = set(sweep_raw) - set(_SWEEP_DEFAULTS)
    if unknown:
        raise ConfigurationError(f"unknown sweep key(s): {', '.join(sorted(unknown))}")
    sweep = {**_SWEEP_DEFAULTS, **sweep_raw}

    for field in ("n1", "n2", "dim", "seed", "sample_count"):
        _require(isinstance(merged[field], int) and not isinstance(merged[field], bool),
                 field, f"must be an integer, got {merged[field]!r}")
    for field in ("p", "q", "tau", "t_final"):
        _require(isinstance(merged[field], (int, float)) and not isinstance(merged[field], bool),
                 field, f"must be a number, got {merged[field]!r}")
        merged[field] = float(merged[field])
    _require(merged["n1"] >= 1, "n1", "must be >= 1")
    _require(merged["n2"] >= 1, "n2", "must be >= 1")
    _require(0.0 < merged["p"] < 1.0, "p", f"must lie in (0, 1), got {merged['p']}")
    _require(0.0 < merged["q"] < 1.0, "q", f"must lie in (0, 1), got {merged['q']}")
    _require(merged["scenario"] in ("static", "resampled"), "scenario",
             f"must be 'static' or 'resampled', got {merged['scenario']!r}")
    _require(merged["tau"] > 0.0, "tau", "must be positive")
    _require(merged["t_final"] > 0.0, "t_final", "must be positive")
    _require(merged["dim"] >= 1, "dim", "must be >= 1")
    _require(merged["seed"] >= 0, "seed", "must be nonnegative")
    _require(merged["sample_count"] >= 2, "sample_count", "must be >= 2")

    n_values = sweep["n_values"]
    _require(isinstance(n_values, (list, tuple)) and len(n_values) > 0,
             "sweep.n_values", "must be a nonempty list of integers")
    for n in n_values:
        _require(isinstance(n, int) and n >= 2, "sweep.n_values", f"entries must be integers >= 2, got {n!r}")
    _require(len(set(n_values)) == len(n_values), "sweep.n_values", "entries must be distinct")
    for field in ("n_test", "n_discard"):
        _require(isinstance(sweep[field], int), f"sweep.{field}", "must be an integer")
    _require(sweep["n_test"] >= 1, "sweep.n_test", "must be >= 1")
    _require(0 <= sweep["n_discard"] < sweep["n_test"], "sweep.n_discard",
             "must satisfy 0 <= n_discard < n_test")

    return RunConfig(
        n1=merged["n1"], n2=merged["n2"], p=merged["p"], q=merged["q"],
        scenario=merged["scenario"], tau=merged["tau"], t_final=merged["t_final"],
        dim=merged["dim"], seed=merged["seed"], sample_count=merged["sample_count"],
        sweep_n_values=tuple(n_values), sweep_n_test=sweep["n_test"],
        sweep_n_discard=sweep["n_discard"],
    )


def load_config(path: str) -> RunConfig:
    """Load, validate, and default-fill a JSON run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON in {path}: {exc}") from exc
    return resolve_config(data)


@dataclass(frozen=True)
class RunManifest:
    """Everything needed to reproduce a command's output byte for byte
    (except the timestamp, which is informational only)."""

    command: str
    version: str
    seed: int
    timestamp: str
    config: dict

    def to_dict(self) -> dict:
        return {
            "artifact": "groupsep",
            "version": self.version,
            "command": self.command,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "config": self.config,
        }


def _manifest(command: str, seed: int, config: dict) -> dict:
    return RunManifest(
        command=command,
        version=__version__,
        seed=seed,
        timestamp=datetime.datetime.now(datetime.timezone.utc).isoformat(),
        config=config,
    ).to_dict()


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_trajectory_csv(series: Sequence[AgentConfiguration | TrajectoryPoint], fp: IO[str]):
    """Emit a trajectory as long-format CSV.

    Columns: t,group,index,coord,value with group in {x, y}; rows ordered by
    (t, group, index, coord); floats carry 17 significant digits so the file
    round-trips doubles exactly and identical runs produce identical bytes.
    """
    configs = [s.config if isinstance(s, TrajectoryPoint) else s for s in series]
    if not configs:
        raise ConfigurationError("trajectory series is empty")
    fp.write("t,group,index,coord,value\n")
    for config in configs:
        t = _fmt(config.t)
        for group, block in (("x", config.x), ("y", config.y)):
            for index in range(block.shape[0]):
                for coord in range(block.shape[1]):
                    fp.write(f"{t},{group},{index},{coord},{_fmt(block[index, coord])}\n")


def _report_dict(report: SeparationReport | None) -> dict:
    if report is None:
        return {"degenerate_gap": True}
    return {
        "degenerate_gap": False,
        "t": report.t,
        "lambda": report.lam,
        "lambda_tilde": report.lam_tilde,
        "mean_gap_sq": report.mean_gap_sq,
        "hyperplane_vector": [float(v) for v in report.hyperplane_vector],
        "hyperplane_separated": bool(report.hyperplane_separated),
        "margin": report.margin,
        "separating_constant": report.separating_constant,
        "log_scale": report.log_scale,
    }


def _emit_json(document: dict, path: str | None):
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(text)


def _config_from_args(args) -> RunConfig:
    data = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fp:
            try:
                data = json.load(fp)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"malformed JSON in {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config: top level must be a JSON object")
    overrides = {}
    if getattr(args, "n", None) is not None:
        overrides["n1"] = overrides["n2"] = args.n
    for field in ("n1", "n2", "p", "q", "scenario", "tau", "t_final", "dim", "seed",
                  "sample_count"):
        value = getattr(args, field, None)
        if value is not None:
            overrides[field] = value
    sweep_overrides = {}
    if getattr(args, "n_values", None) is not None:
        sweep_overrides["n_values"] = args.n_values
    for field in ("n_test", "n_discard"):
        value = getattr(args, field, None)
        if value is not None:
            sweep_overrides[field] = value
    merged = {**data, **overrides}
    if sweep_overrides or "sweep" in data:
        merged["sweep"] = {**data.get("sweep", {}), **sweep_overrides}
    return resolve_config(merged)


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"expected a comma-separated integer list, got {text!r}") from exc


# ----------------------------------------------------------------------
# subcommand handlers
# ----------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    series = run_trajectory(
        cfg.scenario_config(), t_final=cfg.t_final, dim=cfg.dim, sample_count=cfg.sample_count
    )
    with open(args.out, "w", encoding="utf-8", newline="") as fp:
        write_trajectory_csv(series, fp)
    document = {
        "manifest": _manifest("simulate", cfg.seed, cfg.to_dict()),
        "initial": _report_dict(series[0].report),
        "final": _report_dict(series[-1].report),
        "degenerate_times": sum(1 for pt in series if pt.report is None),
        "trajectory_csv": args.out,
    }
    _emit_json(document, args.report)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    sweep_cfg = SweepConfig(
        n_values=cfg.sweep_n_values,
        n_test=cfg.sweep_n_test,
        n_discard=cfg.sweep_n_discard,
        t_final=cfg.t_final,
        base=cfg.scenario_config(),
        master_seed=cfg.seed,
        dim=cfg.dim,
    )
    result = run_sweep(sweep_cfg, n_jobs=args.jobs)
    with open(args.out, "w", encoding="utf-8", newline="") as fp:
        fp.write("n,mean_lambda,n_degenerate,q00,q25,q50,q75,q100\n")
        for rec in result.records:
            quantiles = ",".join(_fmt(v) for v in rec.quantiles)
            fp.write(f"{rec.n},{_fmt(rec.mean_lambda)},{rec.n_degenerate},{quantiles}\n")
    document = {
        "manifest": _manifest("sweep", cfg.seed, cfg.to_dict()),
        "fitted_slope": result.fitted_slope,
        "fitted_intercept": result.fitted_intercept,
        "r_squared": result.r_squared,
        "records": [
            {
                "n": rec.n,
                "mean_lambda": rec.mean_lambda,
                "n_degenerate": rec.n_degenerate,
                "quantiles": rec.quantiles._asdict(),
            }
            for rec in result.records
        ],
        "sweep_csv": args.out,
    }
    _emit_json(document, args.summary)
    return 0


def _cmd_lemma_ode(args) -> int:
    params = OdeBoundParams(a11=args.a11, a12=args.a12, a21=args.a21, a22=args.a22)
    rates = ode_bounds(params, args.lambda0)
    slack = riccati_oracle(params, args.lambda0, t_end=args.t_end, step=args.step)
    document = {
        "manifest": _manifest("lemma-ode", 0, {
            "a11": args.a11, "a12": args.a12, "a21": args.a21, "a22": args.a22,
            "lambda0": args.lambda0, "t_end": args.t_end, "step": args.step,
        }),
        "delta": params.delta,
        "lambda_plus": rates.lambda_plus,
        "lambda_minus": rates.lambda_minus,
        "mu": rates.mu,
        "vieta_product": rates.lambda_plus * rates.lambda_minus,
        "riccati_min_slack": slack,
    }
    _emit_json(document, args.out)
    return 0


def _load_coupling_file(path: str) -> CouplingSet:
    try:
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"malformed JSON in {path}: {exc}") from exc
    for key in ("psi_plus_x", "psi_plus_y", "psi_minus"):
        if key not in data:
            raise ConfigurationError(f"coupling file missing key {key!r}")
    return CouplingSet(
        psi_plus_x=np.array(data["psi_plus_x"], dtype=float),
        psi_plus_y=np.array(data["psi_plus_y"], dtype=float),
        psi_minus=np.array(data["psi_minus"], dtype=float),
    )


def _cmd_spectral(args) -> int:
    if args.coupling_file:
        couplings = _load_coupling_file(args.coupling_file)
        p = args.p if args.p is not None else _DEFAULTS["p"]
        q = args.q if args.q is not None else _DEFAULTS["q"]
        config_block = {"coupling_file": args.coupling_file,
                        "p": p, "q": q, "alpha": args.alpha}
    else:
        cfg = _config_from_args(args)
        couplings = sample_coupling_set(cfg.scenario_config(), args.interval_index)
        p, q = cfg.p, cfg.q
        config_block = {**cfg.to_dict(), "alpha": args.alpha,
                        "interval_index": args.interval_index}
    report = check_conditions(couplings, p=p, q=q, alpha=args.alpha)
    cross = row_column_stats(couplings.psi_minus)
    document = {
        "manifest": _manifest("spectral", getattr(args, "seed", 0) or 0, config_block),
        "fiedler_x": report.fiedler_x,
        "fiedler_y": report.fiedler_y,
        "fiedler_min": report.fiedler_min,
        "cross_stats": {
            "overall_mean": cross.overall_mean,
            "max_deviation": cross.max_deviation,
            "row_means": [float(v) for v in cross.row_means],
            "col_means": [float(v) for v in cross.col_means],
        },
        "conditions": [
            {"name": c.name, "observed": c.observed, "threshold": c.threshold,
             "passed": c.passed}
            for c in report.checks
        ],
        "overall_pass": report.overall_pass,
    }
    _emit_json(document, args.out)
    return 0


def _cmd_concentration(args) -> int:
    n_values = args.n_values or [50, 100, 200]
    rows = []
    for n in n_values:
        cfg = ScenarioConfig(n1=n, n2=n, p=args.p, q=args.q, seed=args.seed)
        freq = concentration_trial(cfg, alpha=args.alpha, n_samples=args.samples,
                                   delta=args.delta)
        rows.append({
            "n": n,
            "freq_fiedler_far": freq.freq_fiedler_far,
            "freq_rowmean_far": freq.freq_rowmean_far,
        })
    document = {
        "manifest": _manifest("concentration", args.seed, {
            "n_values": list(n_values), "samples": args.samples, "p": args.p,
            "q": args.q, "alpha": args.alpha, "delta": args.delta, "seed": args.seed,
        }),
        "rows": rows,
    }
    _emit_json(document, args.out)
    return 0


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------

def _add_scenario_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help="JSON config file; flags override its fields")
    sub.add_argument("--n", type=int, help="set both group sizes (n1 = n2 = N)")
    sub.add_argument("--n1", type=int)
    sub.add_argument("--n2", type=int)
    sub.add_argument("--p", type=float, help="intra-group communication rate")
    sub.add_argument("--q", type=float, help="cross-group communication rate")
    sub.add_argument("--scenario", choices=["static", "resampled"])
    sub.add_argument("--tau", type=float, help="resampling interval")
    sub.add_argument("--t-final", dest="t_final", type=float)
    sub.add_argument("--dim", type=int, help="spatial dimension of opinions")
    sub.add_argument("--seed", type=int)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="groupsep",
        description="Two-group opinion dynamics with Bernoulli-random communication.",
    )
    parser.add_argument("--version", action="version", version=f"groupsep {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sim = commands.add_parser("simulate", help="run one trajectory")
    _add_scenario_flags(sim)
    sim.add_argument("--samples", dest="sample_count", type=int,
                     help="number of output sample times")
    sim.add_argument("--out", required=True, help="trajectory CSV path")
    sim.add_argument("--report", help="JSON report path (default: stdout)")
    sim.set_defaults(func=_cmd_simulate)

    sweep = commands.add_parser("sweep", help="size-scaling ensemble sweep")
    _add_scenario_flags(sweep)
    sweep.add_argument("--n-values", dest="n_values", type=_parse_int_list,
                       help="comma-separated group sizes")
    sweep.add_argument("--n-test", dest="n_test", type=int, help="ensemble size per N")
    sweep.add_argument("--n-discard", dest="n_discard", type=int,
                       help="largest samples dropped per N")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")
    sweep.add_argument("--out", required=True, help="per-size CSV path")
    sweep.add_argument("--summary", help="JSON summary path (default: stdout)")
    sweep.set_defaults(func=_cmd_sweep)

    ode = commands.add_parser("lemma-ode", help="comparison-lemma thresholds and slack")
    ode.add_argument("--a11", type=float, required=True)
    ode.add_argument("--a12", type=float, required=True)
    ode.add_argument("--a21", type=float, required=True)
    ode.add_argument("--a22", type=float, required=True)
    ode.add_argument("--lambda0", type=float, required=True, help="initial ratio g(0)/f(0)")
    ode.add_argument("--t-end", dest="t_end", type=float, default=10.0)
    ode.add_argument("--step", type=float, default=1e-3)
    ode.add_argument("--out", help="JSON output path (default: stdout)")
    ode.set_defaults(func=_cmd_lemma_ode)

    spec = commands.add_parser("spectral", help="coupling-set condition report")
    _add_scenario_flags(spec)
    spec.add_argument("--alpha", type=float, default=0.5)
    spec.add_argument("--interval-index", dest="interval_index", type=int, default=0)
    spec.add_argument("--coupling-file",
                      help="JSON file with psi_plus_x/psi_plus_y/psi_minus matrices")
    spec.add_argument("--out", help="JSON output path (default: stdout)")
    spec.set_defaults(func=_cmd_spectral)

    conc = commands.add_parser("concentration", help="Monte Carlo concentration trial")
    conc.add_argument("--n-values", dest="n_values", type=_parse_int_list,
                      help="comma-separated group sizes (default: 50,100,200)")
    conc.add_argument("--samples", type=int, default=200)
    conc.add_argument("--p", type=float, default=0.3)
    conc.add_argument("--q", type=float, default=0.2)
    conc.add_argument("--alpha", type=float, default=0.5)
    conc.add_argument("--delta", type=float, default=0.1)
    conc.add_argument("--seed", type=int, default=0)
    conc.add_argument("--out", help="JSON output path (default: stdout)")
    conc.set_defaults(func=_cmd_concentration)

    return parser


def cli_main(argv: Sequence[str] | None = None) -> int:
    """Entry point: 0 on success, 2 on configuration errors, 1 on runtime errors."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (GroupDynamicsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> int:
    return cli_main(sys.argv[1:])
