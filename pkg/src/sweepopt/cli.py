"""Command-line front end.

Three subcommands over the built-in problem catalog:

* ``solve``          -- run the continuation solver, write trajectory CSV
                        and a machine-readable report JSON.
* ``check``          -- run the geometry property checks plus a one-level
                        trajectory invariant check.
* ``compare-exact``  -- solve, then compare against the problem's
                        registered exact trajectory; writes a combined CSV
                        for plotting.

Exit codes: 0 success/converged, 1 error, 2 level budget exhausted,
3 check failure.  Plotting is out of scope: artifacts are data only.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, catalog, continuation, diagnostics, initialization, schedule
from .catalog import CatalogEntry
from .continuation import SolveReport, StopReason
from .dynamics import PenalizedField
from .integrator import PiecewiseControl, integrate
from .optimizer import NelderMeadOptions

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MAX_LEVELS = 2
EXIT_CHECK_FAILED = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved run parameters (catalog defaults < config file < flags)."""

    problem: str
    n_intervals: int
    eps: float
    gamma0: float
    delta: float
    rk4_step: float
    strict: bool = False
    cold_start: bool = False
    max_levels: int = 200
    seed: int = 0
    output_dir: str = "."

    def validate(self) -> None:
        if self.problem not in catalog.keys():
            raise ConfigError(
                f"unknown problem {self.problem!r}; catalog: {', '.join(catalog.keys())}"
            )
        if self.n_intervals < 1:
            raise ConfigError(f"N must be a positive integer, got {self.n_intervals}")
        for name in ("eps", "gamma0", "delta", "rk4_step"):
            v = getattr(self, name)
            if not (v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.max_levels < 2:
            raise ConfigError("max_levels must be at least 2")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# config-file keys, flag names and RunConfig fields kept in sync here
_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = sorted(set(data) - _FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    """Merge catalog defaults, config file and flags (later wins)."""
    merged: dict = {}
    if args.config:
        merged.update(_load_config_file(args.config))
    flag_map = {
        "problem": args.problem,
        "n_intervals": args.N,
        "eps": args.eps,
        "gamma0": args.gamma0,
        "delta": args.delta,
        "rk4_step": args.rk4_step,
        "max_levels": args.max_levels,
        "seed": args.seed,
        "output_dir": args.output_dir,
    }
    for key, val in flag_map.items():
        if val is not None:
            merged[key] = val
    if args.strict:
        merged["strict"] = True
    if args.cold_start:
        merged["cold_start"] = True

    if "problem" not in merged:
        raise ConfigError(
            f"no problem selected (use --problem); catalog: {', '.join(catalog.keys())}"
        )
    key = merged["problem"]
    if key not in catalog.keys():
        raise ConfigError(
            f"unknown problem {key!r}; catalog: {', '.join(catalog.keys())}"
        )
    defaults = dict(catalog.get(key).defaults or {})
    base = {
        "n_intervals": int(defaults.get("N", 10)),
        "eps": float(defaults.get("eps", 1e-2)),
        "gamma0": float(defaults.get("gamma0", 10.0)),
        "delta": float(defaults.get("delta", 5.0)),
        "rk4_step": float(defaults.get("step", 1e-3)),
    }
    base.update(merged)
    cfg = RunConfig(**base)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_trajectory_csv(path: Path, report: SolveReport, exact=None) -> None:
    """Header ``t,x1,...,xn,psi_smooth,xi_total[,exact_x1,...]``, 17 sig digits."""
    traj = report.final_trajectory
    n = traj.states.shape[1]
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["psi_smooth", "xi_total"]
    if exact is not None:
        header += [f"exact_x{i + 1}" for i in range(n)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, t in enumerate(traj.times):
            row = [_fmt(t)] + [_fmt(v) for v in traj.states[i]]
            row += [_fmt(traj.psi_smooth[i]), _fmt(traj.xi_total[i])]
            if exact is not None:
                row += [_fmt(v) for v in np.asarray(exact(t), dtype=float)]
            w.writerow(row)


def report_to_dict(report: SolveReport, config: RunConfig) -> dict:
    levels = []
    for lv in report.levels:
        levels.append(
            {
                "gamma": lv.level.gamma,
                "alpha": lv.level.alpha,
                "sigma": lv.level.sigma,
                "cost": lv.result.best_cost,
                "evaluations": lv.result.evaluations,
                "converged": lv.result.converged,
                "invariants": lv.invariants.to_dict(),
            }
        )
    return {
        "version": __version__,
        "config": config.to_dict(),
        "levels": levels,
        "stop_reason": report.stop_reason.value,
        "final_gamma": report.final_gamma,
        "final_cost": report.final_cost,
        "error_message": report.error_message,
        "wall_time": report.wall_time,
    }


def write_report_json(path: Path, report: SolveReport, config: RunConfig) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report, config), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _solve(config: RunConfig) -> SolveReport:
    entry = catalog.get(config.problem)
    if entry.non_conforming:
        raise ConfigError(
            f"problem {config.problem!r} is flagged non-conforming "
            "(used for geometry checks only, not solvable)"
        )
    return continuation.run(
        entry.problem,
        config.n_intervals,
        config.eps,
        config.gamma0,
        config.delta,
        step=config.rk4_step,
        max_levels=config.max_levels,
        cold_start=config.cold_start,
        strict=config.strict,
    )


def _stop_exit_code(report: SolveReport) -> int:
    return {
        StopReason.COST_CONVERGED: EXIT_OK,
        StopReason.MAX_LEVELS: EXIT_MAX_LEVELS,
        StopReason.ERROR: EXIT_ERROR,
    }[report.stop_reason]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_solve(config: RunConfig) -> int:
    report = _solve(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "trajectory.csv", report)
    write_report_json(out / "report.json", report, config)
    print(
        f"{config.problem}: {report.stop_reason.value} after "
        f"{len(report.levels)} levels, final gamma {report.final_gamma:g}, "
        f"final cost {report.final_cost:.6f} ({report.wall_time:.1f} s)"
    )
    return _stop_exit_code(report)


def run_checks(entry: CatalogEntry, config: RunConfig) -> list[diagnostics.InvariantSummary]:
    """Geometry property checks plus one midpoint-control trajectory check."""
    problem = entry.problem
    bounds = problem.state_bounds
    summaries = [
        diagnostics.check_geometry(
            problem.sset,
            gamma_list=[40.0, 80.0, 160.0],
            bounds=bounds,
            sample_count=1000,
            seed=config.seed,
            tol=problem.tolerances,
        )
    ]
    # one trajectory at a comfortably super-threshold penalty strength
    gamma = max(
        config.gamma0,
        1.2 * schedule.gamma_threshold(problem.m_bound, problem.sset.eta),
    )
    level = schedule.make_level(
        problem.m_bound, problem.sset.eta, problem.sset.m_psi,
        problem.sset.r, gamma,
    )
    mid = 0.5 * (problem.control_lo + problem.control_hi)
    ctrl = PiecewiseControl(
        np.tile(mid, (config.n_intervals, 1)), problem.horizon
    )
    start = initialization.shifted_start(
        problem.sset, problem.x0, level, problem.tolerances
    )
    traj = integrate(
        PenalizedField(problem, level), ctrl, start, config.rk4_step
    )
    summaries.append(
        diagnostics.check_trajectory(problem, level, traj, problem.tolerances)
    )
    return summaries


def cmd_check(config: RunConfig) -> int:
    entry = catalog.get(config.problem)
    summaries = run_checks(entry, config)
    ok = all(s.passed for s in summaries)
    for s in summaries:
        for c in s.checks:
            status = "ok" if c.passed else "FAIL"
            print(
                f"{c.name:24s} {status:4s} samples={c.samples} "
                f"violations={c.violations} worst_margin={c.worst_margin:.3g}"
            )
    print(f"{config.problem}: {'all checks passed' if ok else 'CHECKS FAILED'}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_compare_exact(config: RunConfig) -> int:
    entry = catalog.get(config.problem)
    if entry.exact is None:
        raise ConfigError(
            f"problem {config.problem!r} has no registered exact trajectory"
        )
    report = _solve(config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "compare.csv", report, exact=entry.exact)
    write_report_json(out / "report.json", report, config)
    sup, gap = continuation.compare_exact(entry.problem, report, entry.exact)
    print(
        f"{config.problem}: {report.stop_reason.value}, final gamma "
        f"{report.final_gamma:g}, sup_distance {sup:.6f}, cost gap {gap:.6f}"
    )
    return _stop_exit_code(report)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sweepopt",
        description="Penalty-continuation solver for controlled sweeping processes",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("solve", "run the continuation solver and export artifacts"),
        ("check", "run geometry and trajectory invariant checks"),
        ("compare-exact", "solve and compare against the exact trajectory"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--problem", help="catalog problem key")
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--N", type=int, help="number of control intervals")
        p.add_argument("--eps", type=float, help="cost-stagnation stopping tolerance")
        p.add_argument("--gamma0", type=float, help="initial penalty strength")
        p.add_argument("--delta", type=float, help="penalty increment per level")
        p.add_argument("--rk4-step", dest="rk4_step", type=float,
                       help="target RK4 substep length")
        p.add_argument("--max-levels", dest="max_levels", type=int,
                       help="continuation level budget")
        p.add_argument("--seed", type=int, help="seed for diagnostic sampling")
        p.add_argument("--output-dir", dest="output_dir", help="artifact directory")
        p.add_argument("--strict", action="store_true",
                       help="reject penalty strengths below the admissible threshold")
        p.add_argument("--cold-start", dest="cold_start", action="store_true",
                       help="restart every level's search from the control-box midpoint")
    return parser


_COMMANDS = {
    "solve": cmd_solve,
    "check": cmd_check,
    "compare-exact": cmd_compare_exact,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = build_config(args)
        return _COMMANDS[args.command](config)
    except (ConfigError, schedule.GammaTooSmall) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
