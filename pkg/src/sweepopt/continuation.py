"""Outer continuation loop over increasing penalty strengths.

Levels k = 0 and 1 are always computed; the loop then raises gamma by a
fixed delta per level until the last two optimal costs differ by at most
eps (the absolute-difference stopping rule, applied verbatim) or the
level budget runs out.  Each level warm-starts its inner solve from the
previous level's best control unless ``cold_start`` asks for the
from-midpoint behavior.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import diagnostics, initialization, schedule
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .diagnostics import InvariantSummary
from .dynamics import ControlProblem
from .integrator import PiecewiseControl, Trajectory
from .optimizer import InnerSolveResult, NelderMeadOptions, solve_level
from .schedule import PenaltyLevel

logger = logging.getLogger(__name__)


class StopReason(enum.Enum):
    COST_CONVERGED = "CostConverged"
    MAX_LEVELS = "MaxLevels"
    ERROR = "Error"


@dataclass(frozen=True)
class LevelOutcome:
    level: PenaltyLevel
    result: InnerSolveResult
    invariants: InvariantSummary
    # Gronwall-type L-inf distance bound for this level; reported only,
    # never asserted (it overflows to +inf for realistic constants)
    distance_bound: float


@dataclass(frozen=True)
class SolveReport:
    levels: tuple[LevelOutcome, ...]
    stop_reason: StopReason
    wall_time: float
    error_message: Optional[str] = None

    @property
    def final_cost(self) -> float:
        return self.levels[-1].result.best_cost

    @property
    def final_trajectory(self) -> Trajectory:
        return self.levels[-1].result.trajectory

    @property
    def final_control(self) -> PiecewiseControl:
        return self.levels[-1].result.best_control

    @property
    def final_gamma(self) -> float:
        return self.levels[-1].level.gamma

    @property
    def cost_trace(self) -> list[float]:
        return [lv.result.best_cost for lv in self.levels]


def distance_bound(problem: ControlProblem, level: PenaltyLevel) -> float:
    """Theoretical L-inf distance estimate between penalized and exact flows.

    e^{Mt~T} sigma^2 + 8 eta M (e^{Mt~T} - 1) sigma / (Mt~ M_psi) with
    Mt~ = 5 M M_psi / eta + 2 M.  Astronomically loose for realistic
    constants; +inf on overflow.
    """
    p = problem
    m_tilde = 5.0 * p.m_bound * p.sset.m_psi / p.sset.eta + 2.0 * p.m_bound
    try:
        e = math.exp(m_tilde * p.horizon)
    except OverflowError:
        return math.inf
    s = level.sigma
    return e * s * s + 8.0 * p.sset.eta * p.m_bound * (e - 1.0) * s / (m_tilde * p.sset.m_psi)


def run(
    problem: ControlProblem,
    n_intervals: int,
    eps: float,
    gamma0: float,
    delta: float,
    step: float = 1e-4,
    opts: NelderMeadOptions = NelderMeadOptions(),
    max_levels: int = 200,
    cold_start: bool = False,
    strict: bool = False,
    record_every: int = 1,
) -> SolveReport:
    """Continuation solve of the full problem; see module docstring."""
    if n_intervals < 1 or eps <= 0 or delta <= 0:
        raise ValueError("need n_intervals >= 1, eps > 0, delta > 0")
    t_start = time.perf_counter()
    ladder = schedule.ladder(
        problem.m_bound,
        problem.sset.eta,
        problem.sset.m_psi,
        problem.sset.r,
        gamma0,
        delta,
        max_levels=max_levels,
        strict=strict,
    )

    outcomes: list[LevelOutcome] = []
    costs: list[float] = []
    warm: Optional[PiecewiseControl] = None
    stop = StopReason.MAX_LEVELS
    error_message = None
    try:
        for level in ladder:
            result = solve_level(
                problem, level, n_intervals, step,
                warm=None if cold_start else warm, opts=opts,
            )
            summary = diagnostics.check_trajectory(
                problem, level, result.trajectory, problem.tolerances
            )
            outcomes.append(
                LevelOutcome(
                    level=level,
                    result=result,
                    invariants=summary,
                    distance_bound=distance_bound(problem, level),
                )
            )
            costs.append(result.best_cost)
            warm = result.best_control
            logger.info(
                "level %d: gamma=%g cost=%.6f evals=%d",
                level.index, level.gamma, result.best_cost, result.evaluations,
            )
            # levels 0 and 1 are the unconditional initialization pair
            if len(costs) >= 2 and abs(costs[-1] - costs[-2]) <= eps:
                stop = StopReason.COST_CONVERGED
                break
    except (schedule.GammaTooSmall, initialization.InitialPointOutsideSet,
            initialization.ZeroInwardDirection) as exc:
        if not outcomes:
            raise
        stop = StopReason.ERROR
        error_message = str(exc)

    return SolveReport(
        levels=tuple(outcomes),
        stop_reason=stop,
        wall_time=time.perf_counter() - t_start,
        error_message=error_message,
    )


def compare_exact(
    problem: ControlProblem,
    report: SolveReport,
    exact: Callable[[float], np.ndarray],
) -> tuple[float, float]:
    """(sup-sample distance, |g(x(T)) - g(exact(T))|)."""
    traj = report.final_trajectory
    exact_states = np.array([np.asarray(exact(t), dtype=float) for t in traj.times])
    sup_distance = float(np.max(np.linalg.norm(traj.states - exact_states, axis=1)))
    gap = abs(float(problem.g(traj.terminal_state)) - float(problem.g(exact_states[-1])))
    return sup_distance, gap
