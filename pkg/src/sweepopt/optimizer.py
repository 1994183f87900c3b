"""Inner solver: Nelder-Mead over stacked piecewise-constant controls.

The search space is R^{N*m} (one stack of N control vectors).  Box
constraints are handled by clamping every candidate vertex coordinatewise
before evaluation; degenerate zero-width box coordinates are frozen out
of the search.  The whole solve is deterministic: no randomness anywhere,
stable ordering throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import initialization, integrator
from .dynamics import ControlProblem, PenalizedField
from .integrator import NonFiniteState, PiecewiseControl, Trajectory
from .schedule import PenaltyLevel

# initial simplex offset, as a fraction of each box width
SIMPLEX_OFFSET_FRACTION = 0.05


@dataclass(frozen=True)
class NelderMeadOptions:
    f_tol: float = 1e-8
    x_tol: float = 1e-6
    max_evals: Optional[int] = None  # defaults to 200 * dimension

    def resolved_max_evals(self, dim: int) -> int:
        # 200 evaluations per free coordinate, the budget the classical
        # simplex implementations default to.  The inner problems are
        # re-solved at every continuation level with warm starts, so a
        # tight per-level budget also keeps the search from wandering
        # along the nearly-cost-free directions that open up while the
        # penalty is soft.
        return self.max_evals if self.max_evals is not None else 200 * dim


@dataclass
class SimplexState:
    """Bookkeeping for one Nelder-Mead run (vertices sorted by value)."""

    vertices: np.ndarray  # (dim+1, dim)
    values: np.ndarray
    iterations: int = 0
    evaluations: int = 0

    def sort(self):
        order = np.argsort(self.values, kind="stable")
        self.vertices = self.vertices[order]
        self.values = self.values[order]

    @property
    def spread(self) -> float:
        return float(self.values[-1] - self.values[0])

    @property
    def diameter(self) -> float:
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt(np.max(np.sum(diffs * diffs, axis=-1))))


@dataclass(frozen=True)
class InnerSolveResult:
    best_control: PiecewiseControl
    best_cost: float
    trajectory: Trajectory
    evaluations: int
    converged: bool


def objective(
    pf: PenalizedField,
    ctrl: PiecewiseControl,
    start: np.ndarray,
    step: float,
) -> float:
    """Terminal cost g(x(T)) of the penalized flow under ctrl.

    A blown-up integration is reported as +inf, which Nelder-Mead rejects
    naturally.
    """
    try:
        x_final, _ = integrator.terminal_state(pf, ctrl, start, step)
    except NonFiniteState:
        return math.inf
    value = float(pf.problem.g(x_final))
    return value if math.isfinite(value) else math.inf


def nelder_mead(
    fn: Callable[[np.ndarray], float],
    start: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    opts: NelderMeadOptions = NelderMeadOptions(),
) -> tuple[np.ndarray, float, int, bool]:
    """Clamped Nelder-Mead (reflect 1, expand 2, contract 0.5, shrink 0.5).

    Terminates when the value spread <= f_tol AND the simplex diameter
    <= x_tol, or at max_evals.  Returns (best point, best value,
    evaluations, converged flag).
    """
    start = np.clip(np.asarray(start, dtype=float), lo, hi)
    free = np.flatnonzero(hi > lo)
    if free.size == 0:
        return start, fn(start), 1, True
    dim = free.size
    max_evals = opts.resolved_max_evals(dim)

    def clamp(z):
        return np.clip(z, lo[free], hi[free])

    def full(zfree):
        out = start.copy()
        out[free] = zfree
        return out

    evals = 0

    def evaluate(zfree):
        nonlocal evals
        evals += 1
        return fn(full(zfree))

    z0 = start[free]
    verts = np.tile(z0, (dim + 1, 1))
    for i in range(dim):
        off = SIMPLEX_OFFSET_FRACTION * (hi[free[i]] - lo[free[i]])
        verts[i + 1, i] = min(z0[i] + off, hi[free[i]])
        if verts[i + 1, i] == z0[i]:  # sitting on the upper bound: go down
            verts[i + 1, i] = z0[i] - off
    vals = np.array([evaluate(v) for v in verts])
    st = SimplexState(vertices=verts, values=vals, evaluations=dim + 1)
    st.sort()

    converged = False
    while evals < max_evals:
        if st.spread <= opts.f_tol and st.diameter <= opts.x_tol:
            converged = True
            break
        st.iterations += 1
        best, worst = st.values[0], st.values[-1]
        second_worst = st.values[-2]
        centroid = np.mean(st.vertices[:-1], axis=0)

        refl = clamp(centroid + (centroid - st.vertices[-1]))
        f_refl = evaluate(refl)
        if f_refl < best:
            exp = clamp(centroid + 2.0 * (centroid - st.vertices[-1]))
            f_exp = evaluate(exp)
            if f_exp < f_refl:
                st.vertices[-1], st.values[-1] = exp, f_exp
            else:
                st.vertices[-1], st.values[-1] = refl, f_refl
        elif f_refl < second_worst:
            st.vertices[-1], st.values[-1] = refl, f_refl
        else:
            if f_refl < worst:  # outside contraction
                cand = clamp(centroid + 0.5 * (refl - centroid))
                f_cand = evaluate(cand)
                accept = f_cand <= f_refl
            else:  # inside contraction
                cand = clamp(centroid - 0.5 * (centroid - st.vertices[-1]))
                f_cand = evaluate(cand)
                accept = f_cand < worst
            if accept:
                st.vertices[-1], st.values[-1] = cand, f_cand
            else:  # shrink toward the best vertex
                for i in range(1, dim + 1):
                    st.vertices[i] = clamp(
                        st.vertices[0] + 0.5 * (st.vertices[i] - st.vertices[0])
                    )
                    st.values[i] = evaluate(st.vertices[i])
        st.sort()
        st.evaluations = evals

    return full(st.vertices[0]), float(st.values[0]), evals, converged


def solve_level(
    problem: ControlProblem,
    level: PenaltyLevel,
    n_intervals: int,
    step: float,
    warm: Optional[PiecewiseControl] = None,
    opts: NelderMeadOptions = NelderMeadOptions(),
) -> InnerSolveResult:
    """Solve the discretized level problem over U^N.

    The initial simplex sits around the warm start (the previous level's
    best control) or the box midpoint.
    """
    if n_intervals < 1:
        raise ValueError("need at least one control interval")
    m = problem.n_controls
    lo = np.tile(problem.control_lo, n_intervals)
    hi = np.tile(problem.control_hi, n_intervals)
    if warm is not None:
        if warm.values.shape != (n_intervals, m):
            raise ValueError(
                f"warm start shape {warm.values.shape} != {(n_intervals, m)}"
            )
        start_stack = warm.values.ravel()
    else:
        start_stack = np.tile(0.5 * (problem.control_lo + problem.control_hi),
                              n_intervals)

    pf = PenalizedField(problem, level)
    x_start = initialization.shifted_start(
        problem.sset, problem.x0, level, problem.tolerances
    )

    def fn(stack):
        ctrl = PiecewiseControl(stack.reshape(n_intervals, m), problem.horizon)
        return objective(pf, ctrl, x_start, step)

    best_stack, best_cost, evals, converged = nelder_mead(fn, start_stack, lo, hi, opts)
    best_ctrl = PiecewiseControl(best_stack.reshape(n_intervals, m), problem.horizon)
    traj = integrator.integrate(pf, best_ctrl, x_start, step)
    return InnerSolveResult(
        best_control=best_ctrl,
        best_cost=best_cost,
        trajectory=traj,
        evaluations=evals,
        converged=converged,
    )
