"""Fixed-step classical RK4 under piecewise-constant controls.

Controls are frozen on the N uniform subintervals of [0, T]; no RK4 stage
ever straddles a control switch because the substep count is fitted to
each interval (substeps = round(h/step), actual substep = h/substeps).

The penalty term makes the boundary layer stiff as gamma grows.  RK4 is
kept (it is the method of record for this solver family), but a blown-up
interval is retried with a halved substep, up to three halvings, before
a NonFiniteState error is raised.

``clamp_count`` totals the exponent clamps seen by propagation stage
evaluations; diagnostic evaluations at recorded samples do not count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .dynamics import PenalizedField

MAX_STEP_HALVINGS = 3


class NonFiniteState(RuntimeError):
    def __init__(self, t: float, last_state: np.ndarray):
        super().__init__(
            f"state became non-finite near t = {t:.6g}; last finite state {last_state}"
        )
        self.t = t
        self.last_state = last_state


@dataclass(frozen=True)
class PiecewiseControl:
    """N control vectors, constant on the uniform subintervals of [0, T]."""

    values: np.ndarray  # (N, m)
    horizon: float

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", v)
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")

    @property
    def n_intervals(self) -> int:
        return self.values.shape[0]

    @property
    def interval_length(self) -> float:
        return self.horizon / self.n_intervals

    def clamped(self, lo: np.ndarray, hi: np.ndarray) -> "PiecewiseControl":
        return PiecewiseControl(np.clip(self.values, lo, hi), self.horizon)


@dataclass(frozen=True)
class Trajectory:
    """Time-sampled state path with per-sample diagnostics."""

    times: np.ndarray
    states: np.ndarray
    psi_smooth: np.ndarray
    xi_total: np.ndarray
    field_norm: np.ndarray
    clamp_count: int
    retries: int

    @property
    def terminal_state(self) -> np.ndarray:
        return self.states[-1]


def _substep_plan(h: float, step: float) -> tuple[int, float]:
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if step > h * (1 + 1e-12):
        raise ValueError(f"step = {step} exceeds the control interval h = {h}")
    nsub = max(1, round(h / step))
    return nsub, h / nsub


def _python_interval(pf, x, u, hsub, nsub):
    """Reference RK4 march over one control interval (in place on x)."""
    sset = pf.problem.sset
    gamma = pf.level.gamma
    ffun = pf.problem.f
    clamps = 0

    def rhs(y):
        nonlocal clamps
        w = geometry.penalty_weights(sset, gamma, y)
        clamps += w.clamped
        return np.asarray(ffun(y, u), dtype=float) - w.per_component @ sset.gradients(y)

    # non-finite states are detected explicitly below; keep numpy quiet
    # about the intermediate overflow that produces them
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(nsub):
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * hsub * k1)
            k3 = rhs(x + 0.5 * hsub * k2)
            k4 = rhs(x + hsub * k3)
            x += (hsub / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                return clamps, s
    return clamps, -1


def _march_interval(pf, x, u, hsub, nsub, fast_kernels):
    if fast_kernels is not None:
        return fast_kernels.run_interval(
            x, u, pf.level.gamma, geometry.EXP_CAP, hsub, nsub
        )
    return _python_interval(pf, x, u, hsub, nsub)


def _interval_with_retries(pf, x_start, u, hsub, nsub, t0, fast_kernels):
    """March one interval, halving the substep on non-finite blowup."""
    clamps_total = 0
    retries = 0
    for attempt in range(MAX_STEP_HALVINGS + 1):
        x = x_start.copy()
        clamps, fail_at = _march_interval(pf, x, u, hsub, nsub, fast_kernels)
        clamps_total += clamps
        if fail_at < 0:
            return x, clamps_total, retries
        retries += 1
        if attempt == MAX_STEP_HALVINGS:
            raise NonFiniteState(t0 + fail_at * hsub, x_start)
        hsub *= 0.5
        nsub *= 2
    raise AssertionError("unreachable")


def terminal_state(
    pf: PenalizedField, ctrl: PiecewiseControl, start: np.ndarray, step: float
) -> tuple[np.ndarray, int]:
    """Integrate without recording; returns (x(T), clamp_count).

    This is the inner-optimizer fast path: the objective needs only the
    terminal state.
    """
    from . import _fastpath

    nsub, hsub = _substep_plan(ctrl.interval_length, step)
    fast = _fastpath.kernels_for(pf.problem.fast)
    x = np.asarray(start, dtype=float).copy()
    clamps = 0
    h = ctrl.interval_length
    for j in range(ctrl.n_intervals):
        u = np.clip(ctrl.values[j], pf.problem.control_lo, pf.problem.control_hi)
        x, c, _ = _interval_with_retries(pf, x, u, hsub, nsub, j * h, fast)
        clamps += c
    return x, clamps


def integrate(
    pf: PenalizedField,
    ctrl: PiecewiseControl,
    start: np.ndarray,
    step: float,
    record_every: int = 1,
) -> Trajectory:
    """Classical RK4 with dense (thinnable) output and per-sample diagnostics.

    States are recorded at every ``record_every``-th substep; interval
    endpoints are always kept.
    """
    from . import _fastpath

    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    nsub, hsub = _substep_plan(ctrl.interval_length, step)
    fast = _fastpath.kernels_for(pf.problem.fast)
    h = ctrl.interval_length
    sset = pf.problem.sset
    gamma = pf.level.gamma

    x = np.asarray(start, dtype=float).copy()
    times = [0.0]
    states = [x.copy()]
    clamp_count = 0
    retries_total = 0

    def record_points(j, n_actual, h_actual):
        pts = [s for s in range(1, n_actual + 1) if s % record_every == 0]
        if not pts or pts[-1] != n_actual:
            pts.append(n_actual)
        return [(j * h + s * h_actual, s) for s in pts]

    for j in range(ctrl.n_intervals):
        u = np.clip(ctrl.values[j], pf.problem.control_lo, pf.problem.control_hi)
        # retry loop mirrors _interval_with_retries but records samples
        hs, ns = hsub, nsub
        for attempt in range(MAX_STEP_HALVINGS + 1):
            xj = x.copy()
            seg_times, seg_states = [], []
            clamps = 0
            fail_t = None
            marks = {s: t for t, s in record_points(j, ns, hs)}
            for s in range(1, ns + 1):
                c, fail_at = _march_interval(pf, xj, u, hs, 1, fast)
                clamps += c
                if fail_at >= 0:
                    fail_t = j * h + s * hs
                    break
                if s in marks:
                    seg_times.append(marks[s])
                    seg_states.append(xj.copy())
            if fail_t is None:
                break
            retries_total += 1
            if attempt == MAX_STEP_HALVINGS:
                raise NonFiniteState(fail_t, x)
            hs *= 0.5
            ns *= 2
        clamp_count += clamps
        x = xj
        times.extend(seg_times)
        states.extend(seg_states)

    times_arr = np.array(times)
    states_arr = np.array(states)

    # per-sample diagnostics (uses the control active on each sample's interval)
    psi_s = np.empty(times_arr.size)
    xi_tot = np.empty(times_arr.size)
    fnorm = np.empty(times_arr.size)
    for i, (t, y) in enumerate(zip(times_arr, states_arr)):
        j = min(int(t / h), ctrl.n_intervals - 1)
        u = np.clip(ctrl.values[j], pf.problem.control_lo, pf.problem.control_hi)
        psi_s[i] = geometry.psi_smooth(sset, gamma, y)
        w = geometry.penalty_weights(sset, gamma, y)
        xi_tot[i] = w.total
        fnorm[i] = float(
            np.linalg.norm(
                np.asarray(pf.problem.f(y, u), dtype=float)
                - w.per_component @ sset.gradients(y)
            )
        )
    return Trajectory(
        times=times_arr,
        states=states_arr,
        psi_smooth=psi_s,
        xi_total=xi_tot,
        field_norm=fnorm,
        clamp_count=clamp_count,
        retries=retries_total,
    )
