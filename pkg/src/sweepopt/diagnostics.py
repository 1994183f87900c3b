"""Theory-backed runtime checks, aggregated into machine-readable verdicts.

Containment, penalty-weight and velocity bounds hold exactly only for the
continuous-time flow, so each check carries explicit slack from the shared
ToleranceConfig and reports a violation *count* rather than throwing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .dynamics import ControlProblem, PenalizedField
from .geometry import SweepingSet
from .integrator import Trajectory
from .schedule import PenaltyLevel


@dataclass(frozen=True)
class CheckRecord:
    name: str
    samples: int
    violations: int
    worst_margin: float  # most positive = worst violation; <= 0 means clean

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class InvariantSummary:
    checks: tuple[CheckRecord, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def record(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            c.name: {
                "samples": c.samples,
                "violations": c.violations,
                "worst_margin": c.worst_margin,
                "passed": c.passed,
            }
            for c in self.checks
        }


def _record(name: str, margins: np.ndarray) -> CheckRecord:
    margins = np.asarray(margins, dtype=float)
    return CheckRecord(
        name=name,
        samples=int(margins.size),
        violations=int(np.count_nonzero(margins > 0)),
        worst_margin=float(np.max(margins)) if margins.size else 0.0,
    )


def check_trajectory(
    problem: ControlProblem,
    level: PenaltyLevel,
    traj: Trajectory,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> InvariantSummary:
    """Containment, xi-bound and velocity-bound checks along a trajectory.

    * containment: psi_smooth <= -alpha + slack at every sample
    * xi bound:    xi_total <= (2M/eta) * (1 + slack)
    * velocity:    field norm <= (M + 2 M Mbar/eta) * (1 + slack)
    """
    if traj.times.size == 0:
        raise ValueError("trajectory is empty")
    sset = problem.sset
    xi_cap = 2.0 * problem.m_bound / sset.eta
    v_cap = problem.m_bound + 2.0 * problem.m_bound * sset.m_bar_psi / sset.eta
    checks = (
        _record("containment", traj.psi_smooth - (-level.alpha + tol.containment_slack)),
        _record("xi_bound", traj.xi_total - xi_cap * (1.0 + tol.xi_slack)),
        _record("velocity_bound", traj.field_norm - v_cap * (1.0 + tol.velocity_slack)),
    )
    return InvariantSummary(checks=checks)


def check_geometry(
    sset: SweepingSet,
    gamma_list: list[float],
    bounds: tuple[np.ndarray, np.ndarray],
    sample_count: int = 1000,
    seed: int = 0,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> InvariantSummary:
    """Sample-based geometry properties on a bounding box of C.

    Checks, at ``sample_count`` deterministic points per gamma:

    * sandwich: psi_i <= max psi <= psi_smooth <= max psi + ln(r)/gamma
    * monotonicity of psi_smooth in gamma
    * softmax weights nonnegative and summing to 1
    * psi_smooth_grad vs central finite differences of psi_smooth
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    pts = rng.uniform(lo, hi, size=(sample_count, sset.dim))
    gammas = sorted(gamma_list)

    sandwich, mono, softmax_m, grad_m = [], [], [], []
    fd_checked = 0
    for x in pts:
        vals = sset.values(x)
        vmax = float(np.max(vals))
        prev = None
        for gamma in gammas:
            ps = geometry.psi_smooth(sset, gamma, x)
            sandwich.append(vmax - ps - 1e-12)                       # max <= smooth
            sandwich.append(ps - (vmax + np.log(sset.r) / gamma) - 1e-12)
            if prev is not None:
                mono.append(ps - prev - 1e-12)                       # nonincreasing
            prev = ps
            w = geometry._softmax_weights(vals, gamma)
            softmax_m.append(abs(float(np.sum(w)) - 1.0) - 1e-12)
            softmax_m.append(float(-np.min(w)))
        # finite-difference gradient agreement near the boundary band only
        gamma = gammas[len(gammas) // 2]
        if -1.0 <= vmax <= 1.0 and gamma <= 1e3:
            fd_checked += 1
            grad_m.append(_fd_gradient_margin(sset, gamma, x, tol.fd_rel_tol))
    checks = [
        _record("sandwich", np.array(sandwich)),
        _record("gamma_monotonicity", np.array(mono)),
        _record("softmax_normalization", np.array(softmax_m)),
        _record("gradient_fd", np.array(grad_m) if grad_m else np.zeros(0)),
    ]
    return InvariantSummary(checks=tuple(checks))


def _fd_gradient_margin(sset, gamma, x, rel_tol, h=1e-6):
    grad = geometry.psi_smooth_grad(sset, gamma, x)
    fd = np.empty_like(grad)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd[i] = (geometry.psi_smooth(sset, gamma, x + e)
                 - geometry.psi_smooth(sset, gamma, x - e)) / (2 * h)
    scale = max(1.0, float(np.linalg.norm(grad)))
    return float(np.linalg.norm(fd - grad) / scale) - rel_tol


def check_gradient_consistency(
    fn: geometry.SmoothFunction,
    points: np.ndarray,
    rel_tol: float = DEFAULT_TOLERANCES.fd_rel_tol,
    h: float = 1e-6,
) -> CheckRecord:
    """Central-difference check of one registered function's gradient."""
    margins = []
    for x in np.atleast_2d(points):
        g = np.asarray(fn.grad(x), dtype=float)
        fd = np.empty_like(g)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            fd[i] = (fn.value(x + e) - fn.value(x - e)) / (2 * h)
        scale = max(1.0, float(np.linalg.norm(g)))
        margins.append(float(np.linalg.norm(fd - g) / scale) - rel_tol)
    return _record("component_gradient_fd", np.array(margins))
