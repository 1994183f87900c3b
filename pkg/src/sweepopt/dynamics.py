"""Control problem definition and the penalized vector field.

The sweeping inclusion's normal cone is replaced by the exponential
penalty, in two algebraically equivalent forms:

    multi-term:  xdot = f(x,u) - sum_i xi_i(x) grad psi_i(x)
    smoothed:    xdot = f(x,u) - xi_total(x) grad psi_smooth(x)

with xi_i = gamma * e^{gamma psi_i(x)} (exponent-clamped, see geometry).
The multi-term form is the production path; the smoothed form exists for
the standing equivalence test and diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from . import geometry
from .geometry import SweepingSet
from .schedule import PenaltyLevel


class ControlOutOfBox(ValueError):
    """A control vector violates the control box."""


@dataclass(frozen=True)
class FastKernels:
    """Optional numba-jitted kernels for a problem (see catalog).

    ``rhs(x, u, gamma, cap, out) -> int`` writes the penalized field into
    ``out`` and returns the number of clamped exponents; ``psi_vals(x, out)``
    writes the r constraint values.  Both must agree exactly with the
    generic path built from the problem's Python callbacks.
    """

    rhs: Callable
    psi_vals: Callable
    r: int


@dataclass(frozen=True)
class ControlProblem:
    """Fixed-time Mayer problem over a controlled sweeping process.

    ``f(x, u)`` is the perturbation, ``g(x)`` the terminal cost, the
    control set an axis-aligned box, and ``m_bound`` the constant M that
    bounds f and serves as its Lipschitz constant (user-certified).
    ``state_bounds`` is a bounding box of C used for diagnostic sampling.
    """

    name: str
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray], float]
    control_lo: np.ndarray
    control_hi: np.ndarray
    horizon: float
    x0: np.ndarray
    sset: SweepingSet
    m_bound: float
    state_bounds: tuple[np.ndarray, np.ndarray]
    fast: Optional[FastKernels] = None
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES

    def __post_init__(self):
        lo = np.asarray(self.control_lo, dtype=float)
        hi = np.asarray(self.control_hi, dtype=float)
        object.__setattr__(self, "control_lo", lo)
        object.__setattr__(self, "control_hi", hi)
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("control_lo and control_hi must be matching vectors")
        if np.any(lo > hi):
            raise ValueError("control box has lo > hi")
        if self.horizon <= 0:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if self.m_bound <= 0:
            raise ValueError(f"m_bound must be positive, got {self.m_bound}")
        worst = geometry.psi_max(self.sset, self.x0)
        if worst > self.tolerances.active_tol:
            raise ValueError(
                f"x0 is outside C: max psi_i = {worst} > {self.tolerances.active_tol}"
            )

    @property
    def n_controls(self) -> int:
        return self.control_lo.size

    @property
    def dim(self) -> int:
        return self.sset.dim

    def check_control(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != self.control_lo.shape:
            raise ControlOutOfBox(f"control has shape {u.shape}, box has {self.control_lo.shape}")
        if np.any(u < self.control_lo) or np.any(u > self.control_hi):
            raise ControlOutOfBox(f"control {u} outside box [{self.control_lo}, {self.control_hi}]")
        return u

    def spot_check_bound(self, rng: np.random.Generator, samples: int = 200) -> list[str]:
        """Sample-check ||f(x,u)|| <= M on C x U; returns violation notes."""
        lo, hi = self.state_bounds
        slack = 1.0 + self.tolerances.dynamics_bound_slack
        violations = []
        for _ in range(samples):
            x = rng.uniform(lo, hi)
            if geometry.psi_max(self.sset, x) > 0:
                continue
            u = rng.uniform(self.control_lo, self.control_hi)
            norm = float(np.linalg.norm(self.f(x, u)))
            if norm > self.m_bound * slack:
                violations.append(f"||f|| = {norm:.4g} > M = {self.m_bound} at x={x}, u={u}")
        return violations


@dataclass(frozen=True)
class PenalizedField:
    """The penalized dynamics of one continuation level."""

    problem: ControlProblem
    level: PenaltyLevel

    def field_multi(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """f(x,u) minus the per-component penalty terms."""
        u = self.problem.check_control(u)
        w = geometry.penalty_weights(self.problem.sset, self.level.gamma, x)
        grads = self.problem.sset.gradients(x)
        return np.asarray(self.problem.f(x, u), dtype=float) - w.per_component @ grads

    def field_smooth(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """f(x,u) minus xi_total times the smoothed-max gradient."""
        u = self.problem.check_control(u)
        w = geometry.penalty_weights(self.problem.sset, self.level.gamma, x)
        grad = geometry.psi_smooth_grad(self.problem.sset, self.level.gamma, x)
        return np.asarray(self.problem.f(x, u), dtype=float) - w.total * grad

    def velocity_bound(self) -> float:
        """Theoretical speed limit M + 2 M Mbar_psi / eta along exact flows."""
        p = self.problem
        return p.m_bound + 2.0 * p.m_bound * p.sset.m_bar_psi / p.sset.eta
