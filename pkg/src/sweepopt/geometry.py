"""Sweeping set geometry and smoothed-max quantities.

The constraint set is C = {x : psi_i(x) <= 0, i = 1..r}.  The nonsmooth
max of the psi_i is replaced by the log-sum-exp smoothing

    psi_smooth(gamma, x) = (1/gamma) * ln(sum_i exp(gamma * psi_i(x))),

which over-approximates the max by at most ln(r)/gamma.  All log-sum-exp
evaluations are max-shifted so that no intermediate exponential can
overflow, whatever gamma is.  The penalty weights xi_i = gamma *
exp(gamma * psi_i) are the one place where a raw exponential survives;
their exponent is clamped at EXP_CAP before exponentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig

# Exponent clamp for the penalty weights.  e^30 ~ 1.07e13 stays finite and
# strongly inward-pointing; the continuous-time theory keeps trajectories
# at psi <= -alpha, but a discrete RK4 stage can momentarily step outside,
# and an unclamped exponent would blow the vector field up.
EXP_CAP = 30.0


class DimensionMismatch(ValueError):
    """A point has the wrong dimension for this sweeping set."""


@dataclass(frozen=True)
class SmoothFunction:
    """A C^{1,1} constraint function with its gradient.

    ``value`` maps R^n -> R and ``grad`` maps R^n -> R^n.  Consistency of
    the two is spot-checked by :func:`sweepopt.diagnostics.check_geometry`
    rather than enforced at construction.
    """

    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")

    def __call__(self, x: np.ndarray) -> float:
        return float(self.value(x))


@dataclass(frozen=True)
class SweepingSet:
    """C = intersection of the zero-sublevel sets of ``components``.

    ``eta``, ``m_psi`` and ``m_bar_psi`` are the user-certified constants:
    eta is the uniform lower bound (times 1/2) on convex combinations of
    active gradients, 2*m_psi a common Lipschitz constant of the gradients
    on conv C, and m_bar_psi a common gradient-norm bound on C.  The
    library cannot derive them; it only spot-validates.
    """

    components: tuple[SmoothFunction, ...]
    eta: float
    m_psi: float
    m_bar_psi: float

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("need at least one component function")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError(f"components disagree on dimension: {dims}")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.m_psi <= 0:
            raise ValueError("m_psi must be positive")
        if self.m_bar_psi < 2 * self.eta:
            raise ValueError(
                f"m_bar_psi = {self.m_bar_psi} violates m_bar_psi >= 2*eta = {2 * self.eta}"
            )

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def _check_dim(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionMismatch(
                f"expected point of dimension {self.dim}, got shape {x.shape}"
            )
        return x

    def values(self, x: np.ndarray) -> np.ndarray:
        """All psi_i(x) as a vector."""
        x = self._check_dim(x)
        return np.array([c.value(x) for c in self.components], dtype=float)

    def gradients(self, x: np.ndarray) -> np.ndarray:
        """All grad psi_i(x), stacked as rows of an (r, n) array."""
        x = self._check_dim(x)
        return np.array([np.asarray(c.grad(x), dtype=float) for c in self.components])


class Membership(Enum):
    """Deepest of the nested approximating sets a point belongs to."""

    IN_SHRUNK = "InCk"        # psi_smooth <= -alpha
    IN_SMOOTHED = "InCgamma"  # psi_smooth <= 0
    IN_SET = "InC"            # max psi_i <= 0
    OUTSIDE = "Outside"


class PenaltyWeights(NamedTuple):
    total: float
    per_component: np.ndarray
    clamped: int


def psi_max(sset: SweepingSet, x: np.ndarray) -> float:
    """max_i psi_i(x); x is in C iff the result is <= 0."""
    return float(np.max(sset.values(x)))


def psi_smooth(sset: SweepingSet, gamma: float, x: np.ndarray) -> float:
    """Log-sum-exp smoothing of the constraint max, computed max-shifted."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    vals = sset.values(x)
    m = float(np.max(vals))
    return m + math.log(np.sum(np.exp(gamma * (vals - m)))) / gamma


def _softmax_weights(vals: np.ndarray, gamma: float) -> np.ndarray:
    w = np.exp(gamma * (vals - np.max(vals)))
    return w / np.sum(w)


def psi_smooth_grad(sset: SweepingSet, gamma: float, x: np.ndarray) -> np.ndarray:
    """Gradient of psi_smooth: softmax-weighted combination of the grad psi_i."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    vals = sset.values(x)
    w = _softmax_weights(vals, gamma)
    return w @ sset.gradients(x)


def penalty_weights(sset: SweepingSet, gamma: float, x: np.ndarray) -> PenaltyWeights:
    """Penalty magnitudes xi_i = gamma * e^{gamma psi_i(x)}, exponent-clamped.

    Returns the componentwise weights, their sum, and how many exponents
    hit EXP_CAP (a clamp means the state has strayed far outside C_i).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    vals = sset.values(x)
    exponents = gamma * vals
    clamped = int(np.count_nonzero(exponents > EXP_CAP))
    per = gamma * np.exp(np.minimum(exponents, EXP_CAP))
    return PenaltyWeights(float(np.sum(per)), per, clamped)


def membership(sset: SweepingSet, gamma: float, alpha: float, x: np.ndarray) -> Membership:
    """Classify x by the deepest nested set containing it.

    The thresholds are psi_smooth <= -alpha (shrunk set), psi_smooth <= 0
    (smoothed set), max psi_i <= 0 (C itself).  For alpha < 0 (sub-threshold
    gamma, tolerated in non-strict runs) the shrunk set is *larger* than the
    smoothed one and the nesting degenerates; classification still follows
    the same thresholds.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    ps = psi_smooth(sset, gamma, x)
    if ps <= -alpha:
        return Membership.IN_SHRUNK
    if ps <= 0.0:
        return Membership.IN_SMOOTHED
    if psi_max(sset, x) <= 0.0:
        return Membership.IN_SET
    return Membership.OUTSIDE


class PointOutsideSet(ValueError):
    """The query point is not in C within tolerance."""


def active_indices(
    sset: SweepingSet, x: np.ndarray, tol: float = DEFAULT_TOLERANCES.active_tol
) -> set[int]:
    """Indices i with |psi_i(x)| <= tol, for x in C (0-based)."""
    vals = sset.values(x)
    worst = float(np.max(vals))
    if worst > tol:
        raise PointOutsideSet(
            f"point is outside C: max psi_i = {worst} > tol = {tol}"
        )
    return {int(i) for i in np.flatnonzero(np.abs(vals) <= tol)}


def spot_check_eta(
    sset: SweepingSet,
    points: Sequence[np.ndarray],
    rng: np.random.Generator,
    tol: float = DEFAULT_TOLERANCES.active_tol,
    combos_per_point: int = 8,
) -> list[str]:
    """Sample-check the uniform active-gradient bound ||sum lam_i grad psi_i|| > 2 eta.

    Returns human-readable violation descriptions (empty when all sampled
    convex combinations clear the bound).  This is a spot check, not a
    certificate; callers report violations instead of failing.
    """
    violations: list[str] = []
    for x in points:
        vals = sset.values(x)
        act = np.flatnonzero(np.abs(vals) <= tol)
        if act.size == 0:
            continue
        grads = sset.gradients(x)[act]
        for _ in range(combos_per_point):
            lam = rng.dirichlet(np.ones(act.size))
            norm = float(np.linalg.norm(lam @ grads))
            if norm <= 2 * sset.eta:
                violations.append(
                    f"||sum lam grad psi|| = {norm:.6g} <= 2*eta = {2 * sset.eta} at x = {x}"
                )
                break
    return violations
