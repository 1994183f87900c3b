"""Per-level shifted initial points.

A boundary start x0 is moved inward by sigma_k along the unit direction
d / ||d||, where d sums the Euclidean projections of the negated active
gradients onto the polyhedral tangent cone

    K = {w : <grad psi_i(x0), w> <= 0 for every active i}.

The cone projection is exact: all active subsets are enumerated and the
equality-constrained least-squares candidate with nonnegative multipliers
and feasible residual wins.  r stays small in practice, so the 2^r subsets
are cheap.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from . import geometry
from .geometry import SweepingSet
from .schedule import PenaltyLevel

logger = logging.getLogger(__name__)


class DegenerateGradients(ValueError):
    """Active gradients too rank-deficient for the cone projection."""


class ZeroInwardDirection(ValueError):
    """The inward direction vanished; the problem data violates the
    nonzero-direction assumption at this boundary point."""


class InitialPointOutsideSet(ValueError):
    """x0 is not in C within tolerance."""


@dataclass(frozen=True)
class InwardDirection:
    direction: np.ndarray            # unit vector
    raw: np.ndarray                  # sum of cone projections
    active_set: frozenset[int]
    projections: tuple[np.ndarray, ...]


def project_tangent_cone(
    active_gradients: np.ndarray,
    v: np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Euclidean projection of v onto K = {w : <g_i, w> <= 0 for all i}.

    Enumerates subsets S of constraints held as equalities; for each, the
    candidate is w = v - G_S^T lam with lam solving (G_S G_S^T) lam = G_S v.
    A candidate is kept when lam >= 0 and G w <= tol; the feasible candidate
    nearest v is the projection (polyhedral cones make this exhaustive
    search exact).
    """
    G = np.atleast_2d(np.asarray(active_gradients, dtype=float))
    v = np.asarray(v, dtype=float)
    if G.shape[0] == 0:
        raise ValueError("need at least one active gradient")
    norms = np.linalg.norm(G, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("active gradients must be nonzero")

    feas_tol = max(tol.kkt_tol, 1e-12) * max(1.0, float(np.linalg.norm(v)))
    best: np.ndarray | None = None
    best_dist = np.inf
    any_solvable = False
    for size in range(G.shape[0] + 1):
        for S in itertools.combinations(range(G.shape[0]), size):
            if size == 0:
                w = v.copy()
            else:
                GS = G[list(S)]
                gram = GS @ GS.T
                # skip rank-deficient subsets; a maximal independent subset
                # yields the same face
                if np.linalg.cond(gram) > 1e12:
                    continue
                lam = np.linalg.solve(gram, GS @ v)
                if np.any(lam < -feas_tol):
                    continue
                w = v - GS.T @ lam
            any_solvable = True
            if np.any(G @ w > feas_tol):
                continue
            dist = float(np.linalg.norm(w - v))
            if dist < best_dist - 1e-15:
                best, best_dist = w, dist
    if best is None:
        if not any_solvable:
            raise DegenerateGradients(
                "every equality-constrained subproblem was rank-deficient"
            )
        raise DegenerateGradients("no feasible projection candidate found")
    return best


def inward_direction(
    sset: SweepingSet,
    c: np.ndarray,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> InwardDirection:
    """Inward shift direction at a boundary point c of C."""
    active = sorted(geometry.active_indices(sset, c, tol.active_tol))
    if not active:
        raise ValueError(f"no active constraint at {c}; point is interior")
    grads = sset.gradients(c)[active]
    projections = tuple(
        project_tangent_cone(grads, -grads[j], tol) for j in range(len(active))
    )
    raw = np.sum(projections, axis=0)
    norm = float(np.linalg.norm(raw))
    if norm <= tol.direction_tol:
        raise ZeroInwardDirection(
            f"inward direction vanished at {c}; problem data violates the "
            "nonzero-direction assumption"
        )
    return InwardDirection(
        direction=raw / norm,
        raw=raw,
        active_set=frozenset(active),
        projections=projections,
    )


def shifted_start(
    sset: SweepingSet,
    x0: np.ndarray,
    level: PenaltyLevel,
    tol: ToleranceConfig = DEFAULT_TOLERANCES,
) -> np.ndarray:
    """Initial point for one penalty level.

    Interior starts are returned unchanged; boundary starts are shifted
    inward by sigma.  The result should land in the shrunk set
    {psi_smooth <= -alpha}; when gamma is too small for that, a warning is
    logged and the run continues (the penalty flow is self-correcting).
    """
    x0 = np.asarray(x0, dtype=float)
    worst = geometry.psi_max(sset, x0)
    if worst > tol.active_tol:
        raise InitialPointOutsideSet(
            f"x0 is outside C: max psi_i = {worst} > {tol.active_tol}"
        )
    if worst < -tol.interior_band:
        return x0.copy()
    if abs(worst) <= tol.interior_band:
        logger.debug("x0 sits on the interior/boundary classification band edge")
    d = inward_direction(sset, x0, tol)
    shifted = x0 + level.sigma * d.direction
    if geometry.psi_smooth(sset, level.gamma, shifted) > -level.alpha:
        logger.warning(
            "shift not absorbed: shifted start has psi_smooth > -alpha at "
            "gamma = %g (gamma too small); continuing",
            level.gamma,
        )
    return shifted
