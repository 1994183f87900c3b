"""Continuation ladder of penalty levels.

Each level carries gamma together with the derived offsets

    alpha = ln(eta * gamma / (2M)) / gamma
    sigma = (r * m_psi / (2 eta^2)) * (ln(r)/gamma + alpha)

alpha is positive only for gamma > 2M/eta, and both sequences decrease to
zero along an increasing gamma ladder once gamma >= e * 2M/eta.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterator

logger = logging.getLogger(__name__)


class GammaTooSmall(ValueError):
    """gamma <= 2M/eta, so alpha would be nonpositive."""


@dataclass(frozen=True)
class PenaltyLevel:
    gamma: float
    alpha: float
    sigma: float
    index: int
    # set when alpha <= 0 was tolerated (non-strict ladder below threshold)
    below_threshold: bool = False


def gamma_threshold(m_bound: float, eta: float) -> float:
    """Smallest gamma (exclusive) for which alpha is positive: 2M/eta."""
    return 2.0 * m_bound / eta


def make_level(
    m_bound: float,
    eta: float,
    m_psi: float,
    r: int,
    gamma: float,
    index: int = 0,
    strict: bool = True,
) -> PenaltyLevel:
    """Build one penalty level from the problem constants.

    With ``strict`` (the default for direct calls), gamma <= 2M/eta raises
    :class:`GammaTooSmall`.  Non-strict callers (the ladder reproducing the
    reference experiment, which starts below threshold) get the level with
    a nonpositive alpha and a warning instead.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    threshold = gamma_threshold(m_bound, eta)
    below = gamma <= threshold
    if below and strict:
        raise GammaTooSmall(
            f"gamma = {gamma} <= 2M/eta = {threshold}; alpha would be <= 0"
        )
    if below:
        logger.warning(
            "gamma = %g <= 2M/eta = %g: alpha <= 0, the shrunk set is not "
            "nested inside the smoothed set at this level",
            gamma,
            threshold,
        )
    alpha = math.log(eta * gamma / (2.0 * m_bound)) / gamma
    sigma = (r * m_psi / (2.0 * eta * eta)) * (math.log(r) / gamma + alpha)
    return PenaltyLevel(gamma=gamma, alpha=alpha, sigma=sigma, index=index,
                        below_threshold=below)


def ladder(
    m_bound: float,
    eta: float,
    m_psi: float,
    r: int,
    start_gamma: float,
    delta: float,
    max_levels: int = 200,
    strict: bool = False,
) -> Iterator[PenaltyLevel]:
    """Yield levels gamma, gamma+delta, gamma+2*delta, ...

    By default sub-threshold entries (alpha <= 0) are tolerated with a
    warning so the reference experiment's gamma grid (starting at 20 with
    2M/eta = 35) is reproduced verbatim; ``strict=True`` raises on the
    first such level instead.
    """
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if max_levels < 1:
        raise ValueError(f"max_levels must be >= 1, got {max_levels}")
    for k in range(max_levels):
        yield make_level(
            m_bound, eta, m_psi, r, start_gamma + k * delta, index=k, strict=strict
        )
