"""Shared tolerance configuration.

Every numerical threshold used by the library lives here so that a run can
be tightened or relaxed in one place instead of hunting for literals.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceConfig:
    # activity / interior classification (absolute, on psi values)
    active_tol: float = 1e-7
    interior_band: float = 1e-7
    # tangent-cone projection KKT residual
    kkt_tol: float = 1e-9
    # inward direction must be nonzero beyond this
    direction_tol: float = 1e-12
    # finite-difference gradient agreement (relative)
    fd_rel_tol: float = 1e-5
    # trajectory containment slack (absorbs RK4 discretization)
    containment_slack: float = 1e-3
    # relative slack on the xi and velocity bounds
    xi_slack: float = 0.05
    velocity_slack: float = 0.05
    # spot-check slack on the dynamics bound ||f|| <= M
    dynamics_bound_slack: float = 0.05


DEFAULT_TOLERANCES = ToleranceConfig()
