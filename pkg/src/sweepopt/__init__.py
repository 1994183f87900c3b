"""Solver for fixed-time Mayer problems over controlled sweeping processes.

The sweeping set is a finite intersection of smooth sublevel sets; the
normal cone is replaced by an exponential penalty of the log-sum-exp
smoothed constraint max, and the resulting standard control problems are
solved by direct shooting (piecewise-constant controls, RK4, Nelder-Mead)
inside a continuation loop that raises the penalty strength until the
optimal costs stabilize.
"""

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .geometry import (
    EXP_CAP,
    Membership,
    SmoothFunction,
    SweepingSet,
    active_indices,
    membership,
    penalty_weights,
    psi_max,
    psi_smooth,
    psi_smooth_grad,
)
from .schedule import GammaTooSmall, PenaltyLevel, gamma_threshold, ladder, make_level
from .initialization import (
    InwardDirection,
    inward_direction,
    project_tangent_cone,
    shifted_start,
)
from .dynamics import ControlOutOfBox, ControlProblem, FastKernels, PenalizedField
from .integrator import NonFiniteState, PiecewiseControl, Trajectory, integrate
from .optimizer import InnerSolveResult, NelderMeadOptions, nelder_mead, solve_level
from .continuation import SolveReport, StopReason, compare_exact, run
from .diagnostics import InvariantSummary, check_geometry, check_trajectory
from . import catalog

__version__ = "0.1.0"
