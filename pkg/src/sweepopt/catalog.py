"""Built-in problem catalog.

Problems are registered as native callbacks (no expression parsing):

* ``two-spheres``   -- the nonsmooth benchmark: C is the intersection of two
  solid spheres of radius 5 centered at (+-4, 0, 0), with a known exact
  optimal trajectory t -> (0, 3 sin t, 3 cos t) and minimum cost -9.
* ``unit-ball-1``   -- r = 1 regression of the method to the smooth case.
* ``box-3``         -- r = 6 halfspace intersection (the cube) for r > 2
  geometry coverage.  The affine psi_i make each C_i noncompact, so the
  compactness hypothesis fails: flagged non-conforming and used for
  geometry checks only.

Each solvable entry also ships numba kernels for the penalized right-hand
side; the kernels must match the Python callbacks exactly (tested).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dynamics import ControlProblem, FastKernels
from .geometry import SmoothFunction, SweepingSet

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap if not (args and callable(args[0])) else args[0]


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    problem: ControlProblem
    exact: Optional[Callable[[float], np.ndarray]] = None
    non_conforming: bool = False
    # suggested solve parameters (CLI defaults for this problem)
    defaults: Optional[dict] = None


# ---------------------------------------------------------------------------
# two-spheres
# ---------------------------------------------------------------------------

def _sphere(center_x1: float) -> SmoothFunction:
    c = center_x1

    def value(x):
        return (x[0] - c) ** 2 + x[1] ** 2 + x[2] ** 2 - 25.0

    def grad(x):
        return np.array([2.0 * (x[0] - c), 2.0 * x[1], 2.0 * x[2]])

    return SmoothFunction(value=value, grad=grad, dim=3)


def _two_spheres_f(x, u):
    return np.array(
        [
            x[0] - 2.0 + u[0] - u[1],
            4.0 * x[1] + x[2] + u[0] + u[1],
            -x[1] + 4.0 * x[2] + u[0] + u[1],
        ]
    )


def _two_spheres_g(x):
    return x[0] ** 2 - x[1] ** 2 + abs(x[2])


@njit(cache=True)
def _two_spheres_rhs(x, u, gamma, cap, out):
    x1, x2, x3 = x[0], x[1], x[2]
    p1 = (x1 - 4.0) ** 2 + x2 * x2 + x3 * x3 - 25.0
    p2 = (x1 + 4.0) ** 2 + x2 * x2 + x3 * x3 - 25.0
    clamps = 0
    e1 = gamma * p1
    if e1 > cap:
        e1 = cap
        clamps += 1
    e2 = gamma * p2
    if e2 > cap:
        e2 = cap
        clamps += 1
    xi1 = gamma * math.exp(e1)
    xi2 = gamma * math.exp(e2)
    out[0] = x1 - 2.0 + u[0] - u[1] - xi1 * 2.0 * (x1 - 4.0) - xi2 * 2.0 * (x1 + 4.0)
    out[1] = 4.0 * x2 + x3 + u[0] + u[1] - (xi1 + xi2) * 2.0 * x2
    out[2] = -x2 + 4.0 * x3 + u[0] + u[1] - (xi1 + xi2) * 2.0 * x3
    return clamps


@njit(cache=True)
def _two_spheres_psi(x, out):
    out[0] = (x[0] - 4.0) ** 2 + x[1] * x[1] + x[2] * x[2] - 25.0
    out[1] = (x[0] + 4.0) ** 2 + x[1] * x[1] + x[2] * x[2] - 25.0


def _two_spheres_exact(t: float) -> np.ndarray:
    return np.array([0.0, 3.0 * math.sin(t), 3.0 * math.cos(t)])


def _make_two_spheres() -> CatalogEntry:
    sset = SweepingSet(
        components=(_sphere(4.0), _sphere(-4.0)),
        eta=2.0,
        m_psi=1.0,
        m_bar_psi=10.0,
    )
    problem = ControlProblem(
        name="two-spheres",
        f=_two_spheres_f,
        g=_two_spheres_g,
        control_lo=np.array([-1.0, -1.0]),
        control_hi=np.array([1.0, 1.0]),
        horizon=math.pi / 2.0,
        x0=np.array([0.0, 0.0, 3.0]),
        sset=sset,
        m_bound=35.0,
        state_bounds=(np.array([-1.0, -3.0, -3.0]), np.array([1.0, 3.0, 3.0])),
        fast=FastKernels(rhs=_two_spheres_rhs, psi_vals=_two_spheres_psi, r=2),
    )
    return CatalogEntry(
        key="two-spheres",
        problem=problem,
        exact=_two_spheres_exact,
        defaults={"N": 20, "eps": 0.01, "gamma0": 20.0, "delta": 10.0, "step": 1e-4},
    )


# ---------------------------------------------------------------------------
# unit-ball-1 (r = 1 smooth regression)
# ---------------------------------------------------------------------------

def _unit_ball_psi() -> SmoothFunction:
    def value(x):
        return x[0] ** 2 + x[1] ** 2 + x[2] ** 2 - 1.0

    def grad(x):
        return 2.0 * np.asarray(x, dtype=float)

    return SmoothFunction(value=value, grad=grad, dim=3)


def _unit_ball_f(x, u):
    return np.asarray(u, dtype=float)


def _unit_ball_g(x):
    return float(x[0])


@njit(cache=True)
def _unit_ball_rhs(x, u, gamma, cap, out):
    p = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0
    clamps = 0
    e = gamma * p
    if e > cap:
        e = cap
        clamps += 1
    xi = gamma * math.exp(e)
    out[0] = u[0] - xi * 2.0 * x[0]
    out[1] = u[1] - xi * 2.0 * x[1]
    out[2] = u[2] - xi * 2.0 * x[2]
    return clamps


@njit(cache=True)
def _unit_ball_psi_vals(x, out):
    out[0] = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0


def _make_unit_ball() -> CatalogEntry:
    sset = SweepingSet(
        components=(_unit_ball_psi(),),
        eta=0.9,
        m_psi=1.0,
        m_bar_psi=2.0,
    )
    problem = ControlProblem(
        name="unit-ball-1",
        f=_unit_ball_f,
        g=_unit_ball_g,
        control_lo=np.array([-1.0, -1.0, -1.0]),
        control_hi=np.array([1.0, 1.0, 1.0]),
        horizon=1.0,
        x0=np.array([1.0, 0.0, 0.0]),
        sset=sset,
        m_bound=2.0,
        state_bounds=(np.array([-1.0, -1.0, -1.0]), np.array([1.0, 1.0, 1.0])),
        fast=FastKernels(rhs=_unit_ball_rhs, psi_vals=_unit_ball_psi_vals, r=1),
    )
    return CatalogEntry(
        key="unit-ball-1",
        problem=problem,
        defaults={"N": 5, "eps": 1e-3, "gamma0": 10.0, "delta": 5.0, "step": 1e-3},
    )


# ---------------------------------------------------------------------------
# box-3 (r = 6 affine faces; geometry coverage only)
# ---------------------------------------------------------------------------

def _face(axis: int, sign: float) -> SmoothFunction:
    def value(x):
        return sign * x[axis] - 1.0

    def grad(x):
        g = np.zeros(3)
        g[axis] = sign
        return g

    return SmoothFunction(value=value, grad=grad, dim=3)


def _box_f(x, u):
    return np.asarray(u, dtype=float)


def _box_g(x):
    return float(np.sum(x))


def _make_box3() -> CatalogEntry:
    faces = tuple(_face(a, s) for a in range(3) for s in (1.0, -1.0))
    # grads are constant, so any positive Lipschitz constant is valid
    sset = SweepingSet(components=faces, eta=0.25, m_psi=0.5, m_bar_psi=1.0)
    problem = ControlProblem(
        name="box-3",
        f=_box_f,
        g=_box_g,
        control_lo=np.array([-1.0, -1.0, -1.0]),
        control_hi=np.array([1.0, 1.0, 1.0]),
        horizon=1.0,
        x0=np.zeros(3),
        sset=sset,
        m_bound=2.0,
        state_bounds=(-np.ones(3), np.ones(3)),
    )
    return CatalogEntry(
        key="box-3",
        problem=problem,
        non_conforming=True,
        defaults={"N": 5, "eps": 1e-3, "gamma0": 20.0, "delta": 10.0, "step": 1e-3},
    )


_BUILDERS = {
    "two-spheres": _make_two_spheres,
    "unit-ball-1": _make_unit_ball,
    "box-3": _make_box3,
}
_INSTANCES: dict[str, CatalogEntry] = {}


def keys() -> list[str]:
    return sorted(_BUILDERS)


def get(key: str) -> CatalogEntry:
    if key not in _BUILDERS:
        raise KeyError(f"unknown problem {key!r}; catalog: {', '.join(keys())}")
    if key not in _INSTANCES:
        _INSTANCES[key] = _BUILDERS[key]()
    return _INSTANCES[key]
