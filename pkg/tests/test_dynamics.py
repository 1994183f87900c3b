import numpy as np
import pytest

from sweepopt import catalog, schedule
from sweepopt.dynamics import ControlOutOfBox, ControlProblem, PenalizedField


@pytest.fixture(scope="module")
def spheres_problem():
    return catalog.get("two-spheres").problem


@pytest.fixture(scope="module")
def ball_problem():
    return catalog.get("unit-ball-1").problem


def _level(problem, gamma, strict=True):
    s = problem.sset
    return schedule.make_level(problem.m_bound, s.eta, s.m_psi, s.r, gamma,
                               strict=strict)


def test_problem_validation_rejects_outside_start(spheres_problem):
    p = spheres_problem
    with pytest.raises(ValueError):
        ControlProblem(
            name="bad-start",
            f=p.f, g=p.g,
            control_lo=p.control_lo, control_hi=p.control_hi,
            horizon=p.horizon,
            x0=np.array([0.0, 0.0, 5.5]),
            sset=p.sset, m_bound=p.m_bound, state_bounds=p.state_bounds,
        )


def test_control_box_checked(spheres_problem):
    p = spheres_problem
    p.check_control(np.array([1.0, -1.0]))
    with pytest.raises(ControlOutOfBox):
        p.check_control(np.array([1.5, 0.0]))
    with pytest.raises(ControlOutOfBox):
        p.check_control(np.array([0.0, 0.0, 0.0]))


def test_field_forms_agree(spheres_problem):
    # multi-term and smoothed-gradient forms are the same field
    rng = np.random.default_rng(1)
    pf = PenalizedField(spheres_problem, _level(spheres_problem, 60.0))
    lo, hi = spheres_problem.state_bounds
    from sweepopt import geometry

    count = 0
    while count < 200:
        x = rng.uniform(lo, hi)
        if geometry.psi_max(spheres_problem.sset, x) > 0:
            continue  # clamped exponents outside C break the identity
        count += 1
        u = rng.uniform(spheres_problem.control_lo, spheres_problem.control_hi)
        a = pf.field_multi(x, u)
        b = pf.field_smooth(x, u)
        scale = max(1.0, float(np.linalg.norm(a)))
        assert np.linalg.norm(a - b) <= 1e-10 * scale


def test_field_forms_identical_single_component(ball_problem):
    rng = np.random.default_rng(2)
    pf = PenalizedField(ball_problem, _level(ball_problem, 30.0))
    for _ in range(100):
        x = rng.uniform(-1.0, 1.0, size=3)
        u = rng.uniform(-1.0, 1.0, size=3)
        assert np.max(np.abs(pf.field_multi(x, u) - pf.field_smooth(x, u))) <= 1e-14


def test_penalty_pushes_inward_at_boundary(spheres_problem):
    # on the boundary with zero perturbation the field points into C
    pf = PenalizedField(spheres_problem, _level(spheres_problem, 60.0))
    x = np.array([0.0, 3.0, 0.0])  # both spheres active
    grads = spheres_problem.sset.gradients(x)
    v = pf.field_multi(x, np.zeros(2)) - spheres_problem.f(x, np.zeros(2))
    # the penalty term alone must have negative inner product with both normals
    assert np.all(grads @ v < 0)


def test_velocity_bound_value(spheres_problem):
    pf = PenalizedField(spheres_problem, _level(spheres_problem, 60.0))
    # M + 2 M Mbar/eta = 35 + 2*35*10/2
    assert pf.velocity_bound() == pytest.approx(385.0)


def test_spot_check_bound_clean(spheres_problem):
    rng = np.random.default_rng(0)
    assert spheres_problem.spot_check_bound(rng) == []


def test_spot_check_bound_flags_bad_constant(spheres_problem):
    p = spheres_problem
    bad = ControlProblem(
        name="understated-bound",
        f=p.f, g=p.g,
        control_lo=p.control_lo, control_hi=p.control_hi,
        horizon=p.horizon, x0=p.x0, sset=p.sset,
        m_bound=1.0,  # far below the true sup-norm of f on C x U
        state_bounds=p.state_bounds,
    )
    rng = np.random.default_rng(0)
    assert bad.spot_check_bound(rng) != []
