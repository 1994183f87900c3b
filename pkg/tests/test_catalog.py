import numpy as np
import pytest

from sweepopt import catalog, geometry


def test_keys_are_sorted_and_stable():
    assert catalog.keys() == ["box-3", "two-spheres", "unit-ball-1"]
    assert catalog.get("two-spheres") is catalog.get("two-spheres")


def test_unknown_key_raises():
    with pytest.raises(KeyError, match="catalog"):
        catalog.get("nonesuch")


def test_two_spheres_constants():
    e = catalog.get("two-spheres")
    p = e.problem
    assert p.m_bound == 35.0
    assert p.sset.eta == 2.0
    assert p.sset.m_psi == 1.0
    assert p.sset.m_bar_psi == 10.0
    assert p.horizon == pytest.approx(np.pi / 2)
    assert np.array_equal(p.x0, [0.0, 0.0, 3.0])
    assert p.sset.r == 2
    assert not e.non_conforming


def test_two_spheres_exact_solution_properties():
    e = catalog.get("two-spheres")
    # the registered reference trajectory stays on both sphere boundaries
    for t in np.linspace(0.0, np.pi / 2, 25):
        x = e.exact(t)
        vals = e.problem.sset.values(x)
        assert np.allclose(vals, 0.0, atol=1e-12)
    # terminal cost of the reference trajectory
    assert e.problem.g(e.exact(np.pi / 2)) == pytest.approx(-9.0)
    assert np.allclose(e.exact(0.0), e.problem.x0)


def test_two_spheres_dynamics_sample():
    p = catalog.get("two-spheres").problem
    x = np.array([0.5, 1.0, -2.0])
    u = np.array([1.0, -1.0])
    f = p.f(x, u)
    assert np.allclose(f, [0.5 - 2.0 + 2.0, 4.0 - 2.0, -1.0 - 8.0])
    assert p.g(np.array([2.0, 3.0, -4.0])) == pytest.approx(4.0 - 9.0 + 4.0)


def test_fast_kernels_match_python_pointwise():
    rng = np.random.default_rng(0)
    for key in ("two-spheres", "unit-ball-1"):
        p = catalog.get(key).problem
        lo, hi = p.state_bounds
        for _ in range(50):
            x = rng.uniform(lo, hi)
            u = rng.uniform(p.control_lo, p.control_hi)
            gamma = float(rng.uniform(10.0, 100.0))
            out = np.empty(p.dim)
            clamps = p.fast.rhs(x, u, gamma, geometry.EXP_CAP, out)
            w = geometry.penalty_weights(p.sset, gamma, x)
            expected = (np.asarray(p.f(x, u), dtype=float)
                        - w.per_component @ p.sset.gradients(x))
            assert np.allclose(out, expected, rtol=1e-13, atol=1e-10)
            assert clamps == w.clamped
            vals = np.empty(p.sset.r)
            p.fast.psi_vals(x, vals)
            assert np.allclose(vals, p.sset.values(x), atol=1e-12)


def test_box_problem_flagged_non_conforming():
    e = catalog.get("box-3")
    assert e.non_conforming
    assert e.problem.sset.r == 6
    # the cube's corner has all-distinct active faces
    assert geometry.active_indices(e.problem.sset, np.ones(3)) == {0, 2, 4}


def test_unit_ball_smoothing_is_exact():
    p = catalog.get("unit-ball-1").problem
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.uniform(-1, 1, size=3)
        assert geometry.psi_smooth(p.sset, 77.0, x) == pytest.approx(
            geometry.psi_max(p.sset, x), abs=1e-14
        )
