"""End-to-end acceptance suite.

Each test pins one externally meaningful behavior of the solver at its
stated tolerance: reproduction of the benchmark's published cost and
schedule endpoints, trajectory accuracy against the known exact solution,
the geometric property suite, the cone-projection oracle, the smooth-case
regression, the integrator's order, and bitwise reproducibility of
reports.  The two full benchmark runs are session fixtures (conftest).
"""

import json
import math
import re

import numpy as np
import pytest
from conftest import brute_force_cone_distance

from sweepopt import catalog, cli, continuation, geometry, initialization, schedule
from sweepopt.dynamics import PenalizedField
from sweepopt.integrator import PiecewiseControl, terminal_state
from sweepopt.optimizer import NelderMeadOptions


def _sup_and_gap(bench):
    """Sup-sample distance and terminal cost gap from a comparison CSV."""
    h = bench.header
    n = sum(1 for c in h if re.fullmatch(r"x\d+", c))
    xi = [h.index(f"x{i + 1}") for i in range(n)]
    ei = [h.index(f"exact_x{i + 1}") for i in range(n)]
    states = bench.data[:, xi]
    exact = bench.data[:, ei]
    sup = float(np.max(np.linalg.norm(states - exact, axis=1)))
    g = catalog.get("two-spheres").problem.g
    gap = abs(float(g(states[-1])) - float(g(exact[-1])))
    return sup, gap


# ---------------------------------------------------------------------------
# 1. benchmark cost reproduction, coarse stopping tolerance
# ---------------------------------------------------------------------------

def test_benchmark_converges_at_reference_schedule_coarse(benchmark_coarse):
    assert benchmark_coarse.rc == 0
    rep = benchmark_coarse.report
    assert rep["stop_reason"] == "CostConverged"
    assert rep["final_gamma"] == 60.0
    assert -9.00 <= rep["final_cost"] <= -8.85


# ---------------------------------------------------------------------------
# 2. benchmark cost reproduction, fine stopping tolerance
# ---------------------------------------------------------------------------

def test_benchmark_cost_band_fine(benchmark_fine):
    rep = benchmark_fine.report
    assert rep["stop_reason"] == "CostConverged"
    assert -9.00 <= rep["final_cost"] <= -8.90


def test_benchmark_schedule_endpoint_fine(benchmark_fine):
    # The reference experiment reports stopping near penalty strength 180.
    # The converged per-level costs of this solver follow the boundary-layer
    # model cost(gamma) ~ -9 + ln(gamma)/gamma + const, whose consecutive
    # differences only cross the 0.001 stopping threshold near gamma = 210,
    # so a well-converged inner solver cannot stop earlier; the reference
    # endpoint evidently reflects inner-solver noise.  Documented as a known
    # discrepancy in the project decision ledger; this assertion states the
    # published endpoint and is expected to fail until that is resolved.
    rep = benchmark_fine.report
    assert abs(rep["final_gamma"] - 180.0) <= 10.0


# ---------------------------------------------------------------------------
# 3. trajectory oracle against the exact solution
# ---------------------------------------------------------------------------

def test_trajectory_tracks_exact_solution_coarse(benchmark_coarse):
    sup, gap = _sup_and_gap(benchmark_coarse)
    assert sup <= 0.15
    assert gap <= 0.15


def test_trajectory_cost_gap_fine(benchmark_fine):
    _, gap = _sup_and_gap(benchmark_fine)
    assert gap <= 0.05


# ---------------------------------------------------------------------------
# 4. property suite
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def spheres():
    return catalog.get("two-spheres").problem


def _box_samples(problem, count, seed):
    rng = np.random.default_rng(seed)
    lo, hi = problem.state_bounds
    return rng.uniform(lo, hi, size=(count, problem.dim))


def test_sandwich_bound_bulk(spheres):
    pts = _box_samples(spheres, 10_000, seed=100)
    for gamma in (40.0, 80.0, 160.0):
        for x in pts:
            vmax = geometry.psi_max(spheres.sset, x)
            ps = geometry.psi_smooth(spheres.sset, gamma, x)
            assert vmax - ps <= 1e-12
            assert ps - vmax - math.log(2) / gamma <= 1e-12


def test_gamma_monotonicity_bulk(spheres):
    pts = _box_samples(spheres, 10_000, seed=100)
    for x in pts:
        prev = None
        for gamma in (40.0, 80.0, 160.0):
            ps = geometry.psi_smooth(spheres.sset, gamma, x)
            if prev is not None:
                assert ps - prev <= 1e-12
            prev = ps


def test_gradient_finite_difference_bulk(spheres):
    rng = np.random.default_rng(101)
    pts = _box_samples(spheres, 1_000, seed=101)
    h = 1e-6
    for x in pts:
        gamma = float(rng.uniform(10.0, 1e3))
        grad = geometry.psi_smooth_grad(spheres.sset, gamma, x)
        fd = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd[i] = (geometry.psi_smooth(spheres.sset, gamma, x + e)
                     - geometry.psi_smooth(spheres.sset, gamma, x - e)) / (2 * h)
        assert np.linalg.norm(fd - grad) <= 1e-5 * max(1.0, np.linalg.norm(grad))


def test_field_form_equivalence_bulk(spheres):
    rng = np.random.default_rng(102)
    level = schedule.make_level(spheres.m_bound, spheres.sset.eta,
                                spheres.sset.m_psi, spheres.sset.r, 60.0)
    pf = PenalizedField(spheres, level)
    lo, hi = spheres.state_bounds
    count = 0
    while count < 1_000:
        x = rng.uniform(lo, hi)
        if geometry.psi_max(spheres.sset, x) > 0:
            continue
        count += 1
        u = rng.uniform(spheres.control_lo, spheres.control_hi)
        a = pf.field_multi(x, u)
        b = pf.field_smooth(x, u)
        assert np.linalg.norm(a - b) <= 1e-10 * max(1.0, np.linalg.norm(a))


def test_converged_run_invariants(benchmark_coarse):
    # containment / total-penalty-weight / velocity checks on every level
    # with penalty strength >= 40 of the converged benchmark run
    checked = 0
    for lv in benchmark_coarse.report["levels"]:
        if lv["gamma"] < 40.0:
            continue
        checked += 1
        inv = lv["invariants"]
        assert inv["containment"]["violations"] == 0, lv["gamma"]
        # xi_total <= (2M/eta) * 1.05 = 36.75
        assert inv["xi_bound"]["violations"] == 0, lv["gamma"]
        assert inv["xi_bound"]["worst_margin"] <= 0.0
        # field norm <= (M + 2 M Mbar/eta) * 1.05 = 385 * 1.05
        assert inv["velocity_bound"]["violations"] == 0, lv["gamma"]
    assert checked >= 3


# ---------------------------------------------------------------------------
# 5. tangent-cone projection oracle
# ---------------------------------------------------------------------------

def test_cone_projection_reference_values(spheres):
    x0 = np.array([0.0, 0.0, 3.0])
    grads = spheres.sset.gradients(x0)
    p = initialization.project_tangent_cone(grads, -grads[0])
    assert np.max(np.abs(p - np.array([144 / 25, 0.0, -192 / 25]))) <= 1e-12
    d = initialization.inward_direction(spheres.sset, x0)
    assert np.max(np.abs(d.direction - np.array([0.0, 0.0, -1.0]))) <= 1e-12


def test_cone_projection_against_dense_search():
    rng = np.random.default_rng(42)
    for trial in range(100):
        r = int(rng.integers(1, 4))
        G = rng.normal(size=(r, 3))
        v = rng.normal(size=3) * 3.0
        w = initialization.project_tangent_cone(G, v)
        exact = float(np.linalg.norm(w - v))
        brute = brute_force_cone_distance(G, v, seed=trial)
        assert exact <= brute + 1e-9
        assert brute - exact <= 1e-3


# ---------------------------------------------------------------------------
# 6. smooth-case regression (single constraint)
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def ball_solve():
    e = catalog.get("unit-ball-1")
    d = e.defaults
    return continuation.run(e.problem, n_intervals=d["N"], eps=d["eps"],
                            gamma0=d["gamma0"], delta=d["delta"],
                            step=d["step"])


def test_single_component_smoothing_is_exact():
    p = catalog.get("unit-ball-1").problem
    rng = np.random.default_rng(6)
    level = schedule.make_level(p.m_bound, p.sset.eta, p.sset.m_psi,
                                p.sset.r, 30.0)
    pf = PenalizedField(p, level)
    for _ in range(200):
        x = rng.uniform(-1.2, 1.2, size=3)
        assert abs(geometry.psi_smooth(p.sset, 30.0, x)
                   - geometry.psi_max(p.sset, x)) <= 1e-14
        u = rng.uniform(-1, 1, size=3)
        assert np.max(np.abs(pf.field_multi(x, u) - pf.field_smooth(x, u))) <= 1e-14


def test_single_component_solve_converges_cleanly(ball_solve):
    rep = ball_solve
    assert rep.stop_reason is continuation.StopReason.COST_CONVERGED
    for lv in rep.levels:
        assert lv.invariants.passed, (lv.level.gamma, lv.invariants.to_dict())


# ---------------------------------------------------------------------------
# 7. integrator order
# ---------------------------------------------------------------------------

def test_integrator_order_at_least_three_point_seven():
    p = catalog.get("unit-ball-1").problem
    level = schedule.make_level(p.m_bound, p.sset.eta, p.sset.m_psi,
                                p.sset.r, 8.0)
    pf = PenalizedField(p, level)
    ctrl = PiecewiseControl(np.tile([0.5, -0.3, 0.2], (1, 1)), horizon=1.0)
    start = np.array([0.3, 0.2, -0.1])
    sols = [terminal_state(pf, ctrl, start, step=h)[0]
            for h in (0.05, 0.025, 0.0125)]
    e1 = np.linalg.norm(sols[0] - sols[1])
    e2 = np.linalg.norm(sols[1] - sols[2])
    assert math.log2(e1 / e2) >= 3.7


# ---------------------------------------------------------------------------
# 8. determinism of the report artifact
# ---------------------------------------------------------------------------

def test_identical_invocations_identical_reports(tmp_path):
    args = ["solve", "--problem", "unit-ball-1", "--N", "3", "--eps", "0.02",
            "--gamma0", "10", "--delta", "5", "--rk4-step", "5e-3",
            "--output-dir", str(tmp_path)]
    assert cli.main(args) == 0
    first = re.sub(r'"wall_time": [0-9.eE+-]+',
                   '"wall_time": 0', (tmp_path / "report.json").read_text())
    assert cli.main(args) == 0
    second = re.sub(r'"wall_time": [0-9.eE+-]+',
                    '"wall_time": 0', (tmp_path / "report.json").read_text())
    assert first == second
