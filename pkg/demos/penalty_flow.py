"""The exponential penalty as a soft normal cone.

Integrating the penalized dynamics under a fixed control shows the
mechanism of the method: away from the boundary the penalty term is
invisible, but any attempt to cross the boundary wakes up a restoring
force of size gamma * e^{gamma psi} that grows without bound.  The
trajectory therefore glides along a thin boundary layer whose width
shrinks like ln(gamma)/gamma.

Run:  python3 demos/penalty_flow.py
"""

import numpy as np

from sweepopt import catalog, initialization, schedule
from sweepopt.dynamics import PenalizedField
from sweepopt.integrator import PiecewiseControl, integrate

problem = catalog.get("two-spheres").problem
sset = problem.sset

# constant control pushing the state against the boundary for the whole
# horizon; the second control component is held at its lower bound
ctrl = PiecewiseControl(np.tile([1.0, -1.0], (20, 1)), horizon=problem.horizon)

print("constant control u = (1, -1), increasing penalty strength:\n")
print(f"{'gamma':>8} {'min psi_smooth':>15} {'max psi_smooth':>15} "
      f"{'max xi_total':>13} {'terminal cost':>14}")
for gamma in (40.0, 60.0, 120.0, 240.0):
    level = schedule.make_level(problem.m_bound, sset.eta, sset.m_psi,
                                sset.r, gamma)
    start = initialization.shifted_start(sset, problem.x0, level)
    traj = integrate(PenalizedField(problem, level), ctrl, start,
                     step=1e-4, record_every=100)
    cost = problem.g(traj.terminal_state)
    print(f"{gamma:8.0f} {traj.psi_smooth.min():15.6f} "
          f"{traj.psi_smooth.max():15.6f} {traj.xi_total.max():13.3f} "
          f"{cost:14.6f}")

print()
print("the boundary layer narrows (max psi_smooth rises toward 0 like")
print("-ln(gamma)/gamma) while the total penalty weight stays bounded by")
print(f"2M/eta = {2 * problem.m_bound / sset.eta}; the terminal cost")
print("approaches the exact optimal value -9 from above.")
