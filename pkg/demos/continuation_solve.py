"""End-to-end continuation solve of the benchmark problem.

The solver chains penalized problems of increasing strength, warm-starting
each level's control search from the previous one, and stops when two
consecutive optimal costs agree to within eps.  The benchmark has a known
optimal trajectory (a quarter circle swept along the lens boundary) and
optimal cost -9, so the run can be scored against ground truth.

This is the full-size run and takes a couple of minutes.
Run:  python3 demos/continuation_solve.py
"""

import numpy as np

from sweepopt import catalog, continuation

entry = catalog.get("two-spheres")
problem = entry.problem

report = continuation.run(problem, n_intervals=20, eps=0.01, gamma0=20.0,
                          delta=10.0, step=1e-4)

print(f"stop reason: {report.stop_reason.value}")
print(f"{'level':>5} {'gamma':>7} {'alpha':>9} {'sigma':>9} "
      f"{'cost':>10} {'evals':>7}")
for lv in report.levels:
    print(f"{lv.level.index:5d} {lv.level.gamma:7.1f} {lv.level.alpha:9.5f} "
          f"{lv.level.sigma:9.5f} {lv.result.best_cost:10.5f} "
          f"{lv.result.evaluations:7d}")

sup, gap = continuation.compare_exact(problem, report, entry.exact)
print()
print(f"final cost {report.final_cost:.5f} (exact optimum -9)")
print(f"sup distance to the exact trajectory: {sup:.4f}")
print(f"terminal cost gap: {gap:.4f}")

# where along the horizon is the numerical trajectory furthest from truth?
traj = report.final_trajectory
exact = np.array([entry.exact(t) for t in traj.times])
dist = np.linalg.norm(traj.states - exact, axis=1)
t_worst = traj.times[int(np.argmax(dist))]
print(f"worst deviation at t = {t_worst:.3f} of T = {problem.horizon:.3f}")
