"""Inward shift directions at nonsmooth boundary points.

A boundary starting point must be nudged into the interior before each
penalized solve, and the nudge direction comes from the tangent cone: at a
corner, each active constraint's negated gradient is projected onto the
cone of directions that do not leave the set, and the projections are
summed.

Run:  python3 demos/cone_projection.py
"""

import numpy as np

from sweepopt import catalog, initialization, schedule

problem = catalog.get("two-spheres").problem
sset = problem.sset

x0 = np.array([0.0, 0.0, 3.0])
print(f"starting point {x0} lies on the corner circle of the lens")

d = initialization.inward_direction(sset, x0)
print(f"active constraints: {sorted(d.active_set)}")
for i, p in zip(sorted(d.active_set), d.projections):
    print(f"  projection of -grad psi_{i + 1}: {p}")
print(f"summed direction: {d.raw}")
print(f"unit inward direction: {d.direction}")
print()

# The shift magnitude sigma shrinks as gamma grows, so the perturbed
# problems start closer and closer to the true initial point.
print("per-level shifted starts (x0 + sigma * direction):")
for gamma in (40.0, 60.0, 120.0, 240.0):
    level = schedule.make_level(problem.m_bound, sset.eta, sset.m_psi,
                                sset.r, gamma)
    start = initialization.shifted_start(sset, x0, level)
    print(f"  gamma = {gamma:6.0f}:  sigma = {level.sigma:.6f}  start = {start}")
print()

# A smooth boundary point has a single active constraint; the projection
# then just removes the outward normal component.
side = np.array([-1.0, 0.0, 0.0])
d_side = initialization.inward_direction(sset, side)
print(f"at the smooth boundary point {side}:")
print(f"  active constraints: {sorted(d_side.active_set)}")
print(f"  inward direction: {d_side.direction}")
