"""Walk through the smoothed-max geometry of a nonsmooth sweeping set.

The sweeping set of the benchmark problem is the lens-shaped intersection
of two solid spheres.  Its boundary has a corner circle where both sphere
constraints are active; the log-sum-exp smoothing replaces the nonsmooth
max of the constraint functions with a C^1 over-approximation whose
quality is controlled by a single parameter gamma.

Run:  python3 demos/smoothing_geometry.py
"""

import numpy as np

from sweepopt import catalog, geometry

sset = catalog.get("two-spheres").problem.sset

print("lens-shaped set: intersection of two radius-5 spheres at (+-4, 0, 0)")
print(f"components r = {sset.r}, ambient dimension = {sset.dim}")
print()

# --- the sandwich bound ----------------------------------------------------
# max_i psi_i <= psi_smooth <= max_i psi_i + ln(r)/gamma, so the smoothing
# error is worst exactly where the components tie: on the corner circle.
corner = np.array([0.0, 0.0, 3.0])
print("smoothing error at the corner point (0, 0, 3), where psi_1 = psi_2 = 0:")
for gamma in (10.0, 40.0, 160.0, 640.0):
    ps = geometry.psi_smooth(sset, gamma, corner)
    print(f"  gamma = {gamma:6.0f}:  psi_smooth = {ps:.6f}"
          f"   (bound ln(2)/gamma = {np.log(2) / gamma:.6f})")
print()

# away from the tie the smoothing converges much faster than 1/gamma
off = np.array([0.1, 2.0, 0.0])
print("at (0.1, 2, 0) the nearer sphere dominates and the gap closes exponentially:")
for gamma in (2.0, 4.0, 8.0, 16.0):
    gap = geometry.psi_smooth(sset, gamma, off) - geometry.psi_max(sset, off)
    print(f"  gamma = {gamma:6.0f}:  psi_smooth - max psi = {gap:.3e}")
print()

# --- the smoothed gradient is a softmax blend ------------------------------
# On the corner the smoothed gradient averages the two sphere normals, and
# the average points straight up: the x1-components cancel.
grad = geometry.psi_smooth_grad(sset, 40.0, corner)
print(f"smoothed gradient at the corner: {grad}")
print("  (the two normals (-8,0,6) and (8,0,6) blend to (0,0,6))")
print()

# --- membership in the nested approximating sets ---------------------------
# For each level the solver works inside the shrunk set psi_smooth <= -alpha,
# which sits inside the smoothed set psi_smooth <= 0, which sits inside C.
gamma, alpha = 60.0, 0.008983275012211448
probes = {
    "deep interior (0,0,0)": np.zeros(3),
    "near boundary (0,0,2.997)": np.array([0.0, 0.0, 2.997]),
    "corner (0,0,3)": corner,
    "outside (0,0,3.2)": np.array([0.0, 0.0, 3.2]),
}
print(f"membership at gamma = {gamma}, alpha = {alpha:.6f}:")
for label, x in probes.items():
    m = geometry.membership(sset, gamma, alpha, x)
    print(f"  {label:28s} -> {m.value}")
