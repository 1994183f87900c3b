"""Numba-compiled RK4 marching for catalog problems.

A problem that ships :class:`~sweepopt.dynamics.FastKernels` (an njit'd
penalized right-hand side) gets its inner integration loop compiled here.
The compiled loop must be semantically identical to the pure-Python path
in :mod:`sweepopt.integrator`; tests assert agreement.

Compilation is lazy and cached per kernel object.  If numba is missing
the library silently falls back to the Python path.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_CACHE: dict[int, object] = {}


class _Compiled:
    def __init__(self, run_interval):
        self.run_interval = run_interval


def kernels_for(fast) -> Optional[_Compiled]:
    """Compiled interval-march for a FastKernels bundle, or None."""
    if fast is None or not HAVE_NUMBA:
        return None
    key = id(fast)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit

    rhs = fast.rhs

    @njit(cache=False)
    def run_interval(x, u, gamma, cap, hsub, nsub):
        n = x.size
        k1 = np.empty(n)
        k2 = np.empty(n)
        k3 = np.empty(n)
        k4 = np.empty(n)
        xt = np.empty(n)
        clamps = 0
        for s in range(nsub):
            clamps += rhs(x, u, gamma, cap, k1)
            for i in range(n):
                xt[i] = x[i] + 0.5 * hsub * k1[i]
            clamps += rhs(xt, u, gamma, cap, k2)
            for i in range(n):
                xt[i] = x[i] + 0.5 * hsub * k2[i]
            clamps += rhs(xt, u, gamma, cap, k3)
            for i in range(n):
                xt[i] = x[i] + hsub * k3[i]
            clamps += rhs(xt, u, gamma, cap, k4)
            ok = True
            for i in range(n):
                x[i] = x[i] + (hsub / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not np.isfinite(x[i]):
                    ok = False
            if not ok:
                return clamps, s
        return clamps, -1

    compiled = _Compiled(run_interval)
    _CACHE[key] = compiled
    return compiled
