"""Shared fixtures: full benchmark runs are expensive, so they execute
once per session and feed several tests."""

import csv
import json
from types import SimpleNamespace

import numpy as np
import pytest

from sweepopt import cli


def brute_force_cone_distance(G, v, seed=0):
    """Dense direction search for min ||v - w|| over {w : G w <= 0}.

    The projection lies on a ray from the origin, so it suffices to scan
    unit directions d with G d <= 0 and take w = max(0, <v,d>) d; the
    origin is always feasible.  A coarse global scan is refined by
    resampling around the incumbent direction.  Independent of the
    active-set method under test.
    """
    rng = np.random.default_rng(seed)

    def ray_distances(dirs):
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        feas = dirs[np.all(dirs @ G.T <= 0.0, axis=1)]
        if not feas.size:
            return None, np.inf
        t = np.maximum(feas @ v, 0.0)
        d2 = np.linalg.norm(t[:, None] * feas - v, axis=1)
        i = int(np.argmin(d2))
        return feas[i], float(d2[i])

    best = float(np.linalg.norm(v))  # w = 0
    center, dist = ray_distances(rng.normal(size=(20000, G.shape[1])))
    best = min(best, dist)
    scale = 0.3
    for _ in range(8):
        if center is None:
            break
        cand, dist = ray_distances(
            center + scale * rng.normal(size=(3000, G.shape[1]))
        )
        if cand is not None and dist < best:
            center, best = cand, dist
        scale *= 0.4
    return best


def _benchmark_run(tmp_path_factory, eps):
    out = tmp_path_factory.mktemp(f"benchmark-eps-{eps}")
    rc = cli.main([
        "compare-exact", "--problem", "two-spheres", "--N", "20",
        "--eps", str(eps), "--gamma0", "20", "--delta", "10",
        "--rk4-step", "1e-4", "--output-dir", str(out),
    ])
    report = json.loads((out / "report.json").read_text())
    with open(out / "compare.csv") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    data = np.array(rows[1:], dtype=float)
    return SimpleNamespace(rc=rc, report=report, header=header, data=data,
                           out=out)


@pytest.fixture(scope="session")
def benchmark_coarse(tmp_path_factory):
    """Full benchmark continuation at the coarse stopping tolerance."""
    return _benchmark_run(tmp_path_factory, 0.01)


@pytest.fixture(scope="session")
def benchmark_fine(tmp_path_factory):
    """Full benchmark continuation at the fine stopping tolerance."""
    return _benchmark_run(tmp_path_factory, 0.001)
