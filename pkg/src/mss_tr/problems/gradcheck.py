"""Central-difference gradient checker."""
from __future__ import annotations

import os
from typing import Optional

import numpy as np

SAMPLE_THRESHOLD = 200
SAMPLE_SIZE = 50


def default_seed() -> int:
    return int(os.environ.get("MSS_TR_SEED", "0"))


def check_gradient(problem, x, h: float = 1e-6, seed: Optional[int] = None,
                   coords=None) -> float:
    """Largest central-difference gradient error, scaled by ``max(1, |g|_inf)``.

    Coordinate ``i`` uses the step ``h (1 + |x_i|)``.  For ``n > 200`` a
    seeded sample of 50 coordinates is checked unless ``coords`` is given.
    """
    x = np.array(x, dtype=float)
    n = x.shape[0]
    g = problem.eval_g(x)
    if coords is None:
        if n > SAMPLE_THRESHOLD:
            rng = np.random.default_rng(default_seed() if seed is None else seed)
            coords = np.sort(rng.choice(n, SAMPLE_SIZE, replace=False))
        else:
            coords = np.arange(n)
    scale = max(1.0, float(np.max(np.abs(g))))
    worst = 0.0
    for i in coords:
        step = h * (1.0 + abs(x[i]))
        xp = x.copy()
        xp[i] += step
        xm = x.copy()
        xm[i] -= step
        fd = (problem.eval_f(xp) - problem.eval_f(xm)) / (2.0 * step)
        worst = max(worst, abs(fd - g[i]) / scale)
    return worst
