"""Outer trust-region iteration driving the limited-memory models."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional

import numpy as np

from .qn_models import (
    Initialization,
    PairBuffer,
    SpectralFactors,
    build_mss,
    build_sr1,
    dense_init,
    factorize,
    identity_sr1_accepts,
    scalar_init,
)
from .smallmat import FactorizationError
from .subproblems import SubproblemInput, solve_sc_inf, solve_sc_l2, solve_trcg

HessianKind = Literal["mss", "sr1"]
NormKind = Literal["sc_inf", "sc_l2", "trcg_euclidean"]
RADIUS_FLOOR = 1e-15

_NORM_LABELS = {"sc_inf": "SC-INF", "sc_l2": "SC-L2", "trcg_euclidean": "trCG"}
_DEFAULT_MEMORY = {"mss": (3, 5), "sr1": (5, 7)}


@dataclass(frozen=True)
class RadiusParams:
    delta0: float = 1.0
    delta_max: float = 1e10
    shrink: float = 0.5
    grow: float = 2.0
    accept_ratio: float = 1e-4
    grow_ratio: float = 0.75

    def __post_init__(self):
        if not (0 < self.shrink < 1 < self.grow):
            raise ValueError("need 0 < shrink < 1 < grow")
        if not (0 <= self.accept_ratio < self.grow_ratio < 1):
            raise ValueError("need 0 <= accept_ratio < grow_ratio < 1")
        if not (0 < self.delta0 <= self.delta_max):
            raise ValueError("need 0 < delta0 <= delta_max")


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``memory`` and ``init_window`` default to 3 and 5 for MSS and to 5 and 7
    for SR1 when left as ``None``.  ``dependent_pairs`` decides what happens
    to a pair whose step is dependent on the stored ones: ``skip`` drops
    it, ``evict`` drops the oldest stored pairs until it fits.
    """

    hessian_kind: HessianKind = "mss"
    norm_kind: NormKind = "sc_inf"
    init_kind: Literal["scalar", "dense"] = "scalar"
    memory: Optional[int] = None
    init_window: Optional[int] = None
    grad_tol: float = 5e-4
    max_iter: int = 5000
    radius: RadiusParams = field(default_factory=RadiusParams)
    representation: Literal["standard", "gram_free"] = "standard"
    dependent_pairs: Literal["skip", "evict"] = "evict"
    label: Optional[str] = None

    def __post_init__(self):
        if self.hessian_kind not in _DEFAULT_MEMORY:
            raise ValueError(f"unknown hessian kind {self.hessian_kind!r}")
        if self.norm_kind not in _NORM_LABELS:
            raise ValueError(f"unknown norm kind {self.norm_kind!r}")
        if self.init_kind not in ("scalar", "dense"):
            raise ValueError(f"unknown init kind {self.init_kind!r}")
        if self.hessian_kind == "sr1" and self.init_kind == "dense":
            raise ValueError("the dense initialization is only defined for MSS")
        m, q = _DEFAULT_MEMORY[self.hessian_kind]
        if self.memory is None:
            object.__setattr__(self, "memory", m)
        if self.init_window is None:
            object.__setattr__(self, "init_window", q)
        if self.memory < 1 or self.init_window < 1:
            raise ValueError("memory and init_window must be positive")
        if self.dependent_pairs not in ("skip", "evict"):
            raise ValueError(f"unknown dependent-pair policy {self.dependent_pairs!r}")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        prefix = "L-MSSM" if self.hessian_kind == "mss" else "L-SR1"
        tail = "-D" if self.init_kind == "dense" else ""
        return f"{prefix}-{_NORM_LABELS[self.norm_kind]}{tail}"

    def with_label(self, label: str) -> "SolverConfig":
        return replace(self, label=label)


@dataclass
class RunRecord:
    problem_name: str
    solver_name: str
    converged: bool
    iterations: int
    f_evals: int
    g_evals: int
    final_f: float
    final_gnorm_inf: float
    wall_time: float
    status: str = ""
    model_resets: int = 0
    null_predictions: int = 0


def first_iteration_model(g0) -> SpectralFactors:
    """``B = I`` before any pair is available."""
    return SpectralFactors.identity(np.asarray(g0).shape[0], 1.0)


class _Model:
    """Per-run model state: the pair buffer plus the current approximation."""

    def __init__(self, cfg: SolverConfig, n: int):
        self.cfg = cfg
        self.n = n
        self.buf = PairBuffer(n, cfg.memory, cfg.init_window)
        self.resets = 0
        self.sr1 = None
        self.gamma = 1.0

    def _init(self) -> Initialization:
        q = self.cfg.init_window
        if self.cfg.init_kind == "dense":
            return dense_init(self.buf, q)
        return Initialization.scalar(scalar_init(self.buf, q), q)

    def reset(self):
        self.buf.clear()
        self.resets += 1

    def build(self, g):
        """Return ``(factors or None, matvec)`` for the current buffer."""
        cfg = self.cfg
        self.sr1 = None
        if self.buf.size == 0:
            self.gamma = scalar_init(self.buf, cfg.init_window)
            f = SpectralFactors.identity(self.n, self.gamma)
            return f, f.matvec
        try:
            if cfg.hessian_kind == "sr1":
                self.gamma = scalar_init(self.buf, cfg.init_window)
                model = build_sr1(self.buf, self.gamma)
                self.sr1 = model
            else:
                init = self._init()
                self.gamma = init.zeta
                model = build_mss(self.buf, init, cfg.representation)
            if cfg.norm_kind == "trcg_euclidean" and model.zeta_perp == model.zeta:
                return None, model.matvec
            f = factorize(model)
            return f, f.matvec
        except FactorizationError:
            self.reset()
            return self.build(g)

    def harvest(self, s, y):
        if self.cfg.hessian_kind == "sr1":
            if self.sr1 is not None:
                ok = self.sr1.accepts(s, y)
            else:
                ok = identity_sr1_accepts(self.gamma, s, y)
            if not ok:
                return False
        return self.buf.update(s, y, evict=self.cfg.dependent_pairs == "evict")


def _solve(cfg: SolverConfig, factors, matvec, g, delta, memory_used):
    if cfg.norm_kind == "trcg_euclidean":
        l = memory_used
        cap = min(g.shape[0], 2 * l + 30) if l else g.shape[0]
        return solve_trcg(g, matvec, delta, max_iter=cap)
    inp = SubproblemInput(g, delta, factors)
    if cfg.norm_kind == "sc_inf":
        return solve_sc_inf(inp)
    return solve_sc_l2(inp)


def minimize(problem, x0=None, config: Optional[SolverConfig] = None,
             callback: Optional[Callable[[int, np.ndarray, float, float], None]] = None):
    """Run the trust-region method from ``x0``.

    Parameters
    ----------
    problem
        Object with ``name``, ``eval_f`` and ``eval_g`` (and ``x0`` when
        ``x0`` is omitted).
    x0 : array_like, optional
        Starting point.
    config : SolverConfig, optional
    callback : callable, optional
        Called as ``callback(k, x, f, delta)`` after every iteration.

    Returns
    -------
    record : RunRecord
    x : ndarray
        Final iterate.
    """
    cfg = config or SolverConfig()
    rp = cfg.radius
    t0 = time.perf_counter()
    x = np.array(problem.x0 if x0 is None else x0, dtype=float)
    n = x.shape[0]
    name = getattr(problem, "name", "anonymous")
    nf = ng = 0

    def record(status, conv, it, fx, gnorm, model=None):
        return RunRecord(name, cfg.name, conv, it, nf, ng, float(fx), float(gnorm),
                         time.perf_counter() - t0, status,
                         model.resets if model else 0, nulls)

    nulls = 0
    if not np.all(np.isfinite(x)):
        return record("nonfinite_start", False, 0, np.nan, np.inf), x
    fx = problem.eval_f(x)
    gx = np.asarray(problem.eval_g(x), dtype=float)
    nf += 1
    ng += 1
    if not (np.isfinite(fx) and np.all(np.isfinite(gx))):
        return record("nonfinite_start", False, 0, fx, np.inf), x

    model = _Model(cfg, n)
    delta = rp.delta0
    k = 0
    while True:
        gnorm = float(np.max(np.abs(gx))) if n else 0.0
        if gnorm < cfg.grad_tol:
            return record("converged", True, k, fx, gnorm, model), x
        if k >= cfg.max_iter:
            return record("max_iter", False, k, fx, gnorm, model), x
        if delta < RADIUS_FLOOR:
            return record("radius_underflow", False, k, fx, gnorm, model), x

        factors, matvec = model.build(gx)
        res = _solve(cfg, factors, matvec, gx, delta, model.buf.size)
        k += 1
        pred = res.predicted_reduction
        if not pred > 0:
            # only reachable through rounding; restart the model from gamma I
            nulls += 1
            model.reset()
            delta *= rp.shrink
            if callback:
                callback(k, x, fx, delta)
            continue

        s = res.step
        xt = x + s
        ft = problem.eval_f(xt)
        nf += 1
        if not np.isfinite(ft):
            delta *= rp.shrink
            if callback:
                callback(k, x, fx, delta)
            continue
        gt = np.asarray(problem.eval_g(xt), dtype=float)
        ng += 1
        if not np.all(np.isfinite(gt)):
            delta *= rp.shrink
            if callback:
                callback(k, x, fx, delta)
            continue

        rho = (fx - ft) / pred
        model.harvest(s, gt - gx)
        if rho >= rp.accept_ratio:
            x, fx, gx = xt, ft, gt
        if rho < rp.accept_ratio:
            delta *= rp.shrink
        elif rho >= rp.grow_ratio and res.boundary:
            delta = min(rp.grow * delta, rp.delta_max)
        if callback:
            callback(k, x, fx, delta)
