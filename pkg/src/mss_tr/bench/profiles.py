"""Extended performance profiles.

For problem ``p`` and solver ``s`` the ratio is ``t_ps / min_{i != s} t_pi``,
so values below 1 mark problems where ``s`` beat every other solver.
``rho_s(tau)`` is the fraction of problems with ratio at most ``tau``.
Failed runs have ``t = inf``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

DEFAULT_TAU_GRID = 2.0 ** (np.arange(-96, 81) / 16.0)


@dataclass(frozen=True)
class Profile:
    tau_grid: np.ndarray
    labels: tuple[str, ...]
    curves: np.ndarray  # (n_solvers, n_tau)
    n_problems: int
    ratios: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def curve(self, label: str) -> np.ndarray:
        return self.curves[self.labels.index(label)]

    def value_at(self, label: str, tau: float) -> float:
        """``rho(tau)`` for one solver, exact when ratios are known."""
        i = self.labels.index(label)
        if self.ratios is not None:
            return float(np.mean(self.ratios[:, i] <= tau)) if self.n_problems else 0.0
        j = np.searchsorted(self.tau_grid, tau, side="right") - 1
        return float(self.curves[i, j]) if j >= 0 else 0.0

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return (self.labels == other.labels and self.n_problems == other.n_problems
                and np.array_equal(self.tau_grid, other.tau_grid)
                and np.array_equal(self.curves, other.curves))


def metric_table(records, metric: str = "f_evals"):
    """Problems, labels and the ``(problems x solvers)`` cost matrix.

    Non-converged cells cost ``inf``.  Raises ``ValueError`` on missing or
    duplicated cells.
    """
    if metric not in ("f_evals", "time"):
        raise ValueError(f"unknown metric {metric!r}")
    problems: list[str] = []
    labels: list[str] = []
    cells = {}
    for r in records:
        if r.problem_name not in problems:
            problems.append(r.problem_name)
        if r.solver_name not in labels:
            labels.append(r.solver_name)
        key = (r.problem_name, r.solver_name)
        if key in cells:
            raise ValueError(f"duplicate record for {key}")
        val = r.f_evals if metric == "f_evals" else r.wall_time
        cells[key] = float(val) if r.converged else np.inf
    T = np.empty((len(problems), len(labels)))
    for i, p in enumerate(problems):
        for j, s in enumerate(labels):
            if (p, s) not in cells:
                raise ValueError(f"missing record for {(p, s)}")
            T[i, j] = cells[(p, s)]
    return problems, labels, T


def _ratio(t: np.ndarray, base: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = t / base
    r = np.where(np.isinf(t), np.inf, r)  # inf / inf
    r = np.where((t == 0) & (base == 0), 1.0, r)
    r = np.where(np.isfinite(t) & np.isinf(base), 0.0, r)
    return r


def extended_ratios(T: np.ndarray) -> np.ndarray:
    """Ratios against the best of the *other* solvers."""
    T = np.asarray(T, dtype=float)
    if T.shape[1] < 2:
        raise ValueError("profiles need at least two solvers")
    R = np.empty_like(T)
    for j in range(T.shape[1]):
        others = np.delete(T, j, axis=1).min(axis=1)
        R[:, j] = _ratio(T[:, j], others)
    return R


def classical_ratios(T: np.ndarray) -> np.ndarray:
    """Ratios against the best of *all* solvers."""
    T = np.asarray(T, dtype=float)
    best = T.min(axis=1, keepdims=True)
    return _ratio(T, np.broadcast_to(best, T.shape))


def profile_from_ratios(R: np.ndarray, labels: Sequence[str],
                        tau_grid=None) -> Profile:
    tau = DEFAULT_TAU_GRID if tau_grid is None else np.asarray(tau_grid, dtype=float)
    n_p = R.shape[0]
    if n_p:
        curves = (R[:, :, None] <= tau[None, None, :]).mean(axis=0)
    else:
        curves = np.zeros((R.shape[1], tau.size))
    return Profile(tau.copy(), tuple(labels), curves, n_p, ratios=R)


def extended_profile(records, metric: str = "f_evals", tau_grid=None) -> Profile:
    _, labels, T = metric_table(records, metric)
    return profile_from_ratios(extended_ratios(T), labels, tau_grid)


def classical_profile(records, metric: str = "f_evals", tau_grid=None) -> Profile:
    _, labels, T = metric_table(records, metric)
    return profile_from_ratios(classical_ratios(T), labels, tau_grid)


def solved_fraction(records, label: str) -> float:
    rs = [r for r in records if r.solver_name == label]
    return sum(r.converged for r in rs) / len(rs) if rs else 0.0
