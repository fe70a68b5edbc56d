"""Experiment grids, presets and the results CSV."""
from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from ..problems import DEFAULT_DIM, get_problem, problem_names
from ..trustregion import RunRecord, SolverConfig, minimize

RESULT_COLUMNS = ("problem", "solver", "converged", "iters", "fevals", "gevals",
                  "final_f", "final_gnorm", "seconds")
METRICS = ("f_evals", "time")


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    solver_configs: tuple[SolverConfig, ...]
    problem_names: tuple[str, ...]
    metric: str = "f_evals"
    max_iter: int = 5000
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if len(self.solver_configs) < 2:
            raise ValueError("an experiment needs at least two solvers")
        labels = [c.name for c in self.solver_configs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"solver labels must be unique: {labels}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")

    @property
    def labels(self) -> list[str]:
        return [c.name for c in self.solver_configs]

    def configs(self) -> list[SolverConfig]:
        return [replace(c, max_iter=self.max_iter) for c in self.solver_configs]


def _mss(norm, init="scalar", m=None, q=None, label=None):
    cfg = SolverConfig("mss", norm, init, memory=m, init_window=q)
    if label is None and m is not None:
        label = f"{cfg.name}-m{m}q{q}"
    return cfg.with_label(label) if label else cfg


def _sr1(norm):
    return SolverConfig("sr1", norm, "scalar")


def _sr1_pair(norm, init):
    return (_sr1(norm), _mss(norm, init, 3, 5), _mss(norm, init, 5, 7))


_PRESETS = {
    "exp-ia": ((_mss("sc_l2"), _mss("sc_l2", "dense")), 5000),
    "exp-ib": ((_mss("sc_inf"), _mss("sc_inf", "dense")), 5000),
    "exp-ic": ((_mss("sc_l2"), _mss("sc_inf", "dense")), 5000),
    "exp-ii": ((_mss("sc_inf", "dense"), _mss("trcg_euclidean")), 5000),
    "exp-iiia": (_sr1_pair("sc_l2", "scalar"), 50000),
    "exp-iiib": (_sr1_pair("sc_l2", "dense"), 50000),
    "exp-iiic": (_sr1_pair("sc_inf", "scalar"), 50000),
    "exp-iiid": (_sr1_pair("sc_inf", "dense"), 50000),
}


def preset_names() -> list[str]:
    return list(_PRESETS)


def preset(name: str, problems: Optional[Sequence[str]] = None,
           dim: int = DEFAULT_DIM, metric: str = "f_evals",
           max_iter: Optional[int] = None) -> ExperimentSpec:
    """Built-in experiment by name (``exp-ia`` ... ``exp-iiid``)."""
    try:
        configs, cap = _PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {preset_names()}") from None
    names = tuple(problems) if problems else tuple(problem_names())
    return ExperimentSpec(name.lower(), tuple(configs), names, metric,
                          cap if max_iter is None else max_iter, dim)


def run_cell(problem: str, dim: int, config: SolverConfig) -> RunRecord:
    """One (problem, solver) run; failures become non-converged records."""
    t0 = time.perf_counter()
    try:
        prob = get_problem(problem, dim)
        rec, _ = minimize(prob, config=config)
        return rec
    except Exception as exc:  # a failing cell must not abort the grid
        return RunRecord(problem, config.name, False, 0, 0, 0, float("nan"),
                         float("inf"), time.perf_counter() - t0,
                         f"error: {type(exc).__name__}: {exc}")


def _cell(args):
    return run_cell(*args)


def run_experiment(spec: ExperimentSpec, jobs: Optional[int] = 1) -> list[RunRecord]:
    """Run every cell of ``spec``; records come back in (problem, solver) order.

    ``jobs`` is the worker count; ``None`` uses the CPU count.
    """
    tasks = [(p, spec.dim, c) for p in spec.problem_names for c in spec.configs()]
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs <= 1 or len(tasks) <= 1:
        return [_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell, tasks))


def write_results_csv(records: Iterable[RunRecord], path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(RESULT_COLUMNS)
            for r in records:
                w.writerow([r.problem_name, r.solver_name, int(r.converged),
                            r.iterations, r.f_evals, r.g_evals, repr(float(r.final_f)),
                            repr(float(r.final_gnorm_inf)), repr(float(r.wall_time))])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results_csv(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(RESULT_COLUMNS) - set(rows[0]):
        raise ValueError(f"{path}: missing columns {set(RESULT_COLUMNS) - set(rows[0])}")
    return [RunRecord(r["problem"], r["solver"], r["converged"].strip().lower() in ("1", "true"),
                      int(r["iters"]), int(r["fevals"]), int(r["gevals"]),
                      float(r["final_f"]), float(r["final_gnorm"]), float(r["seconds"]))
            for r in rows]
