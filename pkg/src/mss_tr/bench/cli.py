"""``mss-tr`` command line: solve one problem, run a preset, or plot results."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..problems import DEFAULT_DIM, UnknownProblemError, get_problem, parse_problem_list
from ..trustregion import SolverConfig, minimize
from .emit import emit, profile_table
from .profiles import extended_profile
from .runner import preset, preset_names, read_results_csv, run_experiment, write_results_csv

_NORMS = {"sc-inf": "sc_inf", "sc-l2": "sc_l2", "trcg": "trcg_euclidean"}
_REPS = {"standard": "standard", "gramfree": "gram_free", "gram_free": "gram_free"}
_METRICS = {"fevals": "f_evals", "f_evals": "f_evals", "time": "time"}


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` comments; keys may use dashes or underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mss-tr", description=__doc__)
    ap.add_argument("--config", help="key=value file supplying defaults for any flag")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run one solver on one problem")
    s.add_argument("--problem", required=True)
    s.add_argument("--dim", type=int, default=DEFAULT_DIM)
    s.add_argument("--hessian", choices=("mss", "sr1"), default="mss")
    s.add_argument("--norm", choices=tuple(_NORMS), default="sc-inf")
    s.add_argument("--init", choices=("scalar", "dense"), default="scalar")
    s.add_argument("--memory", type=int, default=None)
    s.add_argument("--window", type=int, default=None)
    s.add_argument("--tol", type=float, default=5e-4)
    s.add_argument("--max-iter", type=int, default=5000)
    s.add_argument("--rep", choices=tuple(_REPS), default="standard")
    s.add_argument("--dependent-pairs", choices=("skip", "evict"), default="evict")

    b = sub.add_parser("bench", help="run an experiment preset")
    b.add_argument("--preset", required=True, choices=preset_names())
    b.add_argument("--out", required=True, help="output directory")
    b.add_argument("--metric", choices=tuple(_METRICS), default="fevals")
    b.add_argument("--jobs", type=int, default=None, help="workers (default: CPU count)")
    b.add_argument("--dim", type=int, default=DEFAULT_DIM)
    b.add_argument("--problems", default=None,
                   help="comma-separated names, or @file with one name[:dim] per line")
    b.add_argument("--max-iter", type=int, default=None)

    p = sub.add_parser("profile", help="extended performance profile from a results CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="SVG path")
    p.add_argument("--metric", choices=tuple(_METRICS), default="fevals")
    p.add_argument("--csv", default=None, help="also write the profile curves here")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: Sequence[str]):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_config(known.config)
    for action in ap._subparsers._group_actions:  # one subparsers action
        for sp in action.choices.values():
            dests = {a.dest: a for a in sp._actions}
            defaults = {}
            for key, raw in values.items():
                key = {"in": "infile"}.get(key, key)
                if key in dests:
                    a = dests[key]
                    defaults[key] = a.type(raw) if a.type else raw
                    a.required = False
            sp.set_defaults(**defaults)


def _problem_list(spec: Optional[str], dim: int):
    if not spec:
        return None, dim
    if spec.startswith("@"):
        entries = parse_problem_list(Path(spec[1:]).read_text(), dim)
    else:
        entries = parse_problem_list(spec.replace(",", "\n"), dim)
    dims = {d for _, d in entries}
    if len(dims) > 1:
        raise SystemExit("per-problem dimensions must agree within one bench run")
    return [n for n, _ in entries], dims.pop() if dims else dim


def _cmd_solve(args) -> int:
    cfg = SolverConfig(args.hessian, _NORMS[args.norm], args.init, memory=args.memory,
                       init_window=args.window, grad_tol=args.tol, max_iter=args.max_iter,
                       representation=_REPS[args.rep], dependent_pairs=args.dependent_pairs)
    try:
        prob = get_problem(args.problem, args.dim)
    except UnknownProblemError as exc:
        print(f"mss-tr: {exc}", file=sys.stderr)
        return 2
    rec, _ = minimize(prob, config=cfg)
    for key in ("problem_name", "solver_name", "converged", "status", "iterations",
                "f_evals", "g_evals", "final_f", "final_gnorm_inf", "wall_time"):
        print(f"{key} = {getattr(rec, key)}")
    return 0 if rec.converged else 1


def _cmd_bench(args) -> int:
    names, dim = _problem_list(args.problems, args.dim)
    metric = _METRICS[args.metric]
    spec = preset(args.preset, names, dim, metric, args.max_iter)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = run_experiment(spec, jobs=args.jobs)
    write_results_csv(records, out / "results.csv")
    prof = extended_profile(records, metric)
    emit(prof, "csv", out / "profile.csv")
    emit(prof, "svg", out / "profile.svg", title=f"{spec.name} ({metric})")
    emit(prof, "table", out / "table.txt")
    print(profile_table(prof), end="")
    return 0


def _cmd_profile(args) -> int:
    metric = _METRICS[args.metric]
    prof = extended_profile(read_results_csv(args.infile), metric)
    emit(prof, "svg", args.out, title=metric)
    if args.csv:
        emit(prof, "csv", args.csv)
    print(profile_table(prof), end="")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = _build_parser()
    _apply_config(ap, argv)
    args = ap.parse_args(argv)
    handler = {"solve": _cmd_solve, "bench": _cmd_bench, "profile": _cmd_profile}
    return handler[args.command](args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
