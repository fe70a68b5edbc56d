"""CSV, SVG and text renderings of a profile."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

import numpy as np

from .profiles import Profile

TABLE_TAUS = (1.0, 2.0, 32.0)
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#e377c2", "#17becf")


def profile_csv(profile: Profile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", *profile.labels])
    for j, tau in enumerate(profile.tau_grid):
        w.writerow([repr(float(tau))] + [repr(float(c)) for c in profile.curves[:, j]])
    return buf.getvalue()


def read_profile_csv(path, n_problems: int = 0) -> Profile:
    """Inverse of the CSV emitter (``n_problems`` is not stored in the file)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "tau":
        raise ValueError(f"{path}: not a profile CSV")
    labels = tuple(rows[0][1:])
    data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=float)
    data = data.reshape(-1, len(labels) + 1)
    return Profile(data[:, 0].copy(), labels, data[:, 1:].T.copy(), n_problems)


def profile_table(profile: Profile, taus=TABLE_TAUS) -> str:
    width = max(12, *(len(l) for l in profile.labels))
    head = "solver".ljust(width) + "".join(f"  rho({t:g})".rjust(11) for t in taus)
    lines = [head, "-" * len(head)]
    for label in profile.labels:
        vals = "".join(f"{profile.value_at(label, t):11.3f}" for t in taus)
        lines.append(label.ljust(width) + vals)
    return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def profile_svg(profile: Profile, title: str = "", width: int = 640,
                height: int = 420) -> str:
    """Step-function plot of the curves on a log2 tau axis."""
    left, right, top, bottom = 60, 170, 30, 50
    pw, ph = width - left - right, height - top - bottom
    lt = np.log2(profile.tau_grid)
    x_lo, x_hi = float(math.floor(lt[0])), float(math.ceil(lt[-1]))
    span = x_hi - x_lo or 1.0

    def X(v):
        return left + (v - x_lo) / span * pw

    def Y(v):
        return top + (1.0 - v) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for k in range(int(x_lo), int(x_hi) + 1):
        xs = _fmt(X(k))
        out.append(f'<line x1="{xs}" y1="{top + ph}" x2="{xs}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{xs}" y="{top + ph + 20}" font-size="11" '
                   f'text-anchor="middle">2^{k}</text>')
    for v in np.linspace(0.0, 1.0, 6):
        ys = _fmt(Y(v))
        out.append(f'<line x1="{left - 5}" y1="{ys}" x2="{left}" y2="{ys}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{ys}" font-size="11" text-anchor="end" '
                   f'dominant-baseline="middle">{v:.1f}</text>')
    if x_lo <= 0.0 <= x_hi:
        x1 = _fmt(X(0.0))
        out.append(f'<line x1="{x1}" y1="{top}" x2="{x1}" y2="{top + ph}" stroke="grey" '
                   f'stroke-dasharray="6,4"/>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" font-size="12" '
               f'text-anchor="middle">tau</text>')
    out.append(f'<text x="15" y="{top + ph / 2:.2f}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 15 {top + ph / 2:.2f})">rho(tau)</text>')
    if title:
        out.append(f'<text x="{left + pw / 2:.2f}" y="{top - 10}" font-size="13" '
                   f'text-anchor="middle">{_escape(title)}</text>')
    for i, label in enumerate(profile.labels):
        color = _COLORS[i % len(_COLORS)]
        c = profile.curves[i]
        pts = [(X(lt[0]), Y(c[0]))]
        for j in range(1, lt.size):
            if c[j] != c[j - 1]:
                pts.append((X(lt[j]), Y(c[j - 1])))
                pts.append((X(lt[j]), Y(c[j])))
        pts.append((X(lt[-1]), Y(c[-1])))
        coords = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = top + 15 + 18 * i
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly}" font-size="11" '
                   f'dominant-baseline="middle">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit(profile: Profile, fmt: str, path, title: str = "") -> Path:
    """Write ``profile`` as ``csv``, ``svg`` or ``table`` to ``path``."""
    render = {"csv": profile_csv, "table": profile_table,
              "svg": lambda p: profile_svg(p, title)}
    if fmt not in render:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    try:
        path.write_text(render[fmt](profile))
    except OSError as exc:
        raise OSError(f"cannot write {fmt} output to {path}: {exc}") from exc
    return path
