"""Trust-region subproblem solvers for factored limited-memory models.

The shape-changing norms measure a step through the model eigenbasis
``P = [P_par P_perp]``::

    |s|_{P,inf} = max(|P_par^T s|_inf, |P_perp^T s|_2)
    |s|_{P,2}   = max(|P_par^T s|_2,   |P_perp^T s|_2)

so the subproblem separates into a small problem in eigen-coordinates and a
one-dimensional problem on the complement.  ``P_perp`` is never formed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

import numpy as np

from .qn_models import SpectralFactors

PERP_INDEX_TOL = 1e-8
PERP_ZERO_TOL = 1e-8
PERP_RECOMPUTE_TOL = 1e-4
SECULAR_TOL = 1e-12
SECULAR_MAX_ITER = 100
BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class SubproblemInput:
    gradient: np.ndarray
    radius: float
    model: SpectralFactors

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("trust-region radius must be positive")
        if not np.all(np.isfinite(self.gradient)):
            raise ValueError("gradient must be finite")


@dataclass(frozen=True)
class StepResult:
    """Subproblem solution.

    ``predicted_reduction`` is ``-Q(step)``; ``multiplier`` is the
    Lagrange multiplier of the two-norm block (zero where not applicable).
    """

    step: np.ndarray
    predicted_reduction: float
    boundary: bool
    multiplier: float = 0.0
    iterations: int = 0
    trace: Optional[list] = field(default=None, compare=False, repr=False)


PerpKind = Literal["newton", "eigen", "boundary"]


@dataclass(frozen=True)
class PerpCase:
    """Closed-form solution on the complement, ``v_perp = scale * (direction)``.

    ``newton``: ``v_perp = -g_perp / zeta_perp`` (``scale = -1/zeta_perp``);
    ``eigen``: ``v_perp = delta u`` with ``u`` a unit vector in ``range(P_perp)``;
    ``boundary``: ``v_perp = -(delta/|g_perp|) g_perp``.
    """

    kind: PerpKind
    scale: float
    norm_v: float
    value: float  # contribution g_perp^T v_perp + zeta_perp/2 |v_perp|^2


def split_gradient(f: SpectralFactors, g):
    """``(P_par^T g, |P_perp^T g|)``.

    The complement norm comes from Pythagoras; when that loses more than
    about four digits it is recomputed from the explicit residual.
    """
    g = np.asarray(g, dtype=float)
    gnorm = np.linalg.norm(g)
    if f.rank == 0:
        return np.zeros(0), gnorm
    g_par = f.apply_p_parallel_t(g)
    sq = max(0.0, gnorm * gnorm - g_par @ g_par)
    g_perp = np.sqrt(sq)
    if g_perp < PERP_RECOMPUTE_TOL * gnorm:
        g_perp = np.linalg.norm(g - f.apply_p_parallel(g_par))
    return g_par, float(g_perp)


def solve_par_inf(g_par, lambdas, delta):
    """Componentwise minimizer of ``g v + lam v^2 / 2`` over ``|v| <= delta``.

    The free value in the flat case is taken as 0 and the sign in the
    negative-curvature case with zero gradient as ``+``.
    """
    g = np.asarray(g_par, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    v = np.empty_like(g)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        newton = -g / lam
    pos = lam > 0
    inside = pos & (np.abs(newton) <= delta)
    v[inside] = newton[inside]
    rest = ~inside
    gz = g == 0
    v[rest & gz & (lam == 0)] = 0.0
    v[rest & gz & (lam < 0)] = delta
    clip = rest & ~gz
    v[clip] = -delta * np.sign(g[clip])
    return v


def solve_perp(norm_g_perp, zeta_perp, delta) -> PerpCase:
    if zeta_perp > 0 and norm_g_perp <= delta * zeta_perp:
        nv = norm_g_perp / zeta_perp
        return PerpCase("newton", -1.0 / zeta_perp, nv,
                        -0.5 * norm_g_perp * norm_g_perp / zeta_perp)
    if zeta_perp <= 0 and norm_g_perp == 0:
        return PerpCase("eigen", delta, delta, 0.5 * zeta_perp * delta * delta)
    return PerpCase("boundary", -delta / norm_g_perp, delta,
                    -delta * norm_g_perp + 0.5 * zeta_perp * delta * delta)


def _perp_unit_index(f: SpectralFactors):
    """First ``i`` with ``|P_perp^T e_i|^2 = 1 - |P_par^T e_i|^2`` above threshold."""
    if f.rank == 0:
        return 0, 1.0
    P = f.p_parallel()
    row_sq = np.einsum("ij,ij->i", P, P)
    comp = 1.0 - row_sq
    hits = np.flatnonzero(comp > PERP_INDEX_TOL)
    if hits.size == 0:
        return None, 0.0
    i = int(hits[0])
    return i, float(comp[i])


def recover_step(f: SpectralFactors, v_par, perp: PerpCase, g, delta,
                 explicit_perp: bool = False):
    """Full-space step ``s = P_par (v_par - P_par^T w) + w``.

    ``w`` is any vector with ``P_perp^T w = v_perp``.  With
    ``explicit_perp`` the boundary direction is built from the residual
    ``g - P_par P_par^T g`` instead of ``g`` itself, which is the same step
    but keeps its complement part accurate when ``g_perp`` is tiny.
    """
    g = np.asarray(g, dtype=float)
    v_par = np.asarray(v_par, dtype=float)
    n = g.shape[0]
    if perp.kind == "newton":
        w = perp.scale * g
    elif perp.kind == "eigen":
        i, comp = _perp_unit_index(f)
        if i is None:
            return f.apply_p_parallel(v_par) if f.rank else np.zeros(n)
        w = np.zeros(n)
        w[i] = delta / np.sqrt(comp)
    else:
        if explicit_perp and f.rank:
            u = g - f.apply_p_parallel(f.apply_p_parallel_t(g))
            u = u - f.apply_p_parallel(f.apply_p_parallel_t(u))
            w = -delta * u / np.linalg.norm(u)
        else:
            w = perp.scale * g
    if f.rank == 0:
        return w
    return f.apply_p_parallel(v_par - f.apply_p_parallel_t(w)) + w


def _perp_part(f: SpectralFactors, g, delta):
    g_par, g_perp = split_gradient(f, g)
    gnorm = np.linalg.norm(g)
    if f.rank and g_perp <= PERP_ZERO_TOL * gnorm:
        g_perp = 0.0
    small = f.rank > 0 and g_perp < PERP_RECOMPUTE_TOL * gnorm
    return g_par, g_perp, solve_perp(g_perp, f.zeta_perp, delta), small


def _par_value(g_par, lam, v):
    return float(g_par @ v + 0.5 * np.dot(lam * v, v))


def _check_input(inp: SubproblemInput):
    return inp.model, np.asarray(inp.gradient, dtype=float), float(inp.radius)


def solve_sc_inf(inp: SubproblemInput) -> StepResult:
    """Exact minimizer of the model over the ``(P, inf)`` ball."""
    f, g, delta = _check_input(inp)
    g_par, g_perp, perp, small = _perp_part(f, g, delta)
    lam = f.lambdas
    v_par = solve_par_inf(g_par, lam, delta)
    s = recover_step(f, v_par, perp, g, delta, explicit_perp=small)
    q = _par_value(g_par, lam, v_par) + perp.value
    par_edge = v_par.size > 0 and np.max(np.abs(v_par)) >= (1 - BOUNDARY_TOL) * delta
    edge = par_edge or perp.norm_v >= (1 - BOUNDARY_TOL) * delta
    return StepResult(s, max(0.0, -q), bool(edge))


def _secular_v(g, lam, sigma):
    d = lam + sigma
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(g == 0, 0.0, -g / d)
    return v


def solve_par_2(g_par, lambdas, delta):
    """Minimize ``g^T v + v^T diag(lam) v / 2`` over ``|v|_2 <= delta``.

    Returns ``(v, sigma)`` satisfying ``(diag(lam) + sigma I) v = -g``,
    ``sigma (|v| - delta) = 0`` and ``lam + sigma >= 0``.  The boundary
    multiplier is the root of ``1/|v(sigma)| - 1/delta`` found by Newton's
    method inside a bracket, falling back to bisection.  When ``g`` has no
    weight on the smallest eigenvalue and ``v(-lam_min)`` is short, the
    remaining length is added along the first minimal coordinate.

    Raises
    ------
    ArithmeticError
        If neither Newton nor bisection locates the multiplier.
    """
    g = np.asarray(g_par, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    r = g.size
    if r == 0:
        return np.zeros(0), 0.0
    lmin = float(lam.min())
    gnorm = float(np.linalg.norm(g))
    spread = max(1.0, float(np.max(np.abs(lam))))

    if lmin > 0:
        v = -g / lam
        if np.linalg.norm(v) <= delta:
            return v, 0.0

    sigma_low = max(0.0, -lmin)
    near = lam <= lmin + 1e-10 * spread
    if lmin <= 0 and np.linalg.norm(g[near]) <= 1e-12 * max(1.0, gnorm):
        v = np.zeros(r)
        far = ~near
        v[far] = -g[far] / (lam[far] + sigma_low)
        nv = np.linalg.norm(v)
        if nv <= delta:
            if lmin < 0:
                i = int(np.flatnonzero(near)[0])
                v[i] = np.sqrt(max(0.0, delta * delta - nv * nv))
            return v, sigma_low

    if gnorm == 0:
        return np.zeros(r), sigma_low

    lo, hi = sigma_low, sigma_low + gnorm / delta
    sigma = sigma_low + 1e-13 * spread if lmin <= 0 else 0.0
    sigma = min(sigma, hi)
    for _ in range(SECULAR_MAX_ITER):
        v = _secular_v(g, lam, sigma)
        nv = np.linalg.norm(v)
        if abs(nv - delta) <= SECULAR_TOL * delta:
            return v * (delta / nv), sigma
        phi = 1.0 / nv - 1.0 / delta
        if phi < 0:
            lo = max(lo, sigma)
        else:
            hi = min(hi, sigma)
        d = lam + sigma
        dphi = np.sum(g * g / d**3) / nv**3
        step = sigma - phi / dphi if dphi > 0 else np.nan
        sigma = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    # bisection fallback on the (possibly shrunk) bracket
    for _ in range(200):
        sigma = 0.5 * (lo + hi)
        v = _secular_v(g, lam, sigma)
        nv = np.linalg.norm(v)
        if abs(nv - delta) <= SECULAR_TOL * delta or hi - lo <= 4e-16 * max(1.0, hi):
            if nv == 0 or not np.isfinite(nv):
                break
            return v * (delta / nv), sigma
        if nv > delta:
            lo = sigma
        else:
            hi = sigma
    raise ArithmeticError("secular equation did not converge")


def solve_sc_l2(inp: SubproblemInput) -> StepResult:
    """Exact minimizer of the model over the ``(P, 2)`` ball."""
    f, g, delta = _check_input(inp)
    g_par, g_perp, perp, small = _perp_part(f, g, delta)
    lam = f.lambdas
    v_par, sigma = solve_par_2(g_par, lam, delta)
    s = recover_step(f, v_par, perp, g, delta, explicit_perp=small)
    q = _par_value(g_par, lam, v_par) + perp.value
    edge = (np.linalg.norm(v_par) >= (1 - BOUNDARY_TOL) * delta
            or perp.norm_v >= (1 - BOUNDARY_TOL) * delta)
    return StepResult(s, max(0.0, -q), bool(edge), multiplier=float(sigma))


def _to_boundary(s, p, delta):
    """Positive root ``tau`` of ``|s + tau p| = delta`` (cancellation-free)."""
    pp = p @ p
    sp = s @ p
    ss = s @ s
    rad = np.sqrt(max(0.0, sp * sp + pp * (delta * delta - ss)))
    if sp >= 0:
        return (delta * delta - ss) / (sp + rad)
    return (rad - sp) / pp


def solve_trcg(g, b_apply: Callable[[np.ndarray], np.ndarray], delta,
               tol: Optional[float] = None, max_iter: Optional[int] = None,
               trace: bool = False) -> StepResult:
    """Steihaug truncated conjugate gradients in the Euclidean ball.

    Parameters
    ----------
    g : ndarray
        Model gradient.
    b_apply : callable
        ``v -> B v``.
    delta : float
        Trust-region radius.
    tol : float, optional
        Absolute residual tolerance, default ``1e-4 |g|``.
    max_iter : int, optional
        CG iteration cap, default ``n``.
    trace : bool
        Record ``(Q(s_j), |s_j|)`` after every iteration.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    gnorm = float(np.linalg.norm(g))
    if tol is None:
        tol = 1e-4 * gnorm
    if max_iter is None:
        max_iter = n
    s = np.zeros(n)
    hist = [(0.0, 0.0)] if trace else None
    if gnorm == 0.0:
        return StepResult(s, 0.0, False, trace=hist)
    r = g.copy()  # gradient of the model at s
    p = -r
    rr = r @ r
    q = 0.0
    boundary = False
    it = 0
    for it in range(1, max_iter + 1):
        Bp = b_apply(p)
        pBp = float(p @ Bp)
        if pBp <= 0:
            tau = _to_boundary(s, p, delta)
            q += tau * (r @ p) + 0.5 * tau * tau * pBp
            s = s + tau * p
            boundary = True
        else:
            alpha = rr / pBp
            s_next = s + alpha * p
            if np.linalg.norm(s_next) >= delta:
                tau = _to_boundary(s, p, delta)
                q += tau * (r @ p) + 0.5 * tau * tau * pBp
                s = s + tau * p
                boundary = True
            else:
                q += alpha * (r @ p) + 0.5 * alpha * alpha * pBp
                s = s_next
                r = r + alpha * Bp
                rr_new = r @ r
                if hist is not None:
                    hist.append((q, float(np.linalg.norm(s))))
                if np.sqrt(rr_new) <= tol:
                    break
                p = -r + (rr_new / rr) * p
                rr = rr_new
                continue
        if hist is not None:
            hist.append((q, float(np.linalg.norm(s))))
        break
    return StepResult(s, max(0.0, -q), boundary, iterations=it, trace=hist)
