"""Random instance generators shared by the test modules."""
import numpy as np

from mss_tr.qn_models import Initialization, PairBuffer, SpectralFactors


def random_pairs(rng, n, l):
    """``l`` random pairs in chronological order (oldest first)."""
    return [(rng.standard_normal(n), rng.standard_normal(n)) for _ in range(l)]


def buffer_from(pairs, n, memory=None, history=None):
    buf = PairBuffer(n, memory or max(len(pairs), 1), history)
    for s, y in pairs:
        assert buf.update(s, y)
    return buf


def random_init(rng, dense):
    zeta = float(rng.uniform(0.2, 5.0))
    if dense:
        return Initialization("dense", zeta, float(rng.uniform(0.2, 5.0)), 5)
    return Initialization.scalar(zeta)


def complement_basis(P):
    """Orthonormal basis of the orthogonal complement of ``range(P)``."""
    n, r = P.shape
    U, _, _ = np.linalg.svd(P, full_matrices=True)
    return U[:, r:]


def sample_ball(rng, P, Pperp, delta, count, kind):
    """Random points with ``|P^T x|_{inf or 2} <= delta`` and ``|Pperp^T x| <= delta``."""
    r = P.shape[1]
    if kind == "inf":
        A = rng.uniform(-delta, delta, (count, r))
        # mix in box corners and faces, where the minimizer often sits
        A[: count // 4] = delta * rng.choice([-1.0, 1.0], (count // 4, r))
    else:
        A = rng.standard_normal((count, r))
        A /= np.linalg.norm(A, axis=1, keepdims=True)
        A *= delta * rng.uniform(0, 1, (count, 1)) ** (1.0 / r)
    k = Pperp.shape[1]
    if k:
        C = rng.standard_normal((count, k))
        C /= np.linalg.norm(C, axis=1, keepdims=True)
        C *= delta * rng.uniform(0, 1, (count, 1)) ** (1.0 / k)
        return A @ P.T + C @ Pperp.T
    return A @ P.T


def model_values(B, g, X):
    return X @ g + 0.5 * np.einsum("ij,ij->i", X @ B, X)


def random_factors(rng, n=None, r=None, hard=None):
    """Random factored model with mixed-sign eigenvalues and a gradient.

    ``hard`` picks a degenerate gradient: ``"par"`` removes the weight on the
    smallest eigencoordinate, ``"perp"`` puts ``g`` inside ``range(P_par)``.
    """
    n = n or int(rng.integers(4, 13))
    r = r or int(rng.integers(1, min(6, n - 1) + 1))
    P, _ = np.linalg.qr(rng.standard_normal((n, r)))
    lam = np.sort(rng.uniform(-3, 3, r))
    zp = float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0))
    f = SpectralFactors.from_basis(P, lam, zp)
    g = rng.standard_normal(n)
    if hard == "par":
        g = g - P[:, 0] * (P[:, 0] @ g)
    elif hard == "perp":
        g = P @ (P.T @ g)
        g = g - P[:, 0] * (P[:, 0] @ g)
    return f, g, float(rng.uniform(0.2, 2.0))


def dense_model(f):
    P = f.p_parallel()
    n = P.shape[0]
    return P @ np.diag(f.lambdas) @ P.T + f.zeta_perp * (np.eye(n) - P @ P.T)
