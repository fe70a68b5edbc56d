"""Dense kernels for the small core matrices of a limited-memory model.

Everything here works on matrices of order at most ``2m + 2`` with ``m``
the quasi-Newton memory, so plain dense storage is used throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

DEPENDENCE_TOL = 1e-12


class FactorizationError(ArithmeticError):
    """A small factorization could not be completed."""


@dataclass(frozen=True)
class LdlFactor:
    """Diagonal-threshold LDL^T factorization of a symmetric matrix.

    ``lower`` and ``diag`` only cover the retained columns, i.e.
    ``lower @ diag(diag) @ lower.T == A[kept][:, kept]``.
    """

    order: int
    lower: np.ndarray
    diag: np.ndarray
    rank: int
    kept_columns: tuple[int, ...]


@dataclass(frozen=True)
class SymEig:
    order: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def ldl_with_pivot_threshold(A, tol=DEPENDENCE_TOL) -> LdlFactor:
    """Left-looking LDL^T that skips columns with negligible pivots.

    Columns are visited in their given order.  The pivot ``d_j`` of column
    ``j`` is the Schur complement of ``A[j, j]`` against the columns already
    retained; the column is dropped when ``|d_j| <= tol * |A[j, j]|``.  For a
    Gram matrix ``V^T V`` this is ``sin^2`` of the angle between ``v_j`` and
    the span of the retained earlier columns, so the test does not depend on
    individual column scaling.

    Parameters
    ----------
    A : array_like, shape (p, p)
        Symmetric matrix.  Only the lower triangle is read.
    tol : float
        Relative pivot tolerance.

    Returns
    -------
    LdlFactor
    """
    A = np.asarray(A, dtype=float)
    p = A.shape[0]
    if A.shape != (p, p):
        raise ValueError("ldl_with_pivot_threshold expects a square matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")

    kept: list[int] = []
    # rows of L restricted to retained columns, stored for every column of A
    L = np.zeros((p, p))
    d = np.zeros(p)
    for j in range(p):
        r = len(kept)
        if r:
            lj = L[j, :r]
            dj = A[j, j] - np.dot(lj * lj, d[:r])
        else:
            dj = A[j, j]
        if not np.isfinite(dj):
            raise FactorizationError("non-finite pivot in LDL^T")
        if abs(dj) <= tol * abs(A[j, j]):
            continue
        d[r] = dj
        if j + 1 < p:
            rest = A[j + 1:, j]
            if r:
                rest = rest - L[j + 1:, :r] @ (d[:r] * L[j, :r])
            L[j + 1:, r] = rest / dj
        L[j, r] = 1.0
        kept.append(j)

    r = len(kept)
    idx = np.array(kept, dtype=int)
    lower = L[np.ix_(idx, np.arange(r))] if r else np.zeros((0, 0))
    return LdlFactor(order=p, lower=lower, diag=d[:r].copy(), rank=r,
                     kept_columns=tuple(kept))


def sym_eig(A) -> SymEig:
    """Eigenvalues (ascending) and orthonormal eigenvectors of symmetric ``A``."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("sym_eig expects a square matrix")
    if A.shape[0] == 0:
        return SymEig(0, np.zeros(0), np.zeros((0, 0)))
    if not np.all(np.isfinite(A)):
        raise FactorizationError("non-finite entries in symmetric eigenproblem")
    try:
        w, V = np.linalg.eigh(0.5 * (A + A.T))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise FactorizationError(str(exc)) from exc
    return SymEig(order=A.shape[0], eigenvalues=w, eigenvectors=V)


@dataclass(frozen=True)
class ThinQR:
    """Implicit thin QR ``V[:, kept] = Q R`` obtained from a Gram matrix.

    ``Q`` is never formed; use :meth:`apply_rinv` / :meth:`apply_rinv_t` to
    act with ``R^{-1}`` and ``R^{-T}``.
    """

    kept_columns: tuple[int, ...]
    r_factor: np.ndarray  # upper triangular, rank x rank

    @property
    def rank(self) -> int:
        return len(self.kept_columns)

    def apply_rinv(self, w):
        w = np.asarray(w, dtype=float)
        if self.rank == 0:
            return w.copy()
        return solve_triangular(self.r_factor, w, lower=False)

    def apply_rinv_t(self, w):
        w = np.asarray(w, dtype=float)
        if self.rank == 0:
            return w.copy()
        return solve_triangular(self.r_factor, w, trans="T", lower=False)


def thin_qr_from_gram(G, tol=DEPENDENCE_TOL) -> ThinQR:
    """Thin QR factor of a tall matrix given only its Gram matrix ``G``."""
    fac = ldl_with_pivot_threshold(G, tol)
    if fac.rank == 0:
        return ThinQR((), np.zeros((0, 0)))
    if np.any(fac.diag <= 0):
        raise FactorizationError("Gram matrix has a negative retained pivot")
    # L D L^T = R^T R  with  R = sqrt(D) L^T
    R = np.sqrt(fac.diag)[:, None] * fac.lower.T
    return ThinQR(fac.kept_columns, R)


def thin_qr_via_gram(V, tol=DEPENDENCE_TOL, refine: bool = True) -> ThinQR:
    """Thin QR of the columns of ``V`` (n x p, n >= p) through ``V^T V``.

    Dependent columns are discarded by the pivot test on ``V^T V``.  With
    ``refine`` a second Cholesky pass is run on ``V_kept R_1^{-1}`` and the
    factors are merged, ``R = R_2 R_1``; one pass alone loses orthogonality
    like ``eps * cond(V)^2``, two passes stay at rounding level for
    ``cond(V)`` up to about ``1e8``.
    """
    V = np.asarray(V, dtype=float)
    if V.ndim != 2:
        raise ValueError("thin_qr_via_gram expects a 2-D array")
    qr = thin_qr_from_gram(V.T @ V, tol)
    if not refine or qr.rank == 0:
        return qr
    Q1 = qr.apply_rinv_t(V[:, list(qr.kept_columns)].T).T
    try:
        R2 = np.linalg.cholesky(Q1.T @ Q1).T
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("second Cholesky pass failed") from exc
    return ThinQR(qr.kept_columns, R2 @ qr.r_factor)
