"""Limited-memory Hessian approximations and their implicit spectral factors.

Pairs are kept newest first, ``S = [s_{k-1}, s_{k-2}, ..., s_{k-l}]`` and
likewise for ``Y``.  With that ordering the multipoint symmetric secant (MSS)
matrix satisfies ``S^T B S = tril(S^T Y) + tril(S^T Y, -1)^T`` (each entry
pairs an older step with a newer gradient difference), and its compact form
is

    B = B0 + [S Y] M [S Y]^T,
    M = [[-zeta W - W (T + E + T^T) W, W], [W, 0]],   W = (S^T S)^{-1},

with ``T`` the strict upper triangle and ``E`` the diagonal of ``S^T Y``.
The dense initialization ``B0 = zeta P_par P_par^T + zeta_perp P_perp P_perp^T``
acts as ``zeta`` on ``range([S Y])`` and as ``zeta_perp`` elsewhere.

Eigenvalue ordering: ``lambda_hat`` is stored ascending, so the smallest
eigenvalue of the small core (written with the largest index in much of the
literature) is ``lambda_hat[0]`` here.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .smallmat import (
    FactorizationError,
    ldl_with_pivot_threshold,
    sym_eig,
    thin_qr_via_gram,
)

CURVATURE_TOL = 1e-12
PAIR_TOL = 1e-8
FACTOR_TOL = 1e-8
SR1_SKIP_TOL = 1e-8
FALLBACK_SCALE = 1.0

Representation = Literal["standard", "gram_free"]


class PairBuffer:
    """Ring buffer of the most recent ``memory`` quasi-Newton pairs.

    Besides the pairs themselves the buffer keeps the curvature scalars
    ``y^T y``, ``y^T s`` of the last ``history`` stored pairs, since the
    initialization window ``q`` may exceed the memory ``m``.
    """

    def __init__(self, dim: int, memory: int, history: Optional[int] = None):
        if dim < 1 or memory < 1:
            raise ValueError("dim and memory must be positive")
        self.dim = int(dim)
        self.memory = int(memory)
        self.history = max(self.memory, int(history or self.memory))
        self._s: list[np.ndarray] = []
        self._y: list[np.ndarray] = []
        self._curv: deque = deque(maxlen=self.history)
        self._cache: Optional[tuple[np.ndarray, np.ndarray]] = None

    def __len__(self) -> int:
        return len(self._s)

    @property
    def size(self) -> int:
        return len(self._s)

    @property
    def pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Stored pairs, newest first."""
        return list(zip(self._s, self._y))

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """``(S, Y)`` as ``dim x l`` arrays, newest column first."""
        if self._cache is None:
            if self._s:
                S = np.column_stack(self._s)
                Y = np.column_stack(self._y)
            else:
                S = np.zeros((self.dim, 0))
                Y = np.zeros((self.dim, 0))
            self._cache = (S, Y)
        return self._cache

    def curvatures(self) -> list[tuple[float, float, float]]:
        """``(y^T y, y^T s, |y| |s|)`` of recently stored pairs, newest first."""
        return list(reversed(self._curv))

    def update(self, s, y, tol: float = PAIR_TOL, evict: bool = False) -> bool:
        """Store ``(s, y)`` unless ``s`` is numerically dependent.

        The candidate block ``[s, s_{k-1}, ..., s_{k-m+1}]`` is run through
        the pivoted LDL^T of its Gram matrix.  Any dropped column means the
        new step lies (numerically) in the span of the retained ones, and the
        update is skipped.  With ``evict`` the oldest stored pairs are
        discarded instead until the new step is independent of the rest.
        Returns whether the pair was stored.
        """
        s = np.array(s, dtype=float).ravel()
        y = np.array(y, dtype=float).ravel()
        if s.shape != (self.dim,) or y.shape != (self.dim,):
            raise ValueError("pair vectors must have length dim")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(y))):
            return False
        snorm = np.linalg.norm(s)
        if snorm == 0.0:
            return False
        keep = min(len(self._s), self.memory - 1)
        while keep > 0:
            C = np.column_stack([s] + self._s[:keep])
            if ldl_with_pivot_threshold(C.T @ C, tol).rank == keep + 1:
                break
            if not evict:
                return False
            keep -= 1
        self._s = [s] + self._s[:keep]
        self._y = [y] + self._y[:keep]
        self._curv.append((float(y @ y), float(y @ s),
                           float(np.linalg.norm(y) * snorm)))
        self._cache = None
        return True

    def clear(self) -> None:
        """Drop all pairs; the curvature history is kept."""
        self._s, self._y = [], []
        self._cache = None


def update_pairs(buf: PairBuffer, s, y, tol: float = PAIR_TOL) -> PairBuffer:
    buf.update(s, y, tol)
    return buf


@dataclass(frozen=True)
class Initialization:
    kind: Literal["scalar", "dense"]
    zeta: float
    zeta_perp: float
    history: int = 1

    def __post_init__(self):
        if self.kind not in ("scalar", "dense"):
            raise ValueError(f"unknown initialization kind {self.kind!r}")
        if not (np.isfinite(self.zeta) and np.isfinite(self.zeta_perp)):
            raise ValueError("initialization parameters must be finite")
        if self.kind == "scalar" and self.zeta_perp != self.zeta:
            raise ValueError("scalar initialization requires zeta_perp == zeta")

    @classmethod
    def scalar(cls, gamma: float, history: int = 1) -> "Initialization":
        return cls("scalar", float(gamma), float(gamma), history)


def _ratio(yy, ys, scale):
    if ys > CURVATURE_TOL * scale:
        return yy / ys
    return None


def scalar_init(buf: PairBuffer, q: int) -> float:
    """Largest ``y^T y / y^T s`` over the ``q`` newest pairs with positive curvature."""
    ratios = [_ratio(*c) for c in buf.curvatures()[: max(int(q), 1)]]
    ratios = [r for r in ratios if r is not None]
    return max(ratios) if ratios else FALLBACK_SCALE


def dense_init(buf: PairBuffer, q: int) -> Initialization:
    zeta = scalar_init(buf, q)
    curv = buf.curvatures()
    newest = _ratio(*curv[0]) if curv else None
    return Initialization("dense", zeta, zeta if newest is None else newest, int(q))


def _split_sty(C):
    upper = np.triu(C, 1)
    diag = np.diag(np.diag(C))
    return upper, diag


@dataclass(frozen=True)
class MssCompact:
    """Compact MSS matrix ``B = B0 + Psi M Psi^T``.

    ``Psi = [S Y] @ transform``; the transform is the identity in the
    standard representation and ``blkdiag(W, I)`` in the Gram-free one,
    where ``Psi = [S W, Y]`` so that ``Psi^T p = [W S^T p; Y^T p]``.
    """

    S: np.ndarray
    Y: np.ndarray
    gram_S: np.ndarray
    upper_T: np.ndarray
    diag_E: np.ndarray
    core: np.ndarray
    transform: np.ndarray
    zeta: float
    zeta_perp: float
    representation: Representation = "standard"

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    @property
    def base(self) -> np.ndarray:
        return np.hstack([self.S, self.Y])

    @property
    def psi_columns(self) -> np.ndarray:
        """Explicit ``Psi`` (``n x 2l``)."""
        return self.base @ self.transform

    def psi_apply(self, w):
        return self.base @ (self.transform @ w)

    def psi_apply_t(self, x):
        return self.transform.T @ (self.base.T @ x)

    def _range_projection(self, v):
        Psi = self.psi_columns
        coef, *_ = np.linalg.lstsq(Psi, v, rcond=None)
        return Psi @ coef

    def apply_b0(self, v):
        """Initial matrix times ``v``; ``zeta`` on ``range(Psi)``, ``zeta_perp`` off it."""
        v = np.asarray(v, dtype=float)
        out = self.zeta * v
        if self.zeta_perp != self.zeta:
            out = out + (self.zeta_perp - self.zeta) * (v - self._range_projection(v))
        return out

    def matvec(self, v):
        """``B v`` straight from the compact form.

        With a dense initialization the complement correction needs the
        orthogonal projector onto ``range(Psi)``; it is computed here by
        least squares, independently of :func:`factorize`.
        """
        v = np.asarray(v, dtype=float)
        out = self.zeta * v + self.psi_apply(self.core @ self.psi_apply_t(v))
        if self.zeta_perp != self.zeta:
            out = out + (self.zeta_perp - self.zeta) * (v - self._range_projection(v))
        return out

    def dense(self) -> np.ndarray:
        return np.column_stack([self.matvec(e) for e in np.eye(self.dim)])


def build_mss(buf: PairBuffer, init: Initialization,
              representation: Representation = "standard") -> MssCompact:
    """Compact MSS matrix of the stored pairs.

    Raises
    ------
    FactorizationError
        If ``S^T S`` is numerically singular.
    """
    if buf.size == 0:
        raise ValueError("build_mss needs at least one stored pair")
    S, Y = buf.matrices()
    l = S.shape[1]
    A = S.T @ S
    C = S.T @ Y
    T, E = _split_sty(C)
    if ldl_with_pivot_threshold(A, PAIR_TOL * 1e-2).rank < l:
        raise FactorizationError("S^T S is numerically singular")
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("S^T S is not positive definite") from exc
    zeta = init.zeta
    sym_part = T + E + T.T
    I, Z = np.eye(l), np.zeros((l, l))
    if representation == "standard":
        Linv = np.linalg.solve(L, I)
        W = Linv.T @ Linv
        W = 0.5 * (W + W.T)
        top = -zeta * W - W @ sym_part @ W
        core = np.block([[0.5 * (top + top.T), W], [W, Z]])
        transform = np.eye(2 * l)
    elif representation == "gram_free":
        Linv = np.linalg.solve(L, I)
        W = Linv.T @ Linv
        core = np.block([[-zeta * A - sym_part, I], [I, Z]])
        transform = np.block([[W, Z], [Z, I]])
    else:
        raise ValueError(f"unknown representation {representation!r}")
    return MssCompact(S=S, Y=Y, gram_S=A, upper_T=T, diag_E=np.diag(E).copy(),
                      core=core, transform=transform, zeta=zeta,
                      zeta_perp=init.zeta_perp, representation=representation)


@dataclass(frozen=True)
class Sr1Compact:
    """Compact L-SR1 matrix ``B = gamma I + Psi Mid^{-1} Psi^T``, ``Psi = Y - gamma S``."""

    S: np.ndarray
    Y: np.ndarray
    psi: np.ndarray
    middle: np.ndarray
    core: np.ndarray
    gamma: float

    @property
    def dim(self) -> int:
        return self.S.shape[0]

    @property
    def zeta(self) -> float:
        return self.gamma

    @property
    def zeta_perp(self) -> float:
        return self.gamma

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        return self.gamma * v + self.psi @ (self.core @ (self.psi.T @ v))

    def dense(self) -> np.ndarray:
        return self.gamma * np.eye(self.dim) + self.psi @ self.core @ self.psi.T

    def accepts(self, s, y, tol: float = SR1_SKIP_TOL) -> bool:
        """SR1 safeguard ``|s^T (y - B s)| >= tol |s| |y - B s|``."""
        r = y - self.matvec(s)
        return abs(s @ r) >= tol * np.linalg.norm(s) * np.linalg.norm(r) and np.any(r)


def build_sr1(buf: PairBuffer, gamma: float) -> Sr1Compact:
    if buf.size == 0:
        raise ValueError("build_sr1 needs at least one stored pair")
    S, Y = buf.matrices()
    C = S.T @ Y
    T, E = _split_sty(C)
    # newest-first ordering: the strict upper triangle pairs newer s with older y
    middle = E + T + T.T - gamma * (S.T @ S)
    middle = 0.5 * (middle + middle.T)
    if np.linalg.cond(middle) > 1e12:
        raise FactorizationError("SR1 middle matrix is numerically singular")
    core = np.linalg.inv(middle)
    return Sr1Compact(S=S, Y=Y, psi=Y - gamma * S, middle=middle,
                      core=0.5 * (core + core.T), gamma=float(gamma))


def identity_sr1_accepts(gamma, s, y, tol: float = SR1_SKIP_TOL) -> bool:
    """SR1 safeguard against ``B = gamma I`` (empty buffer)."""
    r = y - gamma * s
    return abs(s @ r) >= tol * np.linalg.norm(s) * np.linalg.norm(r) and np.any(r)


def mss_recursion_oracle(pairs: Sequence[tuple[np.ndarray, np.ndarray]], B0):
    """Dense MSS matrix from the rank-two recursion (test oracle).

    ``pairs`` are in chronological order, oldest first.  Each ``c_k`` is
    ``s_k`` with its components along the earlier steps removed, which
    satisfies ``c_k^T s_i = 0`` for ``i < k`` and ``c_k^T s_k = |c_k|^2``.
    """
    B = np.array(B0, dtype=float)
    prev: list[np.ndarray] = []
    for s, y in pairs:
        s = np.asarray(s, dtype=float)
        y = np.asarray(y, dtype=float)
        if prev:
            Q, _ = np.linalg.qr(np.column_stack(prev))
            c = s - Q @ (Q.T @ s)
            c = c - Q @ (Q.T @ c)
        else:
            c = s.copy()
        sc = s @ c
        if abs(sc) <= 1e-12 * (s @ s):
            raise ValueError("step is dependent on the earlier steps")
        r = y - B @ s
        B = B + (np.outer(r, c) + np.outer(c, r)) / sc - (r @ s) * np.outer(c, c) / sc**2
        prev.append(s)
    return B


@dataclass(frozen=True)
class SpectralFactors:
    """Implicit partial eigendecomposition ``B = P_par Lam P_par^T + zeta_perp P_perp P_perp^T``.

    ``P_par = base @ coef``: ``base`` is the tall ``n x p`` matrix whose
    columns span the model correction and ``coef`` is small.  In terms of
    the retained columns, ``P_par = Psi[:, kept] @ basis_map`` with
    ``basis_map = R^{-1} U``.
    """

    base: np.ndarray
    coef: np.ndarray
    basis_map: np.ndarray
    kept_columns: tuple[int, ...]
    lambda_hat: np.ndarray
    zeta: float
    zeta_perp: float

    @property
    def dim(self) -> int:
        return self.base.shape[0]

    @property
    def rank(self) -> int:
        return self.coef.shape[1]

    @property
    def lambdas(self) -> np.ndarray:
        """Eigenvalues of ``B`` on ``range(P_par)``, ascending."""
        return self.lambda_hat + self.zeta

    @classmethod
    def identity(cls, dim: int, gamma: float = 1.0,
                 zeta_perp: Optional[float] = None) -> "SpectralFactors":
        """Factors of ``B = gamma I`` with an empty parallel block."""
        return cls(base=np.zeros((dim, 0)), coef=np.zeros((0, 0)),
                   basis_map=np.zeros((0, 0)), kept_columns=(),
                   lambda_hat=np.zeros(0), zeta=float(gamma),
                   zeta_perp=float(gamma if zeta_perp is None else zeta_perp))

    @classmethod
    def from_basis(cls, P_par, lambdas, zeta_perp: float) -> "SpectralFactors":
        """Factors from an explicit orthonormal ``P_par`` and its eigenvalues."""
        P_par = np.asarray(P_par, dtype=float)
        lam = np.asarray(lambdas, dtype=float)
        order = np.argsort(lam, kind="stable")
        r = P_par.shape[1]
        perm = np.eye(r)[:, order]
        return cls(base=P_par, coef=perm, basis_map=perm,
                   kept_columns=tuple(range(r)), lambda_hat=lam[order],
                   zeta=0.0, zeta_perp=float(zeta_perp))

    def apply_p_parallel(self, v):
        return self.base @ (self.coef @ v)

    def apply_p_parallel_t(self, x):
        return self.coef.T @ (self.base.T @ x)

    def p_parallel(self) -> np.ndarray:
        """Explicit ``P_par`` (``n x rank``)."""
        return self.base @ self.coef

    def matvec(self, v):
        """``B v`` from the spectral factors."""
        v = np.asarray(v, dtype=float)
        if self.rank == 0:
            return self.zeta_perp * v
        w = self.apply_p_parallel_t(v)
        return (self.apply_p_parallel((self.lambdas - self.zeta_perp) * w)
                + self.zeta_perp * v)


def apply_p_parallel(f: SpectralFactors, v):
    return f.apply_p_parallel(v)


def apply_p_parallel_t(f: SpectralFactors, x):
    return f.apply_p_parallel_t(x)


def factorize(model, init: Optional[Initialization] = None,
              tol: float = FACTOR_TOL) -> SpectralFactors:
    """Implicit spectral factors of an MSS or SR1 compact model.

    The Gram matrix of ``Psi`` is factored with the pivoted LDL^T, dependent
    columns are dropped and ``R`` comes from the retained block (with one
    refinement pass, see :func:`thin_qr_via_gram`).  Writing
    ``Psi = Q R_full`` with ``R_full = Q^T Psi``, the small matrix
    ``R_full M R_full^T = U Lam_hat U^T`` is diagonalized and
    ``P_par = Psi[:, kept] R^{-1} U``.  An empty retained set yields factors
    of ``zeta_perp I``.

    ``init`` overrides the model's own ``zeta_perp`` when given.
    """
    if isinstance(model, MssCompact):
        base, K, M = model.base, model.transform, model.core
    elif isinstance(model, Sr1Compact):
        base, K, M = model.psi, np.eye(model.psi.shape[1]), model.core
    else:
        raise TypeError(f"cannot factorize {type(model).__name__}")
    zeta = model.zeta
    zeta_perp = model.zeta_perp if init is None else init.zeta_perp

    psi = base @ K
    qr = thin_qr_via_gram(psi, tol)
    n = base.shape[0]
    if qr.rank == 0:
        return SpectralFactors.identity(n, zeta_perp, zeta_perp)
    kept = np.array(qr.kept_columns)
    Q = qr.apply_rinv_t(psi[:, kept].T).T
    R_full = Q.T @ psi
    core = R_full @ M @ R_full.T
    eig = sym_eig(0.5 * (core + core.T))
    basis_map = qr.apply_rinv(eig.eigenvectors)
    coef = K[:, kept] @ basis_map
    if not np.all(np.isfinite(coef)):
        raise FactorizationError("non-finite spectral basis")
    return SpectralFactors(base=base, coef=coef, basis_map=basis_map,
                           kept_columns=tuple(int(i) for i in kept),
                           lambda_hat=eig.eigenvalues, zeta=zeta,
                           zeta_perp=zeta_perp)
