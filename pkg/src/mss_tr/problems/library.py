"""Native numpy versions of large-scale unconstrained SIF test problems.

Every builder takes the requested dimension ``n`` and rounds it up where
the problem structure demands (even ``n``, multiples of 3 or 4, square
grids).  Indices in comments are 1-based as in the SIF sources; the code
is 0-based.
"""
from __future__ import annotations

import math

import numpy as np

from .base import Problem, register


def _round_up(n: int, k: int) -> int:
    return max(k, -(-n // k) * k)


# ARWHEAD: sum_{i<n} (x_i^2 + x_n^2)^2 - 4 x_i + 3
@register("ARWHEAD")
def arwhead(n: int) -> Problem:
    def f(x):
        t = x[:-1] ** 2 + x[-1] ** 2
        return np.sum(t * t - 4.0 * x[:-1] + 3.0)

    def g(x):
        t = x[:-1] ** 2 + x[-1] ** 2
        out = np.empty_like(x)
        out[:-1] = 4.0 * t * x[:-1] - 4.0
        out[-1] = 4.0 * x[-1] * np.sum(t)
        return out

    return Problem("ARWHEAD", n, f, g, np.ones(n), known_fmin=0.0)


# BROYDN7D: sum |1 - x_{i-1} - 2 x_{i+1} + (3 - 2 x_i) x_i|^{7/3}
#           + sum_{i<=n/2} |x_i + x_{i+n/2}|^{7/3}
@register("BROYDN7D")
def broydn7d(n: int) -> Problem:
    n = _round_up(n, 2)
    h = n // 2
    p = 7.0 / 3.0

    def parts(x):
        xp = np.concatenate([[0.0], x, [0.0]])
        t = 1.0 - xp[:-2] - 2.0 * xp[2:] + (3.0 - 2.0 * x) * x
        u = x[:h] + x[h:]
        return t, u

    def f(x):
        t, u = parts(x)
        return np.sum(np.abs(t) ** p) + np.sum(np.abs(u) ** p)

    def g(x):
        t, u = parts(x)
        dt = p * np.sign(t) * np.abs(t) ** (p - 1.0)
        du = p * np.sign(u) * np.abs(u) ** (p - 1.0)
        out = dt * (3.0 - 4.0 * x)
        out[1:] -= dt[:-1] * 2.0
        out[:-1] -= dt[1:]
        out[:h] += du
        out[h:] += du
        return out

    return Problem("BROYDN7D", n, f, g, np.ones(n))


# COSINE: sum_{i<n} cos(x_i^2 - x_{i+1}/2)
@register("COSINE")
def cosine(n: int) -> Problem:
    def f(x):
        return np.sum(np.cos(x[:-1] ** 2 - 0.5 * x[1:]))

    def g(x):
        s = np.sin(x[:-1] ** 2 - 0.5 * x[1:])
        out = np.zeros_like(x)
        out[:-1] -= 2.0 * x[:-1] * s
        out[1:] += 0.5 * s
        return out

    return Problem("COSINE", n, f, g, np.ones(n))


# CRAGGLVY: n = 2m + 2, blocks (a, b, c, d) = x_{2i-1..2i+2}:
# (e^a - b)^4 + 100 (b - c)^6 + (tan(c - d) + c - d)^4 + a^8 + (d - 1)^2
@register("CRAGGLVY")
def cragglvy(n: int) -> Problem:
    m = max(1, -(-(n - 2) // 2))
    n = 2 * m + 2

    def blocks(x):
        return x[0:2 * m:2], x[1:2 * m:2], x[2:2 * m + 1:2], x[3:2 * m + 2:2]

    def f(x):
        a, b, c, d = blocks(x)
        r = np.tan(c - d) + c - d
        return np.sum((np.exp(a) - b) ** 4 + 100.0 * (b - c) ** 6 + r ** 4
                      + a ** 8 + (d - 1.0) ** 2)

    def g(x):
        a, b, c, d = blocks(x)
        ea = np.exp(a)
        p3 = 4.0 * (ea - b) ** 3
        q5 = 600.0 * (b - c) ** 5
        r3 = 4.0 * (np.tan(c - d) + c - d) ** 3
        dr = 1.0 / np.cos(c - d) ** 2 + 1.0
        out = np.zeros_like(x)
        out[0:2 * m:2] += p3 * ea + 8.0 * a ** 7
        out[1:2 * m:2] += q5 - p3
        out[2:2 * m + 1:2] += r3 * dr - q5
        out[3:2 * m + 2:2] += 2.0 * (d - 1.0) - r3 * dr
        return out

    x0 = np.full(n, 2.0)
    x0[0] = 1.0
    return Problem("CRAGGLVY", n, f, g, x0)


# CURLYk: q_i = x_i + ... + x_{min(i+k, n)};  sum q_i (q_i (q_i^2 - 20) - 0.1)
def _curly(k: int):
    name = f"CURLY{k}"

    @register(name)
    def build(n: int) -> Problem:
        ones = np.ones(k + 1)

        def q(x):
            return np.convolve(x, ones)[k:k + n]

        def f(x):
            qq = q(x)
            return np.sum(qq * (qq * (qq * qq - 20.0) - 0.1))

        def g(x):
            qq = q(x)
            h = 4.0 * qq ** 3 - 40.0 * qq - 0.1
            return np.convolve(h, ones)[:n]

        x0 = 1e-4 * np.arange(1, n + 1) / (n + 1)
        return Problem(name, n, f, g, x0)

    return build


for _k in (10, 20, 30):
    _curly(_k)


# DIXMAAN family, n = 3M, weights w_k(i) = (i/n)^{K_k}:
# 1 + sum alpha x_i^2 w1 + sum_{i<n} beta x_i^2 (x_{i+1} + x_{i+1}^2)^2 w2
#   + sum_{i<=2M} gamma x_i^2 x_{i+M}^4 w3 + sum_{i<=M} delta x_i x_{i+2M} w4
_DIXMAAN_COEF = {
    "A": (1.0, 0.0, 0.125, 0.125),
    "B": (1.0, 0.0625, 0.0625, 0.0625),
    "C": (1.0, 0.125, 0.125, 0.125),
    "D": (1.0, 0.26, 0.26, 0.26),
}
_DIXMAAN_POW = {"ABCD": (0, 0, 0, 0), "EFGH": (1, 0, 0, 1),
                "IJKL": (2, 0, 0, 2), "MNOP": (2, 1, 1, 2)}


def _dixmaan(letter: str):
    group = next(grp for grp in _DIXMAAN_POW if letter in grp)
    alpha, beta, gamma, delta = _DIXMAAN_COEF["ABCD"[group.index(letter)]]
    powers = _DIXMAAN_POW[group]
    name = f"DIXMAAN{letter}"

    @register(name)
    def build(n: int) -> Problem:
        n = _round_up(n, 3)
        M = n // 3
        r = np.arange(1, n + 1) / n
        w1, w2, w3, w4 = (r ** k for k in powers)
        w2, w3, w4 = w2[:n - 1], w3[:2 * M], w4[:M]

        def f(x):
            s = x[1:] + x[1:] ** 2
            return (1.0 + alpha * np.sum(x * x * w1)
                    + beta * np.sum(x[:-1] ** 2 * s * s * w2)
                    + gamma * np.sum(x[:2 * M] ** 2 * x[M:] ** 4 * w3)
                    + delta * np.sum(x[:M] * x[2 * M:] * w4))

        def g(x):
            s = x[1:] + x[1:] ** 2
            out = 2.0 * alpha * x * w1
            out[:-1] += 2.0 * beta * x[:-1] * s * s * w2
            out[1:] += 2.0 * beta * x[:-1] ** 2 * s * (1.0 + 2.0 * x[1:]) * w2
            out[:2 * M] += 2.0 * gamma * x[:2 * M] * x[M:] ** 4 * w3
            out[M:] += 4.0 * gamma * x[:2 * M] ** 2 * x[M:] ** 3 * w3
            out[:M] += delta * x[2 * M:] * w4
            out[2 * M:] += delta * x[:M] * w4
            return out

        return Problem(name, n, f, g, np.full(n, 2.0), known_fmin=1.0)

    return build


for _letter in "ABCDEFGHIJKLMNOP":
    _dixmaan(_letter)


def _shifted_quartic(name: str):
    # sum (x_i - i)^4
    @register(name)
    def build(n: int) -> Problem:
        c = np.arange(1, n + 1, dtype=float)

        def f(x):
            return np.sum((x - c) ** 4)

        def g(x):
            return 4.0 * (x - c) ** 3

        return Problem(name, n, f, g, np.full(n, 2.0), known_fmin=0.0)

    return build


_shifted_quartic("DQRTIC")
_shifted_quartic("QUARTC")


# EDENSCH: 16 + sum_{i<n} (x_i - 2)^4 + (x_i x_{i+1} - 2 x_{i+1})^2 + (x_{i+1} + 1)^2
@register("EDENSCH")
def edensch(n: int) -> Problem:
    def f(x):
        a, b = x[:-1], x[1:]
        return 16.0 + np.sum((a - 2.0) ** 4 + (a * b - 2.0 * b) ** 2 + (b + 1.0) ** 2)

    def g(x):
        a, b = x[:-1], x[1:]
        t = 2.0 * (a * b - 2.0 * b)
        out = np.zeros_like(x)
        out[:-1] += 4.0 * (a - 2.0) ** 3 + t * b
        out[1:] += t * (a - 2.0) + 2.0 * (b + 1.0)
        return out

    return Problem("EDENSCH", n, f, g, np.zeros(n))


# EG2: sum_{i<n} sin(x_1 + x_i^2 - 1) + sin(x_n^2) / 2
@register("EG2")
def eg2(n: int) -> Problem:
    def f(x):
        return np.sum(np.sin(x[0] + x[:-1] ** 2 - 1.0)) + 0.5 * np.sin(x[-1] ** 2)

    def g(x):
        c = np.cos(x[0] + x[:-1] ** 2 - 1.0)
        out = np.zeros_like(x)
        out[:-1] = 2.0 * x[:-1] * c
        out[0] += np.sum(c)
        out[-1] += x[-1] * np.cos(x[-1] ** 2)
        return out

    return Problem("EG2", n, f, g, np.zeros(n))


# ENGVAL1: sum_{i<n} (x_i^2 + x_{i+1}^2)^2 - 4 x_i + 3
@register("ENGVAL1")
def engval1(n: int) -> Problem:
    def f(x):
        t = x[:-1] ** 2 + x[1:] ** 2
        return np.sum(t * t - 4.0 * x[:-1] + 3.0)

    def g(x):
        t = 4.0 * (x[:-1] ** 2 + x[1:] ** 2)
        out = np.zeros_like(x)
        out[:-1] += t * x[:-1] - 4.0
        out[1:] += t * x[1:]
        return out

    return Problem("ENGVAL1", n, f, g, np.full(n, 2.0))


# FLETCHCR: 100 sum_{i<n} (x_{i+1} - x_i + 1 - x_i^2)^2
@register("FLETCHCR")
def fletchcr(n: int) -> Problem:
    def f(x):
        t = x[1:] - x[:-1] + 1.0 - x[:-1] ** 2
        return 100.0 * np.sum(t * t)

    def g(x):
        t = 200.0 * (x[1:] - x[:-1] + 1.0 - x[:-1] ** 2)
        out = np.zeros_like(x)
        out[:-1] -= t * (1.0 + 2.0 * x[:-1])
        out[1:] += t
        return out

    return Problem("FLETCHCR", n, f, g, np.zeros(n), known_fmin=0.0)


# FMINSURF / FMINSRF2: minimal surface on a p x p grid, n = p^2,
# sum_{cells} sqrt(1 + (p-1)^2/2 (a^2 + b^2)) / (p-1)^2 plus a penalty
def _surface(name: str, penalty: str):
    @register(name)
    def build(n: int) -> Problem:
        p = max(3, math.isqrt(n - 1) + 1)
        n = p * p
        scale = (p - 1) ** 2
        c = 0.5 * (p - 1) ** 2
        mid = p // 2 - 1

        def cells(X):
            a = X[:-1, :-1] - X[1:, 1:]
            b = X[1:, :-1] - X[:-1, 1:]
            return a, b, np.sqrt(c * (a * a + b * b) + 1.0)

        def f(x):
            X = x.reshape(p, p)
            _, _, r = cells(X)
            val = np.sum(r) / scale
            if penalty == "sum":
                val += np.sum(x) ** 2 / p ** 4
            else:
                val += X[mid, mid] ** 2 / p ** 2
            return val

        def g(x):
            X = x.reshape(p, p)
            a, b, r = cells(X)
            da = c * a / r / scale
            db = c * b / r / scale
            G = np.zeros((p, p))
            G[:-1, :-1] += da
            G[1:, 1:] -= da
            G[1:, :-1] += db
            G[:-1, 1:] -= db
            if penalty == "sum":
                G += 2.0 * np.sum(x) / p ** 4
            else:
                G[mid, mid] += 2.0 * X[mid, mid] / p ** 2
            return G.ravel()

        h00, slopej, slopei = 1.0, 4.0, 8.0
        ston, wtoe = slopei / (p - 1), slopej / (p - 1)
        h01, h10 = h00 + slopej, h00 + slopei
        X0 = np.zeros((p, p))
        j = np.arange(p)
        i = np.arange(1, p - 1)
        X0[0, :] = j * wtoe + h00
        X0[-1, :] = j * wtoe + h10
        X0[1:-1, 0] = i * ston + h00
        X0[1:-1, -1] = i * ston + h01
        return Problem(name, n, f, g, X0.ravel())

    return build


_surface("FMINSURF", "sum")
_surface("FMINSRF2", "mid")


# GENHUMPS: sum_{i<n} sin(2 x_i)^2 sin(2 x_{i+1})^2 + 0.05 (x_i^2 + x_{i+1}^2)
@register("GENHUMPS")
def genhumps(n: int) -> Problem:
    z = 2.0

    def f(x):
        s2 = np.sin(z * x) ** 2
        return np.sum(s2[:-1] * s2[1:] + 0.05 * (x[:-1] ** 2 + x[1:] ** 2))

    def g(x):
        s2 = np.sin(z * x) ** 2
        ds2 = z * np.sin(2.0 * z * x)
        out = np.zeros_like(x)
        out[:-1] += ds2[:-1] * s2[1:] + 0.1 * x[:-1]
        out[1:] += s2[:-1] * ds2[1:] + 0.1 * x[1:]
        return out

    x0 = np.full(n, 506.2)
    x0[0] = -506.0
    return Problem("GENHUMPS", n, f, g, x0, known_fmin=0.0)


def _mod_index(n: int, mult: int) -> np.ndarray:
    i = np.arange(1, n + 1)
    return np.mod(mult * i - 1, n)


# NONCVXUN: sum_i v_i^2 + 4 cos(v_i), v_i = x_i + x_j + x_k,
# j = mod(2i - 1, n) + 1, k = mod(3i - 1, n) + 1
@register("NONCVXUN")
def noncvxun(n: int) -> Problem:
    idx = (np.arange(n), _mod_index(n, 2), _mod_index(n, 3))

    def v(x):
        return x[idx[0]] + x[idx[1]] + x[idx[2]]

    def f(x):
        vv = v(x)
        return np.sum(vv * vv + 4.0 * np.cos(vv))

    def g(x):
        vv = v(x)
        h = 2.0 * vv - 4.0 * np.sin(vv)
        out = np.zeros_like(x)
        for j in idx:
            np.add.at(out, j, h)
        return out

    return Problem("NONCVXUN", n, f, g, np.arange(1, n + 1, dtype=float))


# NONDQUAR: (x_1 - x_2)^2 + sum_{i<=n-2} (x_i + x_{i+1} + x_n)^4 + (x_{n-1} + x_n)^2
@register("NONDQUAR")
def nondquar(n: int) -> Problem:
    def f(x):
        t = x[:-2] + x[1:-1] + x[-1]
        return (x[0] - x[1]) ** 2 + np.sum(t ** 4) + (x[-2] + x[-1]) ** 2

    def g(x):
        t3 = 4.0 * (x[:-2] + x[1:-1] + x[-1]) ** 3
        out = np.zeros_like(x)
        out[:-2] += t3
        out[1:-1] += t3
        out[-1] += np.sum(t3)
        d = 2.0 * (x[0] - x[1])
        out[0] += d
        out[1] -= d
        e = 2.0 * (x[-2] + x[-1])
        out[-2] += e
        out[-1] += e
        return out

    x0 = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return Problem("NONDQUAR", n, f, g, x0, known_fmin=0.0)


# POWELLSG: blocks (a, b, c, d):
# (a + 10 b)^2 + 5 (c - d)^2 + (b - 2 c)^4 + 10 (a - d)^4
@register("POWELLSG")
def powellsg(n: int) -> Problem:
    n = _round_up(n, 4)

    def f(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        return np.sum((a + 10.0 * b) ** 2 + 5.0 * (c - d) ** 2
                      + (b - 2.0 * c) ** 4 + 10.0 * (a - d) ** 4)

    def g(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        t1 = 2.0 * (a + 10.0 * b)
        t2 = 10.0 * (c - d)
        t3 = 4.0 * (b - 2.0 * c) ** 3
        t4 = 40.0 * (a - d) ** 3
        out = np.empty_like(x)
        out[0::4] = t1 + t4
        out[1::4] = 10.0 * t1 + t3
        out[2::4] = t2 - 2.0 * t3
        out[3::4] = -t2 - t4
        return out

    x0 = np.tile([3.0, -1.0, 0.0, 1.0], n // 4)
    return Problem("POWELLSG", n, f, g, x0, known_fmin=0.0)


# POWER: (sum_i i x_i^2)^2
@register("POWER")
def power(n: int) -> Problem:
    w = np.arange(1, n + 1, dtype=float)

    def f(x):
        return np.sum(w * x * x) ** 2

    def g(x):
        return 4.0 * np.sum(w * x * x) * w * x

    return Problem("POWER", n, f, g, np.ones(n), known_fmin=0.0)


# SCHMVETT: -sum_{i<=n-2} 1/(1 + (x_i - x_{i+1})^2) + sin((pi x_{i+1} + x_{i+2})/2)
#           + exp(-((x_i + x_{i+2})/x_{i+1} - 2)^2)
@register("SCHMVETT")
def schmvett(n: int) -> Problem:
    def f(x):
        a, b, c = x[:-2], x[1:-1], x[2:]
        return -np.sum(1.0 / (1.0 + (a - b) ** 2) + np.sin(0.5 * (np.pi * b + c))
                       + np.exp(-(((a + c) / b) - 2.0) ** 2))

    def g(x):
        a, b, c = x[:-2], x[1:-1], x[2:]
        d = a - b
        t1 = 2.0 * d / (1.0 + d * d) ** 2
        t2 = -0.5 * np.cos(0.5 * (np.pi * b + c))
        u = (a + c) / b - 2.0
        t3 = 2.0 * u * np.exp(-u * u)
        out = np.zeros_like(x)
        out[:-2] += t1 + t3 / b
        out[1:-1] += -t1 + np.pi * t2 - t3 * (a + c) / b ** 2
        out[2:] += t2 + t3 / b
        return out

    return Problem("SCHMVETT", n, f, g, np.full(n, 3.0))


# SINQUAD: (x_1 - 1)^4 + sum_{1<i<n} (sin(x_i - x_n) - x_1^2 + x_i^2)^2 + (x_n^2 - x_1^2)^2
@register("SINQUAD")
def sinquad(n: int) -> Problem:
    def f(x):
        xi = x[1:-1]
        r = np.sin(xi - x[-1]) - x[0] ** 2 + xi ** 2
        return (x[0] - 1.0) ** 4 + np.sum(r * r) + (x[-1] ** 2 - x[0] ** 2) ** 2

    def g(x):
        xi = x[1:-1]
        cz = np.cos(xi - x[-1])
        r2 = 2.0 * (np.sin(xi - x[-1]) - x[0] ** 2 + xi ** 2)
        u2 = 2.0 * (x[-1] ** 2 - x[0] ** 2)
        out = np.zeros_like(x)
        out[1:-1] = r2 * (cz + 2.0 * xi)
        out[0] = 4.0 * (x[0] - 1.0) ** 3 - 2.0 * x[0] * (np.sum(r2) + u2)
        out[-1] += -np.sum(r2 * cz) + 2.0 * x[-1] * u2
        return out

    return Problem("SINQUAD", n, f, g, np.full(n, 0.1))


_SPARSE_MULT = (1, 2, 3, 5, 7, 11)


def _sparse_idx(n: int):
    return [np.arange(n)] + [_mod_index(n, k) for k in _SPARSE_MULT[1:]]


# SPARSINE: sum_i (i/2) (sin x_i + sin x_j + ... + sin x_p)^2
@register("SPARSINE")
def sparsine(n: int) -> Problem:
    idx = _sparse_idx(n)
    w = 0.5 * np.arange(1, n + 1)

    def v(x):
        s = np.sin(x)
        return sum(s[j] for j in idx)

    def f(x):
        vv = v(x)
        return np.sum(w * vv * vv)

    def g(x):
        h = 2.0 * w * v(x)
        acc = np.zeros_like(x)
        for j in idx:
            np.add.at(acc, j, h)
        return acc * np.cos(x)

    return Problem("SPARSINE", n, f, g, np.full(n, 0.5), known_fmin=0.0)


# SPARSQUR: sum_i (i/2) (x_i^2 + x_j^2 + ... + x_p^2)^2
@register("SPARSQUR")
def sparsqur(n: int) -> Problem:
    idx = _sparse_idx(n)
    w = 0.5 * np.arange(1, n + 1)

    def v(x):
        s = x * x
        return sum(s[j] for j in idx)

    def f(x):
        vv = v(x)
        return np.sum(w * vv * vv)

    def g(x):
        h = 2.0 * w * v(x)
        acc = np.zeros_like(x)
        for j in idx:
            np.add.at(acc, j, h)
        return acc * 2.0 * x

    return Problem("SPARSQUR", n, f, g, np.full(n, 0.5), known_fmin=0.0)


# TOINTGSS: sum_{i<=n-2} (10/(n+2) + x_{i+2}^2) (2 - exp(-(x_i - x_{i+1})^2 / (0.1 + x_{i+2}^2)))
@register("TOINTGSS")
def tointgss(n: int) -> Problem:
    c0 = 10.0 / (n + 2)

    def f(x):
        a = x[:-2] - x[1:-1]
        c2 = x[2:] ** 2
        return np.sum((c0 + c2) * (2.0 - np.exp(-a * a / (0.1 + c2))))

    def g(x):
        a = x[:-2] - x[1:-1]
        c = x[2:]
        c2 = c * c
        den = 0.1 + c2
        w = c0 + c2
        E = np.exp(-a * a / den)
        da = w * E * 2.0 * a / den
        dc = 2.0 * c * (2.0 - E) - w * E * a * a * 2.0 * c / den ** 2
        out = np.zeros_like(x)
        out[:-2] += da
        out[1:-1] -= da
        out[2:] += dc
        return out

    return Problem("TOINTGSS", n, f, g, np.full(n, 3.0))
