import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import buffer_from, random_init, random_pairs
from mss_tr.qn_models import (
    Initialization,
    PairBuffer,
    SpectralFactors,
    apply_p_parallel,
    apply_p_parallel_t,
    build_mss,
    build_sr1,
    dense_init,
    factorize,
    mss_recursion_oracle,
    scalar_init,
    update_pairs,
)
from mss_tr.smallmat import FactorizationError, ldl_with_pivot_threshold

e = np.eye


def sym(C):
    return np.tril(C) + np.tril(C, -1).T


# ---- pair buffer -----------------------------------------------------------

def test_first_pair_is_stored():
    buf = update_pairs(PairBuffer(4, 3), np.ones(4), np.arange(4.0))
    assert buf.size == 1


def test_dependent_step_is_skipped():
    buf = PairBuffer(3, 3)
    buf.update(e(3)[0], e(3)[1])
    S_before = buf.matrices()[0].copy()
    update_pairs(buf, 2 * e(3)[0], e(3)[2])
    assert buf.size == 1
    np.testing.assert_array_equal(buf.matrices()[0], S_before)


def test_ring_evicts_oldest():
    buf = PairBuffer(5, 3)
    for i in range(4):
        buf.update(e(5)[i], (i + 1) * e(5)[i])
    S, Y = buf.matrices()
    assert buf.size == 3
    np.testing.assert_array_equal(S, e(5)[:, [3, 2, 1]])
    np.testing.assert_array_equal(Y[:, 0], 4 * e(5)[3])


def test_evict_mode_makes_room_for_dependent_step():
    buf = PairBuffer(4, 3)
    for i in range(3):
        buf.update(e(4)[i], e(4)[i])
    s = e(4)[1] + e(4)[2]
    assert not PairBuffer.update(_copy(buf), s, np.ones(4))
    assert buf.update(s, np.ones(4), evict=True)
    S, _ = buf.matrices()
    # e2 is kept; dropping e1 is enough to restore independence
    np.testing.assert_array_equal(S, np.column_stack([s, e(4)[2]]))


def _copy(buf):
    out = PairBuffer(buf.dim, buf.memory)
    for s, y in reversed(buf.pairs):
        out.update(s, y)
    return out


def test_zero_or_nonfinite_step_is_rejected():
    buf = PairBuffer(2, 2)
    assert not buf.update(np.zeros(2), np.ones(2))
    assert not buf.update(np.array([np.nan, 1.0]), np.ones(2))
    assert buf.size == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 5))
def test_stored_block_always_passes_pivot_test(seed, m):
    rng = np.random.default_rng(seed)
    n = 6
    buf = PairBuffer(n, m)
    for _ in range(12):
        s = rng.standard_normal(n)
        if buf.size and rng.random() < 0.4:
            S, _ = buf.matrices()
            s = S @ rng.standard_normal(S.shape[1])  # dependent candidate
        buf.update(s, rng.standard_normal(n), evict=bool(rng.random() < 0.5))
        S, _ = buf.matrices()
        assert ldl_with_pivot_threshold(S.T @ S, 1e-8).rank == buf.size <= m


# ---- initializations -------------------------------------------------------

def _buffer_with_ratios(ratios, n=6):
    buf = PairBuffer(n, len(ratios), len(ratios))
    for i, r in enumerate(ratios):
        buf.update(e(n)[i], r * e(n)[i])
    return buf


def test_scalar_init_single_pair():
    assert scalar_init(_buffer_with_ratios([2.0]), 5) == 2.0


def test_scalar_init_window_max():
    # newest two pairs have ratios 2 and 5
    assert scalar_init(_buffer_with_ratios([3.0, 5.0, 2.0]), 2) == 5.0


def test_scalar_init_fallback_on_negative_curvature():
    assert scalar_init(_buffer_with_ratios([-1.0, -3.0]), 5) == 1.0


def test_dense_init_single_pair():
    ini = dense_init(_buffer_with_ratios([2.0]), 5)
    assert (ini.zeta, ini.zeta_perp) == (2.0, 2.0)


def test_dense_init_newest_versus_window():
    ini = dense_init(_buffer_with_ratios([7.0, 3.0]), 5)
    assert (ini.zeta, ini.zeta_perp) == (7.0, 3.0)


def test_dense_init_fallback_for_negative_newest():
    ini = dense_init(_buffer_with_ratios([7.0, -2.0]), 5)
    assert (ini.zeta, ini.zeta_perp) == (7.0, 7.0)


def test_window_longer_than_memory_uses_history():
    buf = PairBuffer(6, 2, history=5)
    for i, r in enumerate([9.0, 1.0, 2.0]):
        buf.update(e(6)[i], r * e(6)[i])
    assert buf.size == 2
    assert scalar_init(buf, 5) == 9.0
    assert scalar_init(buf, 2) == 2.0


def test_scalar_initialization_rejects_split_parameters():
    with pytest.raises(ValueError):
        Initialization("scalar", 1.0, 2.0)


# ---- compact MSS -----------------------------------------------------------

def test_build_mss_scalar_blocks():
    buf = buffer_from([(e(2)[0], 2 * e(2)[0])], 2)
    mc = build_mss(buf, Initialization.scalar(1.0))
    np.testing.assert_allclose(mc.core, [[-3.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(mc.gram_S, [[1.0]])
    np.testing.assert_allclose(mc.diag_E, [2.0])


def test_build_mss_singular_gram_raises():
    buf = PairBuffer(3, 2)
    buf._s = [e(3)[0], 2 * e(3)[0]]  # bypass the filter on purpose
    buf._y = [e(3)[1], e(3)[2]]
    with pytest.raises(FactorizationError):
        build_mss(buf, Initialization.scalar(1.0))


def test_recursion_oracle_trivial_cases():
    B0 = 2.0 * e(4)
    np.testing.assert_array_equal(mss_recursion_oracle([], B0), B0)
    s, y = np.arange(1.0, 5.0), np.array([1.0, -1.0, 0.5, 2.0])
    np.testing.assert_allclose(mss_recursion_oracle([(s, y)], B0) @ s, y)


def test_recursion_oracle_rejects_dependent_steps():
    s = np.ones(3)
    with pytest.raises(ValueError):
        mss_recursion_oracle([(s, s), (2 * s, s)], e(3))


def test_recursion_oracle_symmetrized_secant():
    rng = np.random.default_rng(0)
    pairs = random_pairs(rng, 10, 3)
    B = mss_recursion_oracle(pairs, 1.3 * e(10))
    S = np.column_stack([s for s, _ in reversed(pairs)])
    Y = np.column_stack([y for _, y in reversed(pairs)])
    np.testing.assert_allclose(S.T @ B @ S, sym(S.T @ Y), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), l=st.integers(1, 5), dense=st.booleans())
def test_compact_matches_recursion_and_representations(seed, l, dense):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(l + 2, 31))
    pairs = random_pairs(rng, n, l)
    buf = buffer_from(pairs, n)
    init = random_init(rng, dense)
    std = build_mss(buf, init)
    alt = build_mss(buf, init, "gram_free")
    for _ in range(3):
        v = rng.standard_normal(n)
        bv = std.matvec(v)
        assert np.linalg.norm(alt.matvec(v) - bv) <= 1e-10 * max(1.0, np.linalg.norm(bv))
    if not dense:
        B = mss_recursion_oracle(pairs, init.zeta * e(n))
        v = rng.standard_normal(n)
        assert np.linalg.norm(std.matvec(v) - B @ v) <= 1e-8 * np.linalg.norm(B @ v)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), l=st.integers(1, 5))
def test_symmetrized_secant_with_dense_init(seed, l):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2 * l + 1, 31))
    buf = buffer_from(random_pairs(rng, n, l), n)
    mc = build_mss(buf, random_init(rng, True))
    S, Y = buf.matrices()
    BS = np.column_stack([mc.matvec(c) for c in S.T])
    C = S.T @ Y
    assert np.max(np.abs(S.T @ BS - sym(C))) <= 1e-8 * (1 + np.max(np.abs(C)))
    B0S = np.column_stack([mc.apply_b0(c) for c in S.T])
    assert np.max(np.abs(B0S - mc.zeta * S)) <= 1e-10 * abs(mc.zeta) * np.max(np.abs(S))


# ---- spectral factors ------------------------------------------------------

def test_factorize_two_by_two_example():
    buf = buffer_from([(e(2)[0], 2 * e(2)[0])], 2)
    f = factorize(build_mss(buf, Initialization.scalar(1.0)))
    B = np.diag([2.0, 1.0])
    np.testing.assert_allclose(f.lambdas, [2.0])
    assert f.zeta_perp == 1.0
    assert f.kept_columns == (0,)
    np.testing.assert_allclose(np.abs(f.p_parallel()), [[1.0], [0.0]])
    np.testing.assert_allclose(np.column_stack([f.matvec(c) for c in e(2)]), B)
    np.testing.assert_allclose(np.linalg.eigvalsh(B), sorted([*f.lambdas, f.zeta_perp]))


def test_factorize_random_instance_reconstruction():
    rng = np.random.default_rng(12)
    n = 12
    buf = buffer_from(random_pairs(rng, n, 3), n)
    for init in (Initialization.scalar(1.5), Initialization("dense", 1.5, 0.4)):
        mc = build_mss(buf, init)
        f = factorize(mc)
        P = f.p_parallel()
        assert np.max(np.abs(P.T @ P - e(P.shape[1]))) <= 1e-8
        for _ in range(5):
            v = rng.standard_normal(n)
            w = P.T @ v
            recon = P @ (f.lambdas * w) + f.zeta_perp * (v - P @ w)
            assert np.linalg.norm(recon - mc.matvec(v)) <= 1e-8 * np.linalg.norm(mc.matvec(v))


def test_factorize_init_overrides_zeta_perp():
    rng = np.random.default_rng(1)
    buf = buffer_from(random_pairs(rng, 8, 2), 8)
    f = factorize(build_mss(buf, Initialization.scalar(1.0)),
                  Initialization("dense", 1.0, 0.25))
    assert f.zeta_perp == 0.25 and f.zeta == 1.0


def test_factorize_lambdas_ascending_and_match_dense_spectrum():
    rng = np.random.default_rng(5)
    n = 9
    buf = buffer_from(random_pairs(rng, n, 3), n)
    mc = build_mss(buf, Initialization("dense", 2.0, 0.7))
    f = factorize(mc)
    assert np.all(np.diff(f.lambda_hat) >= 0)
    dense_spec = np.linalg.eigvalsh(mc.dense())
    ours = np.sort(np.concatenate([f.lambdas, np.full(n - f.rank, f.zeta_perp)]))
    np.testing.assert_allclose(ours, dense_spec, atol=1e-9)


def test_apply_p_parallel_consistency():
    rng = np.random.default_rng(7)
    for rep in ("standard", "gram_free"):
        buf = buffer_from(random_pairs(rng, 10, 2), 10)
        f = factorize(build_mss(buf, Initialization.scalar(1.0), rep))
        P = f.p_parallel()
        x = rng.standard_normal(10)
        v = rng.standard_normal(f.rank)
        np.testing.assert_allclose(apply_p_parallel_t(f, x), P.T @ x, atol=1e-12)
        np.testing.assert_allclose(apply_p_parallel(f, v), P @ v, atol=1e-12)
        np.testing.assert_allclose(apply_p_parallel_t(f, apply_p_parallel(f, e(f.rank)[0])),
                                   e(f.rank)[0], atol=1e-10)
        assert not np.any(apply_p_parallel(f, np.zeros(f.rank)))


def test_identity_factors():
    f = SpectralFactors.identity(4, 2.0)
    assert f.rank == 0
    np.testing.assert_allclose(f.matvec(np.ones(4)), 2.0 * np.ones(4))


# ---- SR1 -------------------------------------------------------------------

def _sr1_recursion(pairs, gamma, n):
    B = gamma * e(n)
    for s, y in pairs:
        r = y - B @ s
        B = B + np.outer(r, r) / (r @ s)
    return B


@pytest.mark.parametrize("seed", range(5))
def test_sr1_compact_matches_recursion(seed):
    rng = np.random.default_rng(seed)
    n, l = 10, 4
    pairs = random_pairs(rng, n, l)
    buf = buffer_from(pairs, n)
    sr = build_sr1(buf, 0.8)
    np.testing.assert_allclose(sr.dense(), _sr1_recursion(pairs, 0.8, n), atol=1e-9)
    f = factorize(sr)
    v = rng.standard_normal(n)
    np.testing.assert_allclose(f.matvec(v), sr.matvec(v), rtol=1e-8, atol=1e-10)


def test_sr1_hereditary_secant_on_quadratic():
    rng = np.random.default_rng(2)
    n = 8
    A = rng.standard_normal((n, n))
    A = A + A.T
    pairs = [(s, A @ s) for s in rng.standard_normal((3, n))]
    sr = build_sr1(buffer_from(pairs, n), 1.0)
    for s, y in pairs:
        np.testing.assert_allclose(sr.matvec(s), y, atol=1e-9)


def test_sr1_singular_middle_raises():
    n = 4
    s = e(n)[0]
    buf = buffer_from([(s, 1.0 * s)], n)  # y = gamma s makes the middle zero
    with pytest.raises(FactorizationError):
        build_sr1(buf, 1.0)
