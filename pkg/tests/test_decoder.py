import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gfldpc import decoder as dec
from gfldpc.channel import ChannelParams, costs_to_probs, modulate, symbol_costs, transmit
from gfldpc.code_graph import Code, energy, is_codeword, random_codeword, random_regular_code
from gfldpc.decoder import (DecoderConfig, DecoderError, decode, decode_sumproduct, hard_decision,
                            horizontal_step, init_messages, posterior_and_decide, vertical_step)
from gfldpc.galois import field_new
from gfldpc.trellis import checknode_oracle

PLAIN = DecoderConfig(variant="plain")


def noisy_costs(code, ebn0, seed, x=None):
    F = code.field
    x = np.zeros(code.n_vars, dtype=int) if x is None else x
    p = ChannelParams(ebn0, code.rate, F.degree)
    return symbol_costs(transmit(modulate(x, F), p, seed), p, F)


def clean_costs(code, x, big=50.0):
    f = np.full((code.n_vars, code.field.q), big)
    f[np.arange(code.n_vars), x] = 0.0
    return f


@pytest.fixture(scope="module")
def small_code():
    return random_regular_code(field_new(4), 24, 16, 2, seed=3)


# -- configuration ----------------------------------------------------------

@pytest.mark.parametrize("kwargs", [
    dict(variant="normalized", alpha=1.5),
    dict(variant="normalized", alpha=0.0),
    dict(variant="normalized", alpha=[0.9, 1.2]),
    dict(variant="offset", beta=-0.1),
    dict(variant="bogus"),
    dict(max_iterations=-1),
    dict(n_m=0),
])
def test_config_validation(kwargs):
    with pytest.raises(DecoderError):
        DecoderConfig(**kwargs)


def test_plain_ignores_parameters():
    cfg = DecoderConfig(variant="plain", alpha=0.3, beta=2.0)
    assert cfg.alpha_at(1) == 1.0 and cfg.beta_at(1) == 0.0


def test_alpha_schedule_repeats_last_entry():
    cfg = DecoderConfig(alpha=[0.5, 0.7, 0.9])
    assert [cfg.alpha_at(k) for k in (1, 2, 3, 4, 10)] == [0.5, 0.7, 0.9, 0.9, 0.9]


def test_n_m_above_q_rejected(small_code):
    with pytest.raises(DecoderError):
        decode(small_code, np.zeros((24, 4)), DecoderConfig(n_m=5))


def test_shape_errors(small_code):
    with pytest.raises(DecoderError):
        decode(small_code, np.zeros((24, 3)))
    with pytest.raises(DecoderError):
        init_messages(small_code, np.zeros((23, 4)))


# -- single steps -----------------------------------------------------------

def test_init_messages_copies_channel_costs(small_code):
    f = np.random.default_rng(0).random((24, 4))
    st_ = init_messages(small_code, f)
    np.testing.assert_array_equal(st_.Z, f[small_code.edge_var])
    np.testing.assert_array_equal(init_messages(small_code, np.zeros((24, 4))).Z, 0)


def test_horizontal_single_check_example():
    code = Code.from_rows(field_new(4), 2, [[(0, 1), (1, 1)]])
    state = init_messages(code, [[0, 0, 0, 0], [0, 1, 2, 3]])
    assert horizontal_step(code, state) == 0
    np.testing.assert_array_equal(state.L[0], [0, 1, 2, 3])


@pytest.mark.parametrize("q", [3, 4, 8])
def test_horizontal_matches_oracle(q):
    code = random_regular_code(field_new(q), 12, 8, 2, seed=q)
    rng = np.random.default_rng(q)
    state = init_messages(code, rng.integers(0, 20, (12, q)).astype(float))
    state.Z[:] = rng.integers(0, 20, state.Z.shape)
    horizontal_step(code, state)
    for m in range(code.n_checks):
        a, b = code.check_ptr[m], code.check_ptr[m + 1]
        ref = checknode_oracle(code.field, code.edge_coef[a:b], state.Z[a:b])
        np.testing.assert_array_equal(state.L[a:b], ref - ref[:, :1])
    assert np.all(state.L[:, 0] == 0)


def test_horizontal_fallback_when_zero_unreachable():
    code = Code.from_rows(field_new(4), 2, [[(0, 1), (1, 1)]])
    state = init_messages(code, [[0, 0, 0, 0], [5, 0, 7, 9]])
    assert horizontal_step(code, state, n_m=1) == 1
    np.testing.assert_array_equal(state.L[0], [np.inf, 0, np.inf, np.inf])
    assert state.normalization_fallbacks == 1


def _two_check_gf2():
    # variable 0 sits in checks 0 and 1; variables 1 and 2 in one check each
    return Code.from_rows(field_new(2), 3, [[(0, 1), (1, 1)], [(0, 1), (2, 1)]])


def test_vertical_example():
    code = _two_check_gf2()
    f = np.array([[0, 4], [0, 0], [0, 0]], dtype=float)
    state = init_messages(code, f)
    e0 = code.var_edges[code.var_ptr[0]]       # edge to check 0
    e1 = code.var_edges[code.var_ptr[0] + 1]   # edge to check 1
    state.L[e0] = [0, 1]
    state.L[e1] = [0, 3]
    vertical_step(code, state, f, PLAIN)
    np.testing.assert_array_equal(state.Z[e0], [0, 7])
    np.testing.assert_array_equal(state.Z[e1], [0, 5])


def test_vertical_degree_one_variable_gets_channel_costs():
    code = _two_check_gf2()
    f = np.array([[0, 4], [0, 2], [1, 0]], dtype=float)
    state = init_messages(code, f)
    state.L[:] = 9.0
    vertical_step(code, state, f, PLAIN)
    for n in (1, 2):
        e = code.var_edges[code.var_ptr[n]]
        np.testing.assert_array_equal(state.Z[e], f[n])


def test_vertical_variants():
    code = _two_check_gf2()
    f = np.array([[0, 4], [0, 0], [0, 0]], dtype=float)
    e0, e1 = code.var_edges[0:2]
    for cfg, expected in [(DecoderConfig(alpha=0.5), [0, 4 + 0.5 * 3]),
                          (DecoderConfig(variant="offset", beta=1.0), [0, 4 + 2])]:
        state = init_messages(code, f)
        state.L[e0] = [0, 1]
        state.L[e1] = [0, 3]
        vertical_step(code, state, f, cfg)
        np.testing.assert_allclose(state.Z[e0], expected)


def test_vertical_reanchors_minimum():
    code = _two_check_gf2()
    f = np.array([[0, 4], [0, 0], [0, 0]], dtype=float)
    state = init_messages(code, f)
    e0, e1 = code.var_edges[0:2]
    state.L[e1] = [0, -10]
    vertical_step(code, state, f, PLAIN)
    np.testing.assert_array_equal(state.Z[e0], [6, 0])


def test_posterior_tie_breaks_to_zero():
    code = Code.from_rows(field_new(2), 2, [[(0, 1), (1, 1)]])
    state = init_messages(code, np.zeros((2, 2)))
    x, post = posterior_and_decide(code, state, np.zeros((2, 2)), PLAIN)
    np.testing.assert_array_equal(x, [0, 0])
    np.testing.assert_array_equal(hard_decision([[1.0, 1.0, 0.5, 0.5]]), [2])


def test_posterior_sums_all_checks():
    code = _two_check_gf2()
    f = np.array([[0, 4], [0, 1], [0, 1]], dtype=float)
    state = init_messages(code, f)
    e0, e1 = code.var_edges[0:2]
    state.L[e0] = [0, -3]
    state.L[e1] = [0, -2]
    x, post = posterior_and_decide(code, state, f, PLAIN)
    np.testing.assert_array_equal(post[0], [0, -1])
    assert x[0] == 1


# -- full decoding ----------------------------------------------------------

def test_noiseless_codeword(small_code):
    x = random_codeword(small_code, 11)
    f = clean_costs(small_code, x)
    r = decode(small_code, f)
    assert r.converged and r.iterations_used == 0
    np.testing.assert_array_equal(r.codeword, x)
    r = decode(small_code, f, DecoderConfig(check_at_zero=False))
    assert r.converged and r.iterations_used == 1
    np.testing.assert_array_equal(r.codeword, x)


def test_zero_iterations_returns_channel_decision(small_code):
    f = noisy_costs(small_code, 0.0, 1)
    r = decode(small_code, f, DecoderConfig(max_iterations=0, check_at_zero=False))
    assert not r.converged and r.iterations_used == 0
    np.testing.assert_array_equal(r.codeword, f.argmin(axis=1))


def _ml_decode(code, f):
    best, best_x = np.inf, None
    for x in itertools.product(range(code.field.q), repeat=code.n_vars):
        sat, val = energy(code, x, f)
        if sat and val < best:
            best, best_x = val, np.array(x)
    return best_x


def test_single_error_matches_ml():
    code = random_regular_code(field_new(4), 6, 3, 2, seed=2)  # 4^6 words, exhaustive ML
    rng = np.random.default_rng(0)
    checked = 0
    for trial in range(30):
        x = random_codeword(code, trial)
        f = clean_costs(code, x, big=4.0)
        n = rng.integers(code.n_vars)
        wrong = (x[n] + 1 + rng.integers(code.field.q - 1)) % code.field.q
        f[n] = 4.0
        f[n, wrong] = 0.0
        f[n, x[n]] = 1.0
        ml = _ml_decode(code, f)
        if not np.array_equal(ml, x):
            continue
        r = decode(code, f, PLAIN)
        assert r.converged
        np.testing.assert_array_equal(r.codeword, x)
        checked += 1
    assert checked >= 10


def test_converged_implies_codeword(small_code):
    for seed in range(40):
        r = decode(small_code, noisy_costs(small_code, 1.0, seed))
        assert not r.converged or is_codeword(small_code, r.codeword)


def test_stepwise_equals_fused(small_code):
    f = noisy_costs(small_code, 1.5, 4)
    cfg = DecoderConfig(alpha=[0.9, 0.8], max_iterations=6, check_at_zero=False)
    state = init_messages(small_code, f)
    for k in range(1, 7):
        horizontal_step(small_code, state)
        assert np.isfinite(state.L).all() and np.all(state.L[:, 0] == 0)
        vertical_step(small_code, state, f, cfg, k)
        assert np.isfinite(state.Z).all() and np.all(state.Z.min(axis=1) == 0)
        x, post = posterior_and_decide(small_code, state, f, cfg, k)
        if is_codeword(small_code, x):
            break
    r = decode(small_code, f, cfg)
    assert r.iterations_used == k
    np.testing.assert_array_equal(r.codeword, x)
    np.testing.assert_array_equal(r.posterior, post)


def test_first_iteration_matches_oracle(small_code):
    f = np.random.default_rng(2).integers(0, 10, (24, 4)).astype(float)
    state = init_messages(small_code, f)
    horizontal_step(small_code, state)
    for m in range(small_code.n_checks):
        a, b = small_code.check_ptr[m], small_code.check_ptr[m + 1]
        ref = checknode_oracle(small_code.field, small_code.edge_coef[a:b], f[small_code.edge_var[a:b]])
        np.testing.assert_array_equal(state.L[a:b], ref - ref[:, :1])


def test_alpha_one_equals_plain(small_code):
    for seed in range(5):
        f = noisy_costs(small_code, 0.5, seed)
        a = decode(small_code, f, DecoderConfig(alpha=1.0))
        b = decode(small_code, f, PLAIN)
        np.testing.assert_array_equal(a.posterior, b.posterior)
        assert a.iterations_used == b.iterations_used


def test_offset_zero_equals_plain_when_messages_nonnegative(small_code):
    # channel costs favouring 0 everywhere keep every normalized L >= 0
    f = np.random.default_rng(1).random((24, 4)) + 0.5
    f[:, 0] = 0
    a = decode(small_code, f, DecoderConfig(variant="offset", beta=0.0, check_at_zero=False))
    b = decode(small_code, f, DecoderConfig(variant="plain", check_at_zero=False))
    np.testing.assert_array_equal(a.posterior, b.posterior)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(-5, 5))
def test_decision_invariant_under_table_shift(seed, shift):
    code = random_regular_code(field_new(4), 12, 8, 2, seed=1)
    f = noisy_costs(code, 0.5, seed)
    g = f.copy()
    g[seed % 12] += shift
    cfg = DecoderConfig(variant="plain", max_iterations=20, check_at_zero=False)
    a, b = decode(code, f, cfg), decode(code, g, cfg)
    np.testing.assert_array_equal(a.codeword, b.codeword)
    assert a.iterations_used == b.iterations_used


def test_truncated_decoding_high_snr():
    code = random_regular_code(field_new(16), 48, 24, 2, seed=5)
    for seed in range(10):
        f = noisy_costs(code, 6.0, seed)
        r = decode(code, f, DecoderConfig(n_m=4))
        assert r.converged
        np.testing.assert_array_equal(r.codeword, 0)


def test_full_candidate_set_matches_default(small_code):
    f = noisy_costs(small_code, 1.0, 8)
    a = decode(small_code, f, DecoderConfig(n_m=4))
    b = decode(small_code, f, DecoderConfig())
    np.testing.assert_array_equal(a.posterior, b.posterior)


def test_decoding_is_deterministic(small_code):
    f = noisy_costs(small_code, 1.0, 9)
    a, b = decode(small_code, f), decode(small_code, f)
    np.testing.assert_array_equal(a.posterior, b.posterior)
    assert a.diagnostics == b.diagnostics


# -- sum-product ------------------------------------------------------------

def _marginals(code, p):
    q = code.field.q
    out = np.zeros((code.n_vars, q))
    for x in itertools.product(range(q), repeat=code.n_vars):
        if is_codeword(code, x):
            w = np.prod([p[n, xn] for n, xn in enumerate(x)])
            for n, xn in enumerate(x):
                out[n, xn] += w
    return out / out.sum(axis=1, keepdims=True)


def _tree_code():
    # two checks sharing variable 2: cycle-free
    return Code.from_rows(field_new(4), 5, [[(0, 1), (1, 2), (2, 3)], [(2, 1), (3, 3), (4, 2)]])


def test_sumproduct_kernels_give_exact_marginals_on_tree():
    code = _tree_code()
    rng = np.random.default_rng(0)
    p = rng.random((5, 4))
    p /= p.sum(axis=1, keepdims=True)
    F = code.field
    tabs = (F.add_table, F.mul_table, F.inv_table, F.neg_table)
    P = p[code.edge_var].copy()
    Q = np.empty_like(P)
    post = np.empty_like(p)
    x = np.empty(5, dtype=np.int64)
    for _ in range(3):
        dec._horizontal_sumproduct(code.check_ptr, code.edge_coef, P, Q, *tabs)
        dec._vertical_sumproduct(code.var_ptr, code.var_edges, p, Q, P)
        dec._posterior_sumproduct(code.var_ptr, code.var_edges, p, Q, post, x)
    np.testing.assert_allclose(post, _marginals(code, p), atol=1e-10)


def test_sumproduct_single_check_posterior():
    code = Code.from_rows(field_new(4), 3, [[(0, 1), (1, 2), (2, 3)]])
    p = np.random.default_rng(3).random((3, 4))
    p /= p.sum(axis=1, keepdims=True)
    r = decode_sumproduct(code, p, max_iterations=1, check_at_zero=False)
    with np.errstate(divide="ignore"):
        ref = -np.log(_marginals(code, p))
    np.testing.assert_allclose(r.posterior, ref - ref.min(axis=1, keepdims=True), atol=1e-10)


def test_sumproduct_noiseless(small_code):
    x = random_codeword(small_code, 3)
    p = costs_to_probs(clean_costs(small_code, x, big=20.0))
    r = decode_sumproduct(small_code, p, check_at_zero=False)
    assert r.converged and r.iterations_used <= 1
    np.testing.assert_array_equal(r.codeword, x)


def test_sumproduct_agrees_with_minsum_at_high_snr(small_code):
    for seed in range(20):
        f = noisy_costs(small_code, 5.0, seed)
        a = decode(small_code, f)
        b = decode_sumproduct(small_code, costs_to_probs(f))
        if a.converged and b.converged:
            np.testing.assert_array_equal(a.codeword, b.codeword)


def test_sumproduct_zero_mass_flagged():
    code = Code.from_rows(field_new(2), 2, [[(0, 1), (1, 1)]])
    r = decode_sumproduct(code, [[1.0, 0.0], [0.0, 1.0]], max_iterations=5)
    assert not r.converged
    assert r.diagnostics["zero_mass"] > 0


def test_sumproduct_rejects_negative():
    code = Code.from_rows(field_new(2), 2, [[(0, 1), (1, 1)]])
    with pytest.raises(DecoderError):
        decode_sumproduct(code, [[1.0, -0.1], [0.5, 0.5]])
