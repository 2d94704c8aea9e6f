"""Check-node message computation on the accumulated-sum trellis.

A parity check ``sum_i h_i x_i = 0`` over GF(q) is unrolled into a chain of
partial-sum states.  A forward (left) scan and a backward (right) scan each
carry one q-vector per position; every outgoing message is then read off by
combining a left state with a right state.  The same kernel runs in two
semirings:

* ``MINSUM``  (min, +) over costs, INFINITE = ``np.inf`` as the zero element
* ``SUMPROD`` (+, *)   over probabilities

Entries equal to the semiring zero are skipped in every inner loop, so a
candidate-truncated input costs O(n_m * q) per scan step instead of O(q^2)
while performing exactly the same arithmetic on the surviving entries.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numba import njit

from .galois import Field

INFINITE = np.inf

MINSUM = 0
SUMPROD = 1

ORACLE_LIMIT = 2**20


class TrellisError(ValueError):
    """Invalid check-node instance (bad coefficients, empty input, guard hit)."""


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _is_zero(v, sr):
    if sr == MINSUM:
        return v == np.inf
    return v == 0.0


@njit(cache=True, inline="always")
def _fill_zero(out, sr):
    z = np.inf if sr == MINSUM else 0.0
    for i in range(out.shape[0]):
        out[i] = z


@njit(cache=True, inline="always")
def _scan_init(g, h, inv_t, mul_t, out):
    # r_1(s) = g(h^-1 s)
    hinv = inv_t[h]
    for s in range(out.shape[0]):
        out[s] = g[mul_t[hinv, s]]


@njit(cache=True, inline="always")
def _extend(prev, g, h, add_t, mul_t, neg_t, out, sr):
    # out(s) = (+)_x g(x) (x) prev(s - h x)
    q = out.shape[0]
    _fill_zero(out, sr)
    for x in range(q):
        gx = g[x]
        if _is_zero(gx, sr):
            continue
        r = neg_t[mul_t[h, x]]
        if sr == MINSUM:
            for s in range(q):
                out[s] = min(out[s], gx + prev[add_t[r, s]])
        else:
            for s in range(q):
                out[s] += gx * prev[add_t[r, s]]


@njit(cache=True, inline="always")
def _convolve_from(a, b, add_t, neg_t, out, sr):
    q = out.shape[0]
    for s in range(q):
        va = a[s]
        if _is_zero(va, sr):
            continue
        r = neg_t[s]
        if sr == MINSUM:
            for u in range(q):
                out[u] = min(out[u], va + b[add_t[r, u]])
        else:
            for u in range(q):
                out[u] += va * b[add_t[r, u]]


@njit(cache=True, inline="always")
def _convolve(a, b, add_t, neg_t, out, sr):
    # out(u) = (+)_s a(s) (x) b(u - s); the outer loop runs over the sparser side
    _fill_zero(out, sr)
    na = 0
    nb = 0
    for i in range(out.shape[0]):
        if not _is_zero(a[i], sr):
            na += 1
        if not _is_zero(b[i], sr):
            nb += 1
    if na <= nb:
        _convolve_from(a, b, add_t, neg_t, out, sr)
    else:
        _convolve_from(b, a, add_t, neg_t, out, sr)


@njit(cache=True, inline="always")
def _read_out(state, h, mul_t, neg_t, out, simplified):
    # L(x) = state(-h x); the negation is the identity in characteristic 2
    for x in range(out.shape[0]):
        hx = mul_t[h, x]
        out[x] = state[hx] if simplified else state[neg_t[hx]]


@njit(cache=True, inline="always")
def _combine(left, right, h, add_t, mul_t, neg_t, out, sr, simplified):
    # L(x) = (+)_s left(s) (x) right(-(s + h x))
    q = out.shape[0]
    _fill_zero(out, sr)
    for s in range(q):
        vl = left[s]
        if _is_zero(vl, sr):
            continue
        for x in range(q):
            t = add_t[s, mul_t[h, x]]
            if not simplified:
                t = neg_t[t]
            vr = right[t]
            if _is_zero(vr, sr):
                continue
            if sr == MINSUM:
                c = vl + vr
                if c < out[x]:
                    out[x] = c
            else:
                out[x] += vl * vr


@njit(cache=True, inline="always")
def _left_scan(coefs, g, add_t, mul_t, inv_t, neg_t, left, sr):
    d = coefs.shape[0]
    _scan_init(g[0], coefs[0], inv_t, mul_t, left[0])
    for i in range(1, d - 1):
        _extend(left[i - 1], g[i], coefs[i], add_t, mul_t, neg_t, left[i], sr)


@njit(cache=True, inline="always")
def _right_scan(coefs, g, add_t, mul_t, inv_t, neg_t, right, sr):
    d = coefs.shape[0]
    _scan_init(g[d - 1], coefs[d - 1], inv_t, mul_t, right[d - 1])
    for i in range(d - 2, 0, -1):
        _extend(right[i + 1], g[i], coefs[i], add_t, mul_t, neg_t, right[i], sr)


@njit(cache=True, inline="always")
def _check_update(coefs, g, out, left, right, tmp, tmp2,
                  add_t, mul_t, inv_t, neg_t, sr, simplified):
    """Write all d outgoing messages of one check into ``out``.

    ``left``/``right``/``tmp``/``tmp2`` are caller-owned scratch with at least
    d rows (left/right) or q entries (tmp, tmp2).
    """
    d = coefs.shape[0]
    if d == 1:
        _fill_zero(out[0], sr)
        out[0, 0] = 0.0 if sr == MINSUM else 1.0
        return
    _left_scan(coefs, g, add_t, mul_t, inv_t, neg_t, left, sr)
    _right_scan(coefs, g, add_t, mul_t, inv_t, neg_t, right, sr)
    _read_out(right[1], coefs[0], mul_t, neg_t, out[0], simplified)
    _read_out(left[d - 2], coefs[d - 1], mul_t, neg_t, out[d - 1], simplified)
    # Interior edges, two at a time: both outputs of the pair (i, i+1) share
    # the state of every variable outside the pair, so one convolution plus
    # one scan step each replaces two full left/right combinations.
    i = 1
    while i <= d - 2:
        if i + 1 <= d - 2:
            _convolve(left[i - 1], right[i + 2], add_t, neg_t, tmp, sr)
            _extend(tmp, g[i + 1], coefs[i + 1], add_t, mul_t, neg_t, tmp2, sr)
            _read_out(tmp2, coefs[i], mul_t, neg_t, out[i], simplified)
            _extend(tmp, g[i], coefs[i], add_t, mul_t, neg_t, tmp2, sr)
            _read_out(tmp2, coefs[i + 1], mul_t, neg_t, out[i + 1], simplified)
            i += 2
        else:
            _combine(left[i - 1], right[i + 1], coefs[i], add_t, mul_t, neg_t,
                     out[i], sr, simplified)
            i += 1


@njit(cache=True, inline="always")
def _load_inputs(g, n_m, out):
    d, q = g.shape
    for i in range(d):
        if n_m < q:
            _truncate(g[i], n_m, out[i])
        else:
            for x in range(q):
                out[i, x] = g[i, x]


@njit(cache=True)
def _truncate(g, n_m, out):
    """Keep the n_m cheapest entries of ``g`` (ties toward smaller symbol)."""
    q = g.shape[0]
    cut = np.partition(g, n_m - 1)[n_m - 1]
    below = 0
    for x in range(q):
        if g[x] < cut:
            below += 1
    at_cut = n_m - below
    for x in range(q):
        v = g[x]
        if v < cut:
            out[x] = v
        elif v == cut and at_cut > 0:
            out[x] = v
            at_cut -= 1
        else:
            out[x] = np.inf


@njit(cache=True)
def _checknode_minsum_kernel(coefs, g, n_m, add_t, mul_t, inv_t, neg_t, simplified):
    d, q = g.shape
    work = np.empty((d, q))
    _load_inputs(g, n_m, work)
    out = np.empty((d, q))
    left = np.empty((d, q))
    right = np.empty((d, q))
    tmp = np.empty(q)
    tmp2 = np.empty(q)
    _check_update(coefs, work, out, left, right, tmp, tmp2,
                  add_t, mul_t, inv_t, neg_t, MINSUM, simplified)
    return out


@njit(cache=True)
def _repeat_minsum_kernel(coefs, g, n_m, add_t, mul_t, inv_t, neg_t, simplified, reps):
    # benchmark helper: ``reps`` updates of one check with preallocated scratch,
    # the way the decoder runs them
    d, q = g.shape
    work = np.empty((d, q))
    out = np.empty((d, q))
    left = np.empty((d, q))
    right = np.empty((d, q))
    tmp = np.empty(q)
    tmp2 = np.empty(q)
    for _ in range(reps):
        _load_inputs(g, n_m, work)
        _check_update(coefs, work, out, left, right, tmp, tmp2,
                      add_t, mul_t, inv_t, neg_t, MINSUM, simplified)
    return out


@njit(cache=True)
def _checknode_sumproduct_kernel(coefs, p, add_t, mul_t, inv_t, neg_t):
    d, q = p.shape
    out = np.empty((d, q))
    left = np.empty((d, q))
    right = np.empty((d, q))
    tmp = np.empty(q)
    tmp2 = np.empty(q)
    _check_update(coefs, p, out, left, right, tmp, tmp2,
                  add_t, mul_t, inv_t, neg_t, SUMPROD, False)
    return out


# ---------------------------------------------------------------------------
# Python-level API
# ---------------------------------------------------------------------------

def _prepare(field: Field, coeffs: Sequence[int], inputs,
             semiring: int = MINSUM) -> tuple[np.ndarray, np.ndarray]:
    coefs = np.asarray(coeffs, dtype=np.int64).reshape(-1)
    if coefs.size == 0:
        raise TrellisError("a check needs at least one variable")
    if np.any(coefs <= 0) or np.any(coefs >= field.q):
        raise TrellisError(f"coefficients must be nonzero elements of GF({field.q})")
    g = np.ascontiguousarray(inputs, dtype=np.float64)
    if g.shape != (coefs.size, field.q):
        raise TrellisError(f"expected inputs of shape {(coefs.size, field.q)}, got {g.shape}")
    if np.isnan(g).any() or np.isneginf(g).any():
        raise TrellisError("inputs must not contain NaN or -inf")
    if semiring == MINSUM:
        if not np.isfinite(g).any(axis=1).all():
            raise TrellisError("every cost table needs at least one finite entry")
    elif semiring == SUMPROD:
        if np.any(g < 0) or not np.isfinite(g).all():
            raise TrellisError("probabilities must be finite and non-negative")
        if not (g > 0).any(axis=1).all():
            raise TrellisError("every probability table needs positive mass")
    else:
        raise TrellisError(f"unknown semiring {semiring}")
    return coefs, g


def _tables(field: Field):
    return field.add_table, field.mul_table, field.inv_table, field.neg_table


@njit(cache=True)
def _all_states(coefs, g, add_t, mul_t, inv_t, neg_t, sr, forward):
    # every partial-sum state including the last one, which the check update
    # itself never needs
    d, q = g.shape
    states = np.empty((d, q))
    if forward:
        _left_scan(coefs, g, add_t, mul_t, inv_t, neg_t, states, sr)
        if d > 1:
            _extend(states[d - 2], g[d - 1], coefs[d - 1], add_t, mul_t, neg_t, states[d - 1], sr)
    else:
        _right_scan(coefs, g, add_t, mul_t, inv_t, neg_t, states, sr)
        if d > 1:
            _extend(states[1], g[0], coefs[0], add_t, mul_t, neg_t, states[0], sr)
    return states


def left_scan(field: Field, coeffs: Sequence[int], inputs, semiring: int = MINSUM) -> list[np.ndarray]:
    """Forward partial-sum states ``r_1 .. r_d``.

    ``r_n(s)`` is the best (or total, for ``SUMPROD``) cost of the first n
    variables over all assignments whose weighted sum equals ``s``.  The
    last state at ``s = 0`` is the optimum of the whole check.
    """
    coefs, g = _prepare(field, coeffs, inputs, semiring)
    states = _all_states(coefs, g, *_tables(field), semiring, True)
    return [row.copy() for row in states]


def right_scan(field: Field, coeffs: Sequence[int], inputs, semiring: int = MINSUM) -> list[np.ndarray]:
    """Backward partial-sum states in scan order ``r_d, r_{d-1}, .., r_1``.

    ``r_n`` covers variables n..d, so ``right_scan(h, g)`` equals
    ``left_scan(h[::-1], g[::-1])`` entry for entry.
    """
    coefs, g = _prepare(field, coeffs, inputs, semiring)
    states = _all_states(coefs, g, *_tables(field), semiring, False)
    return [row.copy() for row in states[::-1]]


def checknode_minsum(field: Field, coeffs: Sequence[int], inputs, *, simplified: bool | None = None) -> np.ndarray:
    """Exact min-sum check-to-variable messages (before normalization).

    Parameters
    ----------
    field : Field
    coeffs : sequence of int
        Nonzero check coefficients ``h_1 .. h_d``.
    inputs : array_like, shape (d, q)
        Incoming cost tables; ``np.inf`` marks excluded symbols.
    simplified : bool, optional
        Use the negation-free combination.  Defaults to True exactly for
        characteristic-2 fields, where it is valid.

    Returns
    -------
    ndarray, shape (d, q)
        Row n, entry x: minimum of the other rows' summed costs over all
        assignments satisfying the check with variable n fixed to x.
    """
    return checknode_minsum_truncated(field, coeffs, inputs, field.q, simplified=simplified)


def checknode_minsum_truncated(field: Field, coeffs: Sequence[int], inputs, n_m: int,
                               *, simplified: bool | None = None) -> np.ndarray:
    """Min-sum update after keeping only the ``n_m`` cheapest symbols per input.

    Symbols outside each input's candidate set are treated as INFINITE.  Ties
    at the cut-off go to the smaller symbol value.  With ``n_m == q`` nothing
    is pruned and the result equals :func:`checknode_minsum`.
    """
    coefs, g = _prepare(field, coeffs, inputs)
    if not 1 <= n_m <= field.q:
        raise TrellisError(f"n_m must lie in [1, {field.q}], got {n_m}")
    if simplified is None:
        simplified = field.is_binary_extension
    elif simplified and not field.is_binary_extension:
        raise TrellisError("the negation-free combination is only valid in characteristic 2")
    return _checknode_minsum_kernel(coefs, g, int(n_m), *_tables(field), bool(simplified))


def checknode_sumproduct(field: Field, coeffs: Sequence[int], inputs) -> np.ndarray:
    """Sum-product check-to-variable messages, each row renormalized to sum 1.

    Raises
    ------
    TrellisError
        If some output has zero total mass (the inputs contradict the check).
    """
    coefs, p = _prepare(field, coeffs, inputs, SUMPROD)
    out = _checknode_sumproduct_kernel(coefs, p, *_tables(field))
    mass = out.sum(axis=1, keepdims=True)
    if np.any(mass <= 0):
        raise TrellisError("no configuration satisfying the check carries probability mass")
    return out / mass


def checknode_oracle(field: Field, coeffs: Sequence[int], inputs) -> np.ndarray:
    """Min-sum check messages by exhaustive enumeration of satisfying assignments.

    Every assignment of the first d-1 variables is listed; the last variable
    is solved from the check.  Limited to ``q**(d-1) <= 2**20``.
    """
    coefs, g = _prepare(field, coeffs, inputs)
    d, q = g.shape
    if d == 1:
        out = np.full((1, q), INFINITE)
        out[0, 0] = 0.0
        return out
    if q ** (d - 1) > ORACLE_LIMIT:
        raise TrellisError(f"oracle instance too large: q^(d-1) = {q ** (d - 1)} > {ORACLE_LIMIT}")

    configs = np.indices((q,) * (d - 1), dtype=np.int64).reshape(d - 1, -1).T
    partial = np.zeros(len(configs), dtype=np.int64)
    for i in range(d - 1):
        partial = field.add_table[partial, field.mul_table[coefs[i], configs[:, i]]]
    last = field.mul_table[field.inv_table[coefs[-1]], field.neg_table[partial]]
    x = np.column_stack([configs, last])

    costs = g[np.arange(d)[None, :], x]
    out = np.full((d, q), INFINITE)
    for n in range(d):
        others = np.delete(costs, n, axis=1)
        total = others[:, 0].copy()
        for j in range(1, d - 1):
            total = total + others[:, j]
        for a in range(q):
            sel = total[x[:, n] == a]
            if sel.size:
                out[n, a] = sel.min()
    return out
