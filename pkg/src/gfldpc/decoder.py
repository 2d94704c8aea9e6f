"""Iterative min-sum and sum-product decoding over GF(q).

Messages live in edge-indexed arrays of shape ``(n_edges, q)``, edges in the
check-major order of :class:`~gfldpc.code_graph.Code`.  One iteration of the
flooding schedule is: every check updates (horizontal step), every variable
updates (vertical step), then a posterior hard decision is tested against the
syndrome.

The min-sum messages are costs (negative log-likelihoods).  Check messages
are shifted so that their value at symbol 0 is exactly 0; variable messages
are shifted so that their minimum is 0.  Both shifts leave every argmin
unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from .code_graph import Code, _syndrome_kernel
from .trellis import (MINSUM, SUMPROD, _check_update, _load_inputs)

PLAIN = "plain"
NORMALIZED = "normalized"
OFFSET = "offset"
VARIANTS = (PLAIN, NORMALIZED, OFFSET)
_VARIANT_CODE = {PLAIN: 0, NORMALIZED: 1, OFFSET: 2}


class DecoderError(ValueError):
    pass


def _as_schedule(value) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),)
    vals = tuple(float(v) for v in value)
    if not vals:
        raise DecoderError("empty parameter schedule")
    return vals


@dataclass(frozen=True)
class DecoderConfig:
    """Min-sum decoder settings.

    ``alpha`` and ``beta`` are either one constant or a per-iteration
    schedule (iteration k uses entry k-1; the last entry repeats).  The
    plain variant ignores both.  ``n_m=None`` keeps all q candidates.
    """

    variant: str = NORMALIZED
    alpha: float | Sequence[float] = 0.865
    beta: float | Sequence[float] = 0.0
    max_iterations: int = 300
    n_m: int | None = None
    check_at_zero: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise DecoderError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if self.max_iterations < 0:
            raise DecoderError("max_iterations must be non-negative")
        alphas, betas = _as_schedule(self.alpha), _as_schedule(self.beta)
        if self.variant == NORMALIZED and not all(0 < a <= 1 for a in alphas):
            raise DecoderError("normalized min-sum needs 0 < alpha <= 1")
        if self.variant == OFFSET and not all(b >= 0 for b in betas):
            raise DecoderError("offset min-sum needs beta >= 0")
        if self.n_m is not None and self.n_m < 1:
            raise DecoderError("n_m must be positive")
        if self.variant == PLAIN:
            object.__setattr__(self, "alpha", 1.0)
            object.__setattr__(self, "beta", 0.0)

    def alpha_at(self, k: int) -> float:
        a = _as_schedule(self.alpha)
        return a[min(k, len(a)) - 1]

    def beta_at(self, k: int) -> float:
        b = _as_schedule(self.beta)
        return b[min(k, len(b)) - 1]

    def schedules(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        ks = range(1, max(n, 1) + 1)
        return (np.array([self.alpha_at(k) for k in ks]),
                np.array([self.beta_at(k) for k in ks]))


@dataclass
class MessageState:
    """Decoder messages: ``Z`` variable->check, ``L`` check->variable, ``Zn`` posteriors."""

    Z: np.ndarray
    L: np.ndarray
    Zn: np.ndarray
    normalization_fallbacks: int = 0
    empty_message_fallbacks: int = 0


@dataclass
class DecodeResult:
    codeword: np.ndarray
    converged: bool
    iterations_used: int
    posterior: np.ndarray
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _transform(v, variant, alpha, beta):
    if variant == 1:
        return alpha * v
    if variant == 2:
        return max(v - beta, 0.0)
    return v


@njit(cache=True)
def _max_degree(ptr):
    d = 1
    for i in range(ptr.shape[0] - 1):
        d = max(d, ptr[i + 1] - ptr[i])
    return d


@njit(cache=True)
def _horizontal_minsum(check_ptr, edge_coef, Z, L, n_m, add_t, mul_t, inv_t, neg_t, simplified):
    q = Z.shape[1]
    dmax = _max_degree(check_ptr)
    work = np.empty((dmax, q))
    left = np.empty((dmax, q))
    right = np.empty((dmax, q))
    tmp = np.empty(q)
    tmp2 = np.empty(q)
    fallbacks = 0
    for m in range(check_ptr.shape[0] - 1):
        a = check_ptr[m]
        b = check_ptr[m + 1]
        g = work[:b - a]
        _load_inputs(Z[a:b], n_m, g)
        _check_update(edge_coef[a:b], g, L[a:b], left, right, tmp, tmp2,
                      add_t, mul_t, inv_t, neg_t, MINSUM, simplified)
        for e in range(a, b):
            ref = L[e, 0]
            if ref == np.inf:
                # symbol 0 unreachable on the pruned support: anchor at the minimum
                ref = np.inf
                for x in range(q):
                    ref = min(ref, L[e, x])
                fallbacks += 1
            for x in range(q):
                L[e, x] = L[e, x] - ref
    return fallbacks


@njit(cache=True)
def _vertical_minsum(var_ptr, var_edges, f, L, Z, variant, alpha, beta):
    q = f.shape[1]
    empties = 0
    for n in range(var_ptr.shape[0] - 1):
        a = var_ptr[n]
        b = var_ptr[n + 1]
        for i in range(a, b):
            e = var_edges[i]
            lo = np.inf
            for x in range(q):
                acc = f[n, x]
                for j in range(a, b):
                    if j != i:
                        acc += _transform(L[var_edges[j], x], variant, alpha, beta)
                Z[e, x] = acc
                lo = min(lo, acc)
            if lo == np.inf:
                for x in range(q):
                    Z[e, x] = f[n, x]
                empties += 1
            else:
                for x in range(q):
                    Z[e, x] = Z[e, x] - lo
    return empties


@njit(cache=True)
def _posterior_minsum(var_ptr, var_edges, f, L, variant, alpha, beta, Zn, xhat):
    q = f.shape[1]
    for n in range(var_ptr.shape[0] - 1):
        best = 0
        for x in range(q):
            acc = f[n, x]
            for j in range(var_ptr[n], var_ptr[n + 1]):
                acc += _transform(L[var_edges[j], x], variant, alpha, beta)
            Zn[n, x] = acc
            if acc < Zn[n, best]:
                best = x
        xhat[n] = best


@njit(cache=True)
def _hard_decision(costs, xhat):
    for n in range(costs.shape[0]):
        best = 0
        for x in range(costs.shape[1]):
            if costs[n, x] < costs[n, best]:
                best = x
        xhat[n] = best


@njit(cache=True)
def _is_zero_syndrome(check_ptr, edge_var, edge_coef, x, add_t, mul_t):
    s = _syndrome_kernel(check_ptr, edge_var, edge_coef, x, add_t, mul_t)
    for v in s:
        if v != 0:
            return False
    return True


@njit(cache=True)
def _decode_minsum(check_ptr, edge_var, edge_coef, var_ptr, var_edges, f,
                   variant, alphas, betas, max_iter, n_m, check_at_zero,
                   add_t, mul_t, inv_t, neg_t, simplified):
    N, q = f.shape
    E = edge_var.shape[0]
    xhat = np.empty(N, dtype=np.int64)
    Zn = f.copy()
    _hard_decision(f, xhat)
    if check_at_zero and _is_zero_syndrome(check_ptr, edge_var, edge_coef, xhat, add_t, mul_t):
        return xhat, True, 0, Zn, 0, 0
    Z = np.empty((E, q))
    for e in range(E):
        for x in range(q):
            Z[e, x] = f[edge_var[e], x]
    L = np.zeros((E, q))
    fallbacks = 0
    empties = 0
    for k in range(1, max_iter + 1):
        ai = min(k, alphas.shape[0]) - 1
        bi = min(k, betas.shape[0]) - 1
        fallbacks += _horizontal_minsum(check_ptr, edge_coef, Z, L, n_m,
                                        add_t, mul_t, inv_t, neg_t, simplified)
        empties += _vertical_minsum(var_ptr, var_edges, f, L, Z, variant, alphas[ai], betas[bi])
        _posterior_minsum(var_ptr, var_edges, f, L, variant, alphas[ai], betas[bi], Zn, xhat)
        if _is_zero_syndrome(check_ptr, edge_var, edge_coef, xhat, add_t, mul_t):
            return xhat, True, k, Zn, fallbacks, empties
    return xhat, False, max_iter, Zn, fallbacks, empties


@njit(cache=True)
def _horizontal_sumproduct(check_ptr, edge_coef, P, Q, add_t, mul_t, inv_t, neg_t):
    q = P.shape[1]
    dmax = _max_degree(check_ptr)
    left = np.empty((dmax, q))
    right = np.empty((dmax, q))
    tmp = np.empty(q)
    tmp2 = np.empty(q)
    dead = 0
    for m in range(check_ptr.shape[0] - 1):
        a = check_ptr[m]
        b = check_ptr[m + 1]
        _check_update(edge_coef[a:b], P[a:b], Q[a:b], left, right, tmp, tmp2,
                      add_t, mul_t, inv_t, neg_t, SUMPROD, False)
        for e in range(a, b):
            dead += _renormalize(Q[e])
    return dead


@njit(cache=True)
def _renormalize(row):
    total = 0.0
    for x in range(row.shape[0]):
        total += row[x]
    if not total > 0.0:
        for x in range(row.shape[0]):
            row[x] = 1.0 / row.shape[0]
        return 1
    for x in range(row.shape[0]):
        row[x] = row[x] / total
    return 0


@njit(cache=True)
def _vertical_sumproduct(var_ptr, var_edges, p, Q, P):
    q = p.shape[1]
    dead = 0
    for n in range(var_ptr.shape[0] - 1):
        a = var_ptr[n]
        b = var_ptr[n + 1]
        for i in range(a, b):
            e = var_edges[i]
            for x in range(q):
                acc = p[n, x]
                for j in range(a, b):
                    if j != i:
                        acc *= Q[var_edges[j], x]
                P[e, x] = acc
            dead += _renormalize(P[e])
    return dead


@njit(cache=True)
def _posterior_sumproduct(var_ptr, var_edges, p, Q, post, xhat):
    q = p.shape[1]
    dead = 0
    for n in range(var_ptr.shape[0] - 1):
        for x in range(q):
            acc = p[n, x]
            for j in range(var_ptr[n], var_ptr[n + 1]):
                acc *= Q[var_edges[j], x]
            post[n, x] = acc
        dead += _renormalize(post[n])
        best = 0
        for x in range(q):
            if post[n, x] > post[n, best]:
                best = x
        xhat[n] = best
    return dead


@njit(cache=True)
def _decode_sumproduct(check_ptr, edge_var, edge_coef, var_ptr, var_edges, p,
                       max_iter, check_at_zero, add_t, mul_t, inv_t, neg_t):
    N, q = p.shape
    E = edge_var.shape[0]
    xhat = np.empty(N, dtype=np.int64)
    post = p.copy()
    for n in range(N):
        best = 0
        for x in range(q):
            if p[n, x] > p[n, best]:
                best = x
        xhat[n] = best
    if check_at_zero and _is_zero_syndrome(check_ptr, edge_var, edge_coef, xhat, add_t, mul_t):
        return xhat, True, 0, post, 0
    P = np.empty((E, q))
    for e in range(E):
        for x in range(q):
            P[e, x] = p[edge_var[e], x]
    Q = np.empty((E, q))
    dead = 0
    for k in range(1, max_iter + 1):
        dead += _horizontal_sumproduct(check_ptr, edge_coef, P, Q, add_t, mul_t, inv_t, neg_t)
        dead += _vertical_sumproduct(var_ptr, var_edges, p, Q, P)
        dead += _posterior_sumproduct(var_ptr, var_edges, p, Q, post, xhat)
        if dead:
            return xhat, False, k, post, dead
        if _is_zero_syndrome(check_ptr, edge_var, edge_coef, xhat, add_t, mul_t):
            return xhat, True, k, post, dead
    return xhat, False, max_iter, post, dead


# ---------------------------------------------------------------------------
# Python API
# ---------------------------------------------------------------------------

def _tables(code: Code):
    F = code.field
    return F.add_table, F.mul_table, F.inv_table, F.neg_table


def _check_costs(code: Code, costs) -> np.ndarray:
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    if costs.shape != (code.n_vars, code.field.q):
        raise DecoderError(f"expected tables of shape {(code.n_vars, code.field.q)}, got {costs.shape}")
    return costs


def _n_m(code: Code, n_m: int | None) -> int:
    if n_m is None:
        return code.field.q
    if not 1 <= n_m <= code.field.q:
        raise DecoderError(f"n_m must lie in [1, {code.field.q}]")
    return int(n_m)


def init_messages(code: Code, channel_costs) -> MessageState:
    """Every variable-to-check message starts as the channel cost table."""
    f = _check_costs(code, channel_costs)
    return MessageState(Z=f[code.edge_var].copy(),
                        L=np.zeros((code.n_edges, code.field.q)),
                        Zn=f.copy())


def horizontal_step(code: Code, state: MessageState, n_m: int | None = None,
                    simplified: bool | None = None) -> int:
    """Recompute every check-to-variable message, normalized so ``L(0) = 0``.

    Returns the number of edges where symbol 0 was unreachable (possible only
    with truncation); those are anchored at their minimum entry instead.
    """
    if simplified is None:
        simplified = code.field.is_binary_extension
    count = _horizontal_minsum(code.check_ptr, code.edge_coef, state.Z, state.L,
                               _n_m(code, n_m), *_tables(code), bool(simplified))
    state.normalization_fallbacks += count
    return count


def vertical_step(code: Code, state: MessageState, channel_costs, config: DecoderConfig,
                  iteration: int = 1) -> int:
    """Variable-to-check messages: channel cost plus the other checks' transformed messages."""
    f = _check_costs(code, channel_costs)
    count = _vertical_minsum(code.var_ptr, code.var_edges, f, state.L, state.Z,
                             _VARIANT_CODE[config.variant], config.alpha_at(iteration),
                             config.beta_at(iteration))
    state.empty_message_fallbacks += count
    return count


def posterior_and_decide(code: Code, state: MessageState, channel_costs, config: DecoderConfig,
                         iteration: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Posterior cost tables and their argmin (ties to the smaller symbol)."""
    f = _check_costs(code, channel_costs)
    x = np.empty(code.n_vars, dtype=np.int64)
    _posterior_minsum(code.var_ptr, code.var_edges, f, state.L, _VARIANT_CODE[config.variant],
                      config.alpha_at(iteration), config.beta_at(iteration), state.Zn, x)
    return x, state.Zn


def hard_decision(costs) -> np.ndarray:
    costs = np.ascontiguousarray(costs, dtype=np.float64)
    x = np.empty(costs.shape[0], dtype=np.int64)
    _hard_decision(costs, x)
    return x


def decode(code: Code, channel_costs, config: DecoderConfig | None = None) -> DecodeResult:
    """Run min-sum decoding until the syndrome vanishes or the iteration cap."""
    config = config or DecoderConfig()
    f = _check_costs(code, channel_costs)
    alphas, betas = config.schedules(config.max_iterations)
    x, ok, iters, post, fallbacks, empties = _decode_minsum(
        code.check_ptr, code.edge_var, code.edge_coef, code.var_ptr, code.var_edges, f,
        _VARIANT_CODE[config.variant], alphas, betas, config.max_iterations,
        _n_m(code, config.n_m), config.check_at_zero, *_tables(code),
        code.field.is_binary_extension)
    return DecodeResult(codeword=x, converged=bool(ok), iterations_used=int(iters), posterior=post,
                        diagnostics={"normalization_fallbacks": int(fallbacks),
                                     "empty_message_fallbacks": int(empties)})


def decode_sumproduct(code: Code, channel_probs, max_iterations: int = 300,
                      check_at_zero: bool = True) -> DecodeResult:
    """Probability-domain sum-product decoding on the same trellis kernel.

    The posterior is returned as anchored cost tables ``-ln p``.  A message
    with zero total mass stops decoding with ``converged=False`` and a
    nonzero ``diagnostics["zero_mass"]``.
    """
    p = _check_costs(code, channel_probs)
    if np.any(p < 0):
        raise DecoderError("probabilities must be non-negative")
    x, ok, iters, post, dead = _decode_sumproduct(
        code.check_ptr, code.edge_var, code.edge_coef, code.var_ptr, code.var_edges, p,
        int(max_iterations), bool(check_at_zero), *_tables(code))
    with np.errstate(divide="ignore"):
        costs = -np.log(post)
    costs -= costs.min(axis=1, keepdims=True)
    return DecodeResult(codeword=x, converged=bool(ok), iterations_used=int(iters), posterior=costs,
                        diagnostics={"zero_mass": int(dead)})
