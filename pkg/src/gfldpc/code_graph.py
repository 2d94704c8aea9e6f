"""Sparse parity-check matrices over GF(q) and their Tanner graphs.

File format (whitespace separated, 1-based indices)::

    N M q
    dv_max dc_max
    <N column degrees>
    <M row degrees>
    N column blocks of dv_max "check value" pairs, padded with "0 0"
    M row blocks of dc_max "var value" pairs, padded with "0 0"

Row and column blocks must describe the same set of edges.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from numba import njit

from .galois import Field, field_new


class CodeError(ValueError):
    """Malformed code description or infeasible construction parameters."""


class ParseError(CodeError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True, eq=False)
class Code:
    """An M x N parity-check matrix over ``field`` in sparse row/column form.

    ``check_rows[m]`` lists ``(var, coefficient)`` pairs of check m and
    ``var_cols[n]`` lists ``(check, coefficient)`` pairs of variable n.
    """

    field: Field
    n_vars: int
    n_checks: int
    check_rows: tuple[tuple[tuple[int, int], ...], ...]
    var_cols: tuple[tuple[tuple[int, int], ...], ...]
    rate_override: float | None = None

    def __post_init__(self):
        if len(self.check_rows) != self.n_checks or len(self.var_cols) != self.n_vars:
            raise CodeError("row/column lists do not match the declared dimensions")
        for m, row in enumerate(self.check_rows):
            if not row:
                raise CodeError(f"check {m} has degree 0")
            if len(row) == 1:
                warnings.warn(f"check {m} has degree 1 and pins variable {row[0][0]} to zero",
                              stacklevel=3)
            for n, h in row:
                if not 0 <= n < self.n_vars:
                    raise CodeError(f"check {m} references variable {n} out of range")
                if not 0 < h < self.field.q:
                    raise CodeError(f"check {m} has coefficient {h} for variable {n}")
        rows = sorted((m, n, h) for m, row in enumerate(self.check_rows) for n, h in row)
        cols = sorted((m, n, h) for n, col in enumerate(self.var_cols) for m, h in col)
        if rows != cols:
            raise CodeError("check rows and variable columns describe different edges")
        if len({(m, n) for m, n, _ in rows}) != len(rows):
            raise CodeError("parallel edges are not allowed")

    @classmethod
    def from_rows(cls, field: Field, n_vars: int, rows: Sequence[Sequence[tuple[int, int]]],
                  rate: float | None = None) -> Code:
        cols: list[list[tuple[int, int]]] = [[] for _ in range(n_vars)]
        for m, row in enumerate(rows):
            for n, h in row:
                if not 0 <= n < n_vars:
                    raise CodeError(f"check {m} references variable {n} out of range")
                cols[n].append((m, int(h)))
        return cls(field, n_vars, len(rows),
                   tuple(tuple((int(n), int(h)) for n, h in row) for row in rows),
                   tuple(tuple(c) for c in cols), rate)

    @classmethod
    def from_dense(cls, field: Field, H) -> Code:
        H = np.asarray(H, dtype=np.int64)
        rows = [[(int(n), int(H[m, n])) for n in np.flatnonzero(H[m])] for m in range(H.shape[0])]
        return cls.from_rows(field, H.shape[1], rows)

    @property
    def rate(self) -> float:
        if self.rate_override is not None:
            return self.rate_override
        return (self.n_vars - self.n_checks) / self.n_vars

    @property
    def n_edges(self) -> int:
        return len(self.edge_var)

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.n_checks, self.n_vars), dtype=np.int64)
        for m, row in enumerate(self.check_rows):
            for n, h in row:
                H[m, n] = h
        return H

    # Edge e enumerates (check, position) in check-major order; these flat
    # arrays are what the decoder kernels consume.

    @cached_property
    def check_ptr(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([len(r) for r in self.check_rows])]).astype(np.int64)

    @cached_property
    def edge_var(self) -> np.ndarray:
        return np.array([n for row in self.check_rows for n, _ in row], dtype=np.int64)

    @cached_property
    def edge_coef(self) -> np.ndarray:
        return np.array([h for row in self.check_rows for _, h in row], dtype=np.int64)

    @cached_property
    def edge_check(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_checks), np.diff(self.check_ptr)).astype(np.int64)

    @cached_property
    def var_ptr(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([len(c) for c in self.var_cols])]).astype(np.int64)

    @cached_property
    def var_edges(self) -> np.ndarray:
        """Edge ids of each variable, in ``var_cols`` order."""
        lookup = {(int(m), int(n)): e for e, (m, n) in enumerate(zip(self.edge_check, self.edge_var))}
        return np.array([lookup[m, n] for n, col in enumerate(self.var_cols) for m, _ in col],
                        dtype=np.int64)

    def edges(self) -> list[tuple[int, int, int]]:
        """All edges as ``(check, var, coefficient)``, check-major."""
        return [(m, n, h) for m, row in enumerate(self.check_rows) for n, h in row]


def _as_symbols(code: Code, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (code.n_vars,):
        raise CodeError(f"expected {code.n_vars} symbols, got shape {x.shape}")
    if np.any(x < 0) or np.any(x >= code.field.q):
        raise CodeError(f"symbols must lie in [0, {code.field.q})")
    return x


def syndrome(code: Code, x) -> np.ndarray:
    """``H x^T`` over the code's field."""
    x = _as_symbols(code, x)
    return _syndrome_kernel(code.check_ptr, code.edge_var, code.edge_coef, x,
                            code.field.add_table, code.field.mul_table)


@njit(cache=True)
def _syndrome_kernel(check_ptr, edge_var, edge_coef, x, add_t, mul_t):
    M = check_ptr.shape[0] - 1
    out = np.zeros(M, dtype=np.int64)
    for m in range(M):
        acc = 0
        for e in range(check_ptr[m], check_ptr[m + 1]):
            acc = add_t[acc, mul_t[edge_coef[e], x[edge_var[e]]]]
        out[m] = acc
    return out


def is_codeword(code: Code, x) -> bool:
    return not np.any(syndrome(code, x))


def energy(code: Code, x, costs) -> tuple[bool, float]:
    """Objective value of a hard assignment.

    Returns ``(satisfied, value)`` where ``value`` is the summed channel cost
    and ``satisfied`` says whether every check holds.  An unsatisfied
    assignment has infinite energy; callers must test the flag rather than
    the value.
    """
    x = _as_symbols(code, x)
    costs = np.asarray(costs, dtype=np.float64)
    if costs.shape != (code.n_vars, code.field.q):
        raise CodeError(f"expected cost tables of shape {(code.n_vars, code.field.q)}, got {costs.shape}")
    value = float(costs[np.arange(code.n_vars), x].sum())
    return is_codeword(code, x), value


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def parse_code_file(text: str | bytes) -> Code:
    """Parse the sparse list format described in the module docstring."""
    if isinstance(text, bytes):
        text = text.decode()
    tokens: list[tuple[int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        for tok in line.split():
            try:
                tokens.append((int(tok), lineno))
            except ValueError:
                raise ParseError(lineno, f"not an integer: {tok!r}") from None
    pos = 0

    def take(k: int, what: str) -> list[int]:
        nonlocal pos
        if pos + k > len(tokens):
            last = tokens[-1][1] if tokens else 1
            raise ParseError(last, f"unexpected end of input while reading {what}")
        vals = [t for t, _ in tokens[pos:pos + k]]
        pos += k
        return vals

    def line_at(offset: int) -> int:
        return tokens[min(offset, len(tokens) - 1)][1] if tokens else 1

    if not tokens:
        raise ParseError(1, "empty code file")
    N, M, q = take(3, "header")
    if N <= 0 or M <= 0:
        raise ParseError(line_at(0), f"bad dimensions N={N} M={M}")
    try:
        field = field_new(q)
    except ValueError as exc:
        raise ParseError(line_at(2), str(exc)) from None
    dv_max, dc_max = take(2, "maximum degrees")
    col_deg = take(N, "column degrees")
    row_deg = take(M, "row degrees")
    if max(col_deg) > dv_max or min(col_deg) < 0:
        raise ParseError(line_at(pos - M - 1), "column degree outside [0, dv_max]")
    if max(row_deg) > dc_max or min(row_deg) < 1:
        raise ParseError(line_at(pos - 1), "row degree outside [1, dc_max]")
    if sum(col_deg) != sum(row_deg):
        raise ParseError(line_at(pos - 1), "row and column degrees count different edge totals")

    def read_block(count: int, dmax: int, degs: list[int], limit: int, kind: str):
        blocks = []
        for i in range(count):
            start = pos
            pairs = take(2 * dmax, f"{kind} block {i + 1}")
            entries = []
            for k in range(dmax):
                idx, val = pairs[2 * k], pairs[2 * k + 1]
                ln = line_at(start + 2 * k)
                if k < degs[i]:
                    if not 1 <= idx <= limit:
                        raise ParseError(ln, f"{kind} {i + 1}: index {idx} out of range")
                    if val == 0:
                        raise ParseError(ln, f"{kind} {i + 1}: zero coefficient")
                    if not 0 < val < q:
                        raise ParseError(ln, f"{kind} {i + 1}: value {val} is not in GF({q})")
                    entries.append((idx - 1, val))
                elif idx != 0 or val != 0:
                    raise ParseError(ln, f"{kind} {i + 1}: expected '0 0' padding")
            blocks.append(entries)
        return blocks

    cols = read_block(N, dv_max, col_deg, M, "column")
    rows = read_block(M, dc_max, row_deg, N, "row")
    if pos != len(tokens):
        raise ParseError(line_at(pos), "trailing data after row blocks")

    row_edges = sorted((m, n, h) for m, row in enumerate(rows) for n, h in row)
    col_edges = sorted((m, n, h) for n, col in enumerate(cols) for m, h in col)
    if row_edges != col_edges:
        raise ParseError(line_at(pos - 1), "row list disagrees with column list")
    if len({(m, n) for m, n, _ in row_edges}) != len(row_edges):
        raise ParseError(line_at(pos - 1), "parallel edges are not allowed")
    return Code(field, N, M, tuple(tuple(r) for r in rows), tuple(tuple(c) for c in cols))


def serialize_code(code: Code) -> str:
    """Inverse of :func:`parse_code_file`."""
    dv = max((len(c) for c in code.var_cols), default=0)
    dc = max((len(r) for r in code.check_rows), default=0)
    lines = [f"{code.n_vars} {code.n_checks} {code.field.q}", f"{dv} {dc}",
             " ".join(str(len(c)) for c in code.var_cols),
             " ".join(str(len(r)) for r in code.check_rows)]
    for col in code.var_cols:
        pairs = [f"{m + 1} {h}" for m, h in col] + ["0 0"] * (dv - len(col))
        lines.append(" ".join(pairs))
    for row in code.check_rows:
        pairs = [f"{n + 1} {h}" for n, h in row] + ["0 0"] * (dc - len(row))
        lines.append(" ".join(pairs))
    return "\n".join(lines) + "\n"


def load_code(path) -> Code:
    with open(path, "rb") as fh:
        return parse_code_file(fh.read())


# ---------------------------------------------------------------------------
# construction and codewords
# ---------------------------------------------------------------------------

def random_regular_code(field: Field, N: int, M: int, d_v: int, seed: int,
                        max_repairs: int = 10_000) -> Code:
    """(d_v, d_c)-regular code from a seeded random socket permutation.

    Edges landing twice on the same (check, variable) pair are repaired by
    swapping the offending socket with a random other one.  Coefficients are
    uniform over the nonzero field elements.
    """
    if d_v < 2:
        raise CodeError("d_v must be at least 2")
    if N <= 0 or M <= 0 or (N * d_v) % M:
        raise CodeError(f"N*d_v = {N * d_v} is not divisible by M = {M}")
    d_c = N * d_v // M
    if d_c > N or d_v > M:
        raise CodeError("degrees exceed the matrix dimensions")
    rng = np.random.default_rng(seed)
    var_of_socket = np.repeat(np.arange(N), d_v)
    perm = rng.permutation(N * d_v)
    check_of_socket = np.empty(N * d_v, dtype=np.int64)
    check_of_socket[perm] = np.repeat(np.arange(M), d_c)

    for _ in range(max_repairs):
        pairs = check_of_socket * N + var_of_socket
        values, counts = np.unique(pairs, return_counts=True)
        dup_pairs = set(values[counts > 1].tolist())
        if not dup_pairs:
            break
        seen = set()
        for s in range(N * d_v):
            p = int(pairs[s])
            if p in dup_pairs:
                if p in seen:
                    t = int(rng.integers(N * d_v))
                    check_of_socket[s], check_of_socket[t] = check_of_socket[t], check_of_socket[s]
                    break
                seen.add(p)
    else:
        raise CodeError("could not remove parallel edges; parameters too dense")

    coefs = rng.integers(1, field.q, size=N * d_v)
    rows: list[list[tuple[int, int]]] = [[] for _ in range(M)]
    order = np.lexsort((var_of_socket, check_of_socket))
    for s in order:
        rows[check_of_socket[s]].append((int(var_of_socket[s]), int(coefs[s])))
    return Code.from_rows(field, N, rows)


def _row_reduce(code: Code) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of H and its pivot columns."""
    F = code.field
    A = code.to_dense()
    pivots: list[int] = []
    r = 0
    for c in range(code.n_vars):
        if r == A.shape[0]:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        p = r + nz[0]
        A[[r, p]] = A[[p, r]]
        A[r] = F.mul_table[F.inv_table[A[r, c]], A[r]]
        for i in range(A.shape[0]):
            if i != r and A[i, c]:
                scaled = F.mul_table[F.neg_table[A[i, c]], A[r]]
                A[i] = F.add_table[A[i], scaled]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def random_codeword(code: Code, seed: int) -> np.ndarray:
    """Uniform random codeword: free symbols drawn at random, pivots solved."""
    F = code.field
    R, pivots = _cached_echelon(code)
    free = np.setdiff1d(np.arange(code.n_vars), pivots)
    rng = np.random.default_rng(seed)
    x = np.zeros(code.n_vars, dtype=np.int64)
    x[free] = rng.integers(0, F.q, size=free.size)
    for i, c in enumerate(pivots):
        acc = 0
        for j in free:
            if R[i, j]:
                acc = F.add_table[acc, F.mul_table[R[i, j], x[j]]]
        x[c] = F.neg_table[acc]
    return x


def _cached_echelon(code: Code):
    cache = code.__dict__.get("_echelon")
    if cache is None:
        cache = _row_reduce(code)
        code.__dict__["_echelon"] = cache
    return cache
