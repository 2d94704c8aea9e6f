"""Table-driven arithmetic for GF(q), q = p^m <= 256.

Elements are plain integers in ``[0, q)``.  For prime fields the label is
the residue; for extension fields it is the coefficient vector of a
polynomial over GF(p), least significant digit = constant term, written in
base p.  In characteristic 2 that makes addition a bitwise XOR.

Fixed defining polynomials for characteristic 2 (bit i = coefficient of x^i):

    GF(4)   x^2 + x + 1                 0b111
    GF(8)   x^3 + x + 1                 0b1011
    GF(16)  x^4 + x + 1                 0b10011
    GF(32)  x^5 + x^2 + 1               0b100101
    GF(64)  x^6 + x + 1                 0b1000011
    GF(128) x^7 + x^3 + 1               0b10001001
    GF(256) x^8 + x^4 + x^3 + x + 1     0b100011011

Odd-characteristic extension fields use the lexicographically smallest monic
irreducible polynomial of the right degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

MAX_ORDER = 256

BINARY_POLYNOMIALS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011011,
}


class FieldError(ValueError):
    """Raised for unsupported field orders or invalid field operations."""


def _prime_power(q: int) -> tuple[int, int] | None:
    if q < 2:
        return None
    p = next(d for d in range(2, q + 1) if q % d == 0)
    m, r = 0, q
    while r % p == 0:
        r //= p
        m += 1
    return (p, m) if r == 1 else None


def _digits(a: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(a % p)
        a //= p
    return out


def _from_digits(d: list[int], p: int) -> int:
    v = 0
    for c in reversed(d):
        v = v * p + c
    return v


def _polymulmod(a: list[int], b: list[int], mod: list[int], p: int) -> list[int]:
    """Product of two degree < m polynomials reduced by the monic ``mod``."""
    m = len(mod) - 1
    prod = [0] * (2 * m - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, m - 1, -1):
        c = prod[k]
        if c:
            for j in range(m + 1):
                prod[k - m + j] = (prod[k - m + j] - c * mod[j]) % p
    return prod[:m]


def _is_irreducible(mod: list[int], p: int) -> bool:
    m = len(mod) - 1
    for deg in range(1, m // 2 + 1):
        for lower in product(range(p), repeat=deg):
            div = list(lower) + [1]
            rem = list(mod)
            for k in range(m, deg - 1, -1):
                c = rem[k]
                if c:
                    for j in range(deg + 1):
                        rem[k - deg + j] = (rem[k - deg + j] - c * div[j]) % p
            if not any(rem[:deg]):
                return False
    return True


def _smallest_irreducible(p: int, m: int) -> list[int]:
    for lower in product(range(p), repeat=m):
        mod = list(reversed(lower)) + [1]
        if mod[0] and _is_irreducible(mod, p):
            return mod
    raise FieldError(f"no irreducible polynomial of degree {m} over GF({p})")


@dataclass(frozen=True, eq=False)
class Field:
    """Finite field GF(q) with dense lookup tables.

    Attributes
    ----------
    q : int
        Field order.
    characteristic : int
        The prime p with q = p^m.
    degree : int
        Extension degree m.
    add_table, mul_table : ndarray, shape (q, q)
        Sum and product of every element pair.
    inv_table : ndarray, shape (q,)
        Multiplicative inverses; entry 0 is unused and holds 0.
    neg_table : ndarray, shape (q,)
        Additive inverses.
    primitive_poly : int
        Defining polynomial in base-p digit encoding (0 for prime fields).
    """

    q: int
    characteristic: int
    degree: int
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    primitive_poly: int = 0

    @property
    def is_binary_extension(self) -> bool:
        return self.characteristic == 2

    @property
    def sub_table(self) -> np.ndarray:
        """``sub_table[a, b] = a - b``."""
        return self.add_table[:, self.neg_table]

    def _check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise FieldError(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        return int(self.add_table[self._check(a), self._check(b)])

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[self._check(a), self._check(b)])

    def neg(self, a: int) -> int:
        return int(self.neg_table[self._check(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def inv(self, a: int) -> int:
        if self._check(a) == 0:
            raise FieldError("zero has no multiplicative inverse")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def __repr__(self) -> str:
        return f"Field(q={self.q})"


@lru_cache(maxsize=None)
def field_new(q: int) -> Field:
    """Build (or fetch the cached) GF(q).

    Raises
    ------
    FieldError
        If q is not a prime power in [2, 256].
    """
    q = int(q)
    pm = _prime_power(q)
    if pm is None or q > MAX_ORDER:
        raise FieldError(f"unsupported field order {q}: need a prime power in [2, {MAX_ORDER}]")
    p, m = pm
    elems = np.arange(q)

    if m == 1:
        add = (elems[:, None] + elems[None, :]) % q
        mul = (elems[:, None] * elems[None, :]) % q
        poly = 0
    elif p == 2:
        poly = BINARY_POLYNOMIALS[m]
        add = elems[:, None] ^ elems[None, :]
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(1, q):
            for b in range(a, q):
                x, y, r = a, b, 0
                while y:
                    if y & 1:
                        r ^= x
                    y >>= 1
                    x <<= 1
                    if x & q:
                        x ^= poly
                mul[a, b] = mul[b, a] = r
    else:
        mod = _smallest_irreducible(p, m)
        poly = _from_digits(mod, p)
        digits = [_digits(a, p, m) for a in range(q)]
        add = np.zeros((q, q), dtype=np.int64)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                s = _from_digits([(x + y) % p for x, y in zip(digits[a], digits[b])], p)
                t = _from_digits(_polymulmod(digits[a], digits[b], mod, p), p)
                add[a, b] = add[b, a] = s
                mul[a, b] = mul[b, a] = t

    add = np.ascontiguousarray(add, dtype=np.int64)
    mul = np.ascontiguousarray(mul, dtype=np.int64)
    neg = np.argmin(add, axis=1).astype(np.int64)  # add[a, neg[a]] == 0
    inv = np.zeros(q, dtype=np.int64)
    ones = np.argwhere(mul == 1)
    inv[ones[:, 0]] = ones[:, 1]
    for t in (add, mul, neg, inv):
        t.setflags(write=False)
    return Field(q=q, characteristic=p, degree=m, add_table=add, mul_table=mul,
                 inv_table=inv, neg_table=neg, primitive_poly=poly)
