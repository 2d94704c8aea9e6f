"""BPSK over AWGN and conversion of received samples to symbol cost tables.

Conventions
-----------
* Each GF(2^m) symbol is split into m bits, most significant bit first;
  bit b is sent as amplitude ``1 - 2b``.
* Unit energy per BPSK use, so the noise variance per real dimension is
  ``sigma2 = 1 / (2 * rate * 10**(ebn0_db / 10))``.
* Noise comes from ``numpy.random.Generator(PCG64(seed))`` and
  ``standard_normal``; a seed may be an int or a ``SeedSequence``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .galois import Field


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float
    bits_per_symbol: int

    def __post_init__(self):
        if not 0 < self.rate < 1:
            raise ChannelError(f"code rate must lie in (0, 1), got {self.rate}")
        if self.bits_per_symbol < 1:
            raise ChannelError("bits_per_symbol must be positive")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


def _bits_per_symbol(field: Field) -> int:
    if field.characteristic != 2:
        raise ChannelError(f"BPSK mapping needs a field of order 2^m, got q={field.q}")
    return field.degree


def symbol_bits(field: Field) -> np.ndarray:
    """``(q, m)`` table of bits of every symbol, MSB first."""
    m = _bits_per_symbol(field)
    shifts = np.arange(m - 1, -1, -1)
    return (np.arange(field.q)[:, None] >> shifts[None, :]) & 1


def modulate(x, field: Field) -> np.ndarray:
    """BPSK amplitudes for a symbol vector, ``N * m`` values."""
    bits = symbol_bits(field)[np.asarray(x, dtype=np.int64)]
    return (1.0 - 2.0 * bits).reshape(-1)


def transmit(amplitudes, params: ChannelParams, seed) -> np.ndarray:
    """Add white Gaussian noise of variance ``params.sigma2`` to every sample."""
    rng = np.random.Generator(np.random.PCG64(seed))
    amplitudes = np.asarray(amplitudes, dtype=np.float64)
    noise = rng.standard_normal(amplitudes.shape)
    return amplitudes + math.sqrt(params.sigma2) * noise


def symbol_costs(frame, params: ChannelParams, field: Field) -> np.ndarray:
    """Negative log-likelihood cost tables, shifted so each table's minimum is 0.

    ``f_n(x) = sum over the bits of x of (y - a)^2 / (2 sigma2)`` with a the
    BPSK amplitude of the bit.  The per-table shift drops terms common to all
    symbols; only cost differences (LLRs) carry information.
    """
    sigma2 = params.sigma2
    if not sigma2 > 0:
        raise ChannelError("noise variance must be positive")
    m = _bits_per_symbol(field)
    y = np.asarray(frame, dtype=np.float64)
    if y.size % m:
        raise ChannelError(f"frame length {y.size} is not a multiple of {m} bits per symbol")
    y = y.reshape(-1, 1, m)
    amp = (1.0 - 2.0 * symbol_bits(field))[None, :, :]
    sq = (y - amp) ** 2
    raw = sq[:, :, 0].copy()
    for k in range(1, m):
        raw += sq[:, :, k]
    raw /= 2.0 * sigma2
    return raw - raw.min(axis=1, keepdims=True)


def costs_to_probs(costs) -> np.ndarray:
    """Per-symbol probabilities ``exp(-f)`` renormalized to sum 1."""
    costs = np.asarray(costs, dtype=np.float64)
    p = np.exp(-(costs - costs.min(axis=-1, keepdims=True)))
    return p / p.sum(axis=-1, keepdims=True)


def ebn0_sweep(start_db: float, stop_db: float, step_db: float, *,
               rate: float, bits_per_symbol: int) -> list[ChannelParams]:
    """Channel parameters from ``start_db`` to ``stop_db`` inclusive."""
    if not step_db > 0:
        raise ChannelError("sweep step must be positive")
    if start_db > stop_db:
        raise ChannelError("sweep start exceeds stop")
    # the tolerance keeps a stop value that is a whole number of steps away
    count = int(math.floor((stop_db - start_db) / step_db + 1e-9)) + 1
    points = [round(start_db + i * step_db, 10) for i in range(count)]
    return [ChannelParams(p, rate, bits_per_symbol) for p in points]
