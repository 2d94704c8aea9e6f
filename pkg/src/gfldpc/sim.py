"""Monte-Carlo BER/SER/FER sweeps and check-node timing.

Determinism contract: trial ``t`` at sweep point ``i`` draws all its
randomness from ``SeedSequence(seed, spawn_key=(i, t))``.  Trials are run in
fixed-size chunks (optionally on a process pool) and folded back in trial
order; the stopping rule cuts at the exact trial that reaches the target
error count, so reports do not depend on the number of workers.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelParams, costs_to_probs, modulate, symbol_bits, symbol_costs, transmit
from .code_graph import Code, is_codeword, random_codeword
from .decoder import DecoderConfig, decode, decode_sumproduct
from .galois import Field
from .trellis import ORACLE_LIMIT, _repeat_minsum_kernel, _tables, checknode_oracle

CSV_HEADER = ["ebn0_db", "trials", "bit_errors", "symbol_errors", "frame_errors",
              "ber", "ser", "fer", "avg_iterations"]
CHUNK = 32


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a sweep needs.  ``spa=True`` swaps in sum-product decoding."""

    code: Code
    ebn0_db: Sequence[float]
    decoder: DecoderConfig = field(default_factory=DecoderConfig)
    spa: bool = False
    min_frame_errors: int = 100
    max_trials: int = 100_000
    seed: int = 0
    workers: int = 1
    random_codewords: bool = False

    def __post_init__(self):
        if self.code.field.characteristic != 2:
            raise SimulationError("BPSK simulation needs a field of order 2^m")
        if self.max_trials < 1:
            raise SimulationError("max_trials must be positive")
        if self.min_frame_errors < 1:
            raise SimulationError("min_frame_errors must be positive")
        if self.workers < 1:
            raise SimulationError("workers must be positive")
        if not 0 <= self.seed < 2**64:
            raise SimulationError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class TrialReport:
    ebn0_db: float
    trials: int
    bit_errors: int
    symbol_errors: int
    frame_errors: int
    sum_iterations: int
    bits_per_frame: int
    symbols_per_frame: int

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.trials * self.bits_per_frame) if self.trials else 0.0

    @property
    def ser(self) -> float:
        return self.symbol_errors / (self.trials * self.symbols_per_frame) if self.trials else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.trials if self.trials else 0.0

    @property
    def avg_iterations(self) -> float:
        return self.sum_iterations / self.trials if self.trials else 0.0


def _run_trials(cfg: RunConfig, point: int, first: int, count: int) -> np.ndarray:
    """Rows ``(bit_errors, symbol_errors, frame_error, iterations)`` for consecutive trials."""
    code = cfg.code
    F = code.field
    params = ChannelParams(float(cfg.ebn0_db[point]), code.rate, F.degree)
    bits = symbol_bits(F)
    zero = np.zeros(code.n_vars, dtype=np.int64)
    out = np.zeros((count, 4), dtype=np.int64)
    for i in range(count):
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(point, first + i))
        noise_seed, word_seed = ss.spawn(2)
        if cfg.random_codewords:
            x = random_codeword(code, int(word_seed.generate_state(1, np.uint64)[0]))
        else:
            x = zero
        y = transmit(modulate(x, F), params, noise_seed)
        f = symbol_costs(y, params, F)
        if cfg.spa:
            res = decode_sumproduct(code, costs_to_probs(f), cfg.decoder.max_iterations,
                                    cfg.decoder.check_at_zero)
        else:
            res = decode(code, f, cfg.decoder)
        if res.converged and not is_codeword(code, res.codeword):
            raise SimulationError("decoder reported convergence on a non-codeword")
        wrong = res.codeword != x
        out[i, 0] = int(np.count_nonzero(bits[res.codeword] != bits[x]))
        out[i, 1] = int(np.count_nonzero(wrong))
        out[i, 2] = int(wrong.any())
        out[i, 3] = res.iterations_used
    return out


def _sweep_point(cfg: RunConfig, point: int, pool) -> TrialReport:
    totals = np.zeros(4, dtype=np.int64)
    done = 0
    width = CHUNK * (cfg.workers if pool is not None else 1)
    while done < cfg.max_trials:
        starts = list(range(done, min(done + width, cfg.max_trials), CHUNK))
        sizes = [min(CHUNK, cfg.max_trials - s) for s in starts]
        if pool is None:
            blocks = [_run_trials(cfg, point, s, n) for s, n in zip(starts, sizes)]
        else:
            blocks = list(pool.map(_run_trials, [cfg] * len(starts), [point] * len(starts),
                                   starts, sizes))
        rows = np.concatenate(blocks)
        # stop at the exact trial that reaches the frame-error target
        need = cfg.min_frame_errors - totals[2]
        hits = np.flatnonzero(np.cumsum(rows[:, 2]) >= need)
        if hits.size:
            rows = rows[:hits[0] + 1]
        totals += rows.sum(axis=0)
        done += rows.shape[0]
        if hits.size:
            break
    m = cfg.code.field.degree
    return TrialReport(ebn0_db=float(cfg.ebn0_db[point]), trials=done,
                       bit_errors=int(totals[0]), symbol_errors=int(totals[1]),
                       frame_errors=int(totals[2]), sum_iterations=int(totals[3]),
                       bits_per_frame=cfg.code.n_vars * m, symbols_per_frame=cfg.code.n_vars)


def run_ber_sweep(config: RunConfig) -> list[TrialReport]:
    """Simulate every sweep point until the stopping rule fires."""
    if config.workers == 1:
        return [_sweep_point(config, i, None) for i in range(len(config.ebn0_db))]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return [_sweep_point(config, i, pool) for i in range(len(config.ebn0_db))]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def write_csv(reports: Iterable[TrialReport], destination=None) -> bytes:
    """Serialize reports sorted by Eb/N0; also written to ``destination`` if given."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(reports, key=lambda r: r.ebn0_db):
        w.writerow([_fmt(r.ebn0_db), r.trials, r.bit_errors, r.symbol_errors, r.frame_errors,
                    _fmt(r.ber), _fmt(r.ser), _fmt(r.fer), _fmt(r.avg_iterations)])
    data = buf.getvalue().encode()
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(data)
        else:
            with open(destination, "wb") as fh:
                fh.write(data)
    return data


def read_csv(data: bytes | str) -> list[dict]:
    text = data.decode() if isinstance(data, bytes) else data
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append({k: (int(v) if k in ("trials", "bit_errors", "symbol_errors", "frame_errors")
                         else float(v)) for k, v in rec.items()})
    return rows


# ---------------------------------------------------------------------------
# check-node benchmark
# ---------------------------------------------------------------------------

BENCH_HEADER = ["q", "d_c", "method", "n_m", "seconds_per_update"]


def _best_time(fn, reps: int, rounds: int = 5) -> float:
    fn()  # warm-up / compile
    best = np.inf
    for _ in range(rounds):
        t0 = time.perf_counter()
        for _ in range(reps):
            fn()
        best = min(best, (time.perf_counter() - t0) / reps)
    return best


def time_checknode(field: Field, d_c: int, n_m: int | None = None, reps: int = 200,
                   seed: int = 0, rounds: int = 5) -> float:
    """Best-of-``rounds`` mean wall time of one check-node update, in seconds.

    Inputs are random real costs; ``n_m=None`` times the full update.
    """
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(1, field.q, size=d_c).astype(np.int64)
    g = rng.random((d_c, field.q)) * 10
    k = field.q if n_m is None else n_m
    simplified = field.is_binary_extension
    tabs = _tables(field)
    # one kernel call runs ``reps`` updates so Python overhead stays out of the figure
    return _best_time(lambda: _repeat_minsum_kernel(coeffs, g, k, *tabs, simplified, reps),
                      1, rounds) / reps


def time_oracle(field: Field, d_c: int, reps: int = 3, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(1, field.q, size=d_c)
    g = rng.integers(0, 100, size=(d_c, field.q)).astype(float)
    return _best_time(lambda: checknode_oracle(field, coeffs, g), reps, rounds=3)


def run_checknode_bench(field: Field, d_c: int, n_m_list: Sequence[int],
                        repetitions: int = 200, seed: int = 0) -> list[dict]:
    """Timing rows for the full update, each truncation level and (if small) the oracle."""
    rows = [{"q": field.q, "d_c": d_c, "method": "full", "n_m": field.q,
             "seconds_per_update": time_checknode(field, d_c, None, repetitions, seed)}]
    for k in n_m_list:
        if not 1 <= k <= field.q:
            raise SimulationError(f"n_m={k} outside [1, {field.q}]")
        rows.append({"q": field.q, "d_c": d_c, "method": "truncated", "n_m": int(k),
                     "seconds_per_update": time_checknode(field, d_c, k, repetitions, seed)})
    if field.q ** (d_c - 1) <= ORACLE_LIMIT // 10:
        rows.append({"q": field.q, "d_c": d_c, "method": "oracle", "n_m": field.q,
                     "seconds_per_update": time_oracle(field, d_c, seed=seed)})
    return rows


def write_bench_csv(rows: Iterable[dict], destination=None) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_HEADER)
    for r in rows:
        w.writerow([r["q"], r["d_c"], r["method"], r["n_m"], _fmt(r["seconds_per_update"])])
    data = buf.getvalue().encode()
    if destination is not None:
        with open(destination, "wb") as fh:
            fh.write(data)
    return data
