"""Command-line entry point: ``gfldpc simulate`` and ``gfldpc bench``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .channel import ebn0_sweep
from .code_graph import CodeError, load_code, random_regular_code
from .decoder import VARIANTS, DecoderConfig, DecoderError
from .galois import FieldError, field_new
from .sim import RunConfig, run_ber_sweep, run_checknode_bench, write_bench_csv, write_csv


class UsageError(Exception):
    pass


def _random_params(text: str) -> tuple[int, int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        parts = ()
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected N,M,dv,q")
    return parts


def _snr_range(text: str) -> tuple[float, float, float]:
    try:
        a, b, s = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected START:STOP:STEP") from None
    return a, b, s


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of integers") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gfldpc", description="Non-binary LDPC min-sum decoding simulator.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="Monte-Carlo BER/SER/FER sweep")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--code", metavar="PATH", help="parity-check matrix file")
    src.add_argument("--random", type=_random_params, metavar="N,M,dv,q",
                     help="random regular code")
    s.add_argument("--code-seed", type=_seed, default=1, help="seed for --random (default 1)")
    s.add_argument("--variant", choices=VARIANTS, default="normalized", help="min-sum variant")
    s.add_argument("--alpha", type=float, default=0.865, help="scale factor (normalized)")
    s.add_argument("--beta", type=float, default=0.0, help="offset (offset variant)")
    s.add_argument("--max-iter", type=int, default=300, help="iteration cap")
    s.add_argument("--nm", type=int, default=None, help="candidates kept per message (default q)")
    s.add_argument("--snr", type=_snr_range, required=True, metavar="A:B:STEP",
                   help="Eb/N0 sweep in dB, endpoints inclusive")
    s.add_argument("--min-frame-errors", type=int, default=100,
                   help="stop a point after this many frame errors")
    s.add_argument("--max-trials", type=int, default=100_000, help="frame cap per point")
    s.add_argument("--seed", type=_seed, default=0, help="master Monte-Carlo seed")
    s.add_argument("--workers", type=int, default=1, help="worker processes")
    s.add_argument("--spa", action="store_true", help="decode with sum-product instead")
    s.add_argument("--random-codewords", action="store_true",
                   help="transmit random codewords instead of the all-zero word")
    s.add_argument("--out", metavar="PATH", help="CSV destination (default stdout)")

    b = sub.add_parser("bench", help="check-node update timing")
    b.add_argument("--q", type=int, required=True, help="field order")
    b.add_argument("--dc", type=int, required=True, help="check degree")
    b.add_argument("--nm", type=_int_list, default=[], metavar="LIST",
                   help="comma-separated candidate counts to time")
    b.add_argument("--reps", type=int, default=200, help="updates per timing round")
    b.add_argument("--out", metavar="PATH", help="CSV destination (default stdout)")
    return p


def _emit(data: bytes, out: str | None) -> None:
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())


def _simulate(args) -> int:
    if args.max_iter < 0:
        raise UsageError("--max-iter must be non-negative")
    try:
        decoder = DecoderConfig(variant=args.variant, alpha=args.alpha, beta=args.beta,
                                max_iterations=args.max_iter, n_m=args.nm)
    except DecoderError as exc:
        raise UsageError(str(exc)) from None
    if args.random:
        n, m, dv, q = args.random
        code = random_regular_code(field_new(q), n, m, dv, seed=args.code_seed)
    else:
        code = load_code(args.code)
    a, b, step = args.snr
    points = [p.ebn0_db for p in ebn0_sweep(a, b, step, rate=code.rate,
                                             bits_per_symbol=max(code.field.degree, 1))]
    cfg = RunConfig(code=code, ebn0_db=points, decoder=decoder, spa=args.spa,
                    min_frame_errors=args.min_frame_errors, max_trials=args.max_trials,
                    seed=args.seed, workers=args.workers, random_codewords=args.random_codewords)
    _emit(write_csv(run_ber_sweep(cfg)), args.out)
    return 0


def _bench(args) -> int:
    if args.reps < 1 or args.dc < 1:
        raise UsageError("--reps and --dc must be positive")
    rows = run_checknode_bench(field_new(args.q), args.dc, args.nm, args.reps)
    _emit(write_bench_csv(rows), args.out)
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "simulate":
            return _simulate(args)
        return _bench(args)
    except UsageError as exc:
        msg = str(exc)
        print(msg if "error:" in msg else f"gfldpc: error: {msg}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (FieldError, CodeError, DecoderError, ValueError, OSError, RuntimeError) as exc:
        print(f"gfldpc: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main())
