"""Command-line front end.

Exit codes: 0 ok, 1 input/format error, 2 precondition violated,
3 evaluation criteria not met, 4 false negative observed.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .filter import (
    DistSenseFilter,
    FormatError,
    HypothesisError,
    Mode,
    build_average,
    build_pointwise,
)
from .hamming import DimensionError, HammingVector, PointSet, VectorFormatError, read_vectors
from .oracle import (
    FalseNegativeError,
    SamplingError,
    fpr_exhaustive,
    fpr_per_point,
    fpr_sampled_average,
    far_threshold,
    reports_to_json,
    sample_far_many,
)
from .prng import check_test_vectors
from .signature import ParameterError, Regime, smod

EXIT_OK = 0
EXIT_FORMAT = 1
EXIT_PRECONDITION = 2
EXIT_CRITERIA = 3
EXIT_FALSE_NEGATIVE = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


_POW2 = re.compile(r"^\s*2\s*(?:\^|\*\*)\s*(-?\d+)\s*$")


def parse_eps(text: str) -> float:
    """Accepts decimals and ``2^-k`` (or ``2**-k``)."""
    m = _POW2.match(text)
    if m:
        return math.ldexp(1.0, int(m.group(1)))
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or 2^-k: {text!r}") from None


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _num(x: float) -> str:
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return repr(x) if isinstance(x, float) else str(x)


def _emit(key: str, value) -> None:
    if isinstance(value, bool):
        value = "true" if value else "false"
    elif isinstance(value, float):
        value = _num(value)
    print(f"{key}={value}")


def _read_points(path: str) -> PointSet:
    try:
        return read_vectors(path)
    except OSError as exc:
        raise CliError(EXIT_FORMAT, f"cannot read {path}: {exc}") from exc
    except VectorFormatError as exc:
        raise CliError(EXIT_FORMAT, f"{path}: {exc}") from exc


def _read_filter(path: str) -> DistSenseFilter:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(EXIT_FORMAT, f"cannot read {path}: {exc}") from exc
    try:
        return DistSenseFilter.from_bytes(data)
    except FormatError as exc:
        raise CliError(EXIT_FORMAT, f"{path}: {exc.code}: {exc}") from exc


def _validate(args, *names) -> None:
    for name in names:
        value = getattr(args, name, None)
        if value is None:
            continue
        if name in ("r", "n", "d", "trials", "seeds", "queries") and value < 1:
            raise CliError(EXIT_PRECONDITION, f"--{name} must be >= 1")
        if name == "eps" and not 0 < value < 1:
            raise CliError(EXIT_PRECONDITION, "--eps must be in (0, 1)")
        if name == "c" and not value >= 1:
            raise CliError(EXIT_PRECONDITION, "--c must be >= 1")


def summarize(f: DistSenseFilter) -> None:
    cfg = f.config
    print(f"# {'average' if f.mode is Mode.AVERAGE else 'point-wise'} filter, "
          f"{cfg.regime.name.lower().replace('_', '-')} regime")
    _emit("mode", "average" if f.mode is Mode.AVERAGE else "pointwise")
    _emit("regime", cfg.regime.name.lower())
    _emit("d", cfg.d)
    _emit("n", f.n)
    _emit("r", cfg.r)
    _emit("c", cfg.c)
    _emit("eps", f.eps)
    _emit("eps_per_signature", cfg.eps)
    _emit("m", cfg.m)
    _emit("c_mod", cfg.c_mod)
    _emit("c_div", cfg.c_div)
    _emit("delta", cfg.delta)
    _emit("psi", cfg.psi)
    _emit("entry_width", cfg.entry_width)
    _emit("bits_per_element", f.bits_per_element)
    print("# optimality flag: c >= 2 and r/c >= log2(n/eps); informational only")
    _emit("optimal", f.optimality_flag())


def cmd_build(args) -> int:
    _validate(args, "r", "c", "eps")
    S = _read_points(args.input)
    try:
        if args.mode == "average":
            f = build_average(S, args.r, args.eps, args.seed)
        else:
            regime = None if args.regime is None else Regime[args.regime.upper().replace("-", "_")]
            f = build_pointwise(S, args.r, args.c, args.eps, args.seed, regime)
    except HypothesisError as exc:
        raise CliError(EXIT_PRECONDITION, "; ".join(f"{h.text} violated" for h in exc.failed))
    except ParameterError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc
    try:
        Path(args.out).write_bytes(f.to_bytes())
    except OSError as exc:
        raise CliError(EXIT_FORMAT, f"cannot write {args.out}: {exc}") from exc
    summarize(f)
    _emit("out", args.out)
    return EXIT_OK


def _answer_line(yes: bool, gap: float, psi: float) -> str:
    return f"{'yes' if yes else 'no'} gap={_num(float(gap))} psi={_num(psi)}"


def cmd_query(args) -> int:
    f = _read_filter(args.filter)
    if args.q is not None:
        try:
            Q = PointSet.from_vectors([HammingVector.from_string(args.q)])
        except (VectorFormatError, ValueError) as exc:
            raise CliError(EXIT_FORMAT, str(exc)) from exc
    else:
        Q = _read_points(args.batch)
    if Q.d != f.d:
        raise CliError(EXIT_PRECONDITION, f"query dimension {Q.d} does not match filter d={f.d}")
    yes, best, _ = f.query_many(Q)
    for y, g in zip(yes, best):
        print(_answer_line(bool(y), g, f.config.psi))
    return EXIT_OK


def cmd_eval(args) -> int:
    _validate(args, "trials", "seeds")
    f = _read_filter(args.filter)
    S = _read_points(args.input)
    if S.d != f.d:
        raise CliError(EXIT_PRECONDITION, f"input dimension {S.d} does not match filter d={f.d}")
    rng = np.random.default_rng(args.rng_seed)
    try:
        if args.mode == "exhaustive":
            reports = [fpr_exhaustive(f, S)]
        elif args.mode == "sampled":
            reports = [fpr_sampled_average(f, S, args.trials, rng)]
        else:
            far = sample_far_many(S, far_threshold(f), args.trials, rng)
            seeds = [(f.seed + k) % (1 << 64) for k in range(args.seeds)]
            reports = fpr_per_point(S, f.config.r, f.config.c, f.eps, far, seeds, f.mode)
    except FalseNegativeError as exc:
        print(f"# FALSE NEGATIVE: {exc}", file=sys.stderr)
        return EXIT_FALSE_NEGATIVE
    except (SamplingError, ValueError, ParameterError) as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc

    passed = all(r.passed for r in reports)
    print(f"# {args.mode} evaluation, {len(reports)} report(s), 99% Wilson intervals")
    for i, rep in enumerate(reports):
        if len(reports) > 1:
            print(f"# point {i}")
        for k, v in rep.as_dict().items():
            _emit(k, "none" if v is None else v)
    if reports[0].near_count:
        _emit("near_count", reports[0].near_count)
    _emit("overall_pass", passed)
    if args.report:
        try:
            Path(args.report).write_text(reports_to_json(reports, overall_pass=passed))
        except OSError as exc:
            raise CliError(EXIT_FORMAT, f"cannot write {args.report}: {exc}") from exc
    return EXIT_OK if passed else EXIT_CRITERIA


def cmd_bounds(args) -> int:
    _validate(args, "n", "d", "r", "c", "eps")
    try:
        rep = bounds_mod.bound_report(args.n, args.d, args.r, args.c, args.eps, args.delta_prime)
    except ValueError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc
    print(f"# lower bounds in bits ({rep.label})")
    for k, v in rep.rows():
        _emit(k, v)
    print("# hypotheses: satisfied | condition | lhs | rhs (log2 where marked)")
    for h in rep.hypotheses:
        scale = " (log2)" if h.log2 else ""
        print(f"hypothesis={'true' if h.satisfied else 'false'} | {h.text} | "
              f"{_num(float(h.lhs))} | {_num(float(h.rhs))}{scale}")
    if args.json:
        Path(args.json).write_text(json.dumps(rep.as_dict(), indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    _validate(args, "d", "n", "r", "c", "eps", "seeds", "queries")
    rng = np.random.default_rng(args.seed)
    S = PointSet.random(args.n, args.d, rng)
    Q = PointSet.random(args.queries, args.d, rng)
    build_s = []
    query_s = []
    sizes = set()
    try:
        for k in range(args.seeds):
            t0 = time.perf_counter()
            f = build_pointwise(S, args.r, args.c, args.eps, (args.seed + k) % (1 << 64))
            blob = f.to_bytes()
            t1 = time.perf_counter()
            f.query_many(Q)
            t2 = time.perf_counter()
            build_s.append(t1 - t0)
            query_s.append(t2 - t1)
            sizes.add(len(blob))
    except ParameterError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc)) from exc
    payload_bits = 8 * f.payload_bytes_per_point
    naive = args.r * math.log2(args.d / args.r) if args.r < args.d else 0.0
    print(f"# bench over {args.seeds} seed(s); timings are medians")
    _emit("d", args.d)
    _emit("n", f.n)
    _emit("m", f.config.m)
    _emit("build_seconds", float(np.median(build_s)))
    _emit("queries_per_second", args.queries / max(float(np.median(query_s)), 1e-12))
    _emit("file_bytes", max(sizes))
    _emit("bits_per_element", float(payload_bits))
    _emit("raw_bits_per_element", args.d)
    _emit("ratio_vs_raw", payload_bits / args.d)
    print("# naive explicit-storage reference: r*log2(d/r) bits per element")
    _emit("naive_bits_per_element", naive)
    _emit("sizes_identical_across_seeds", len(sizes) == 1)
    return EXIT_OK


def cmd_selftest(args) -> int:
    bad = check_test_vectors()
    _emit("prng_vectors_failed", len(bad))
    for (seed, col, idx, want), got in bad:
        print(f"# mismatch seed={seed:#x} column={col} index={idx} want={want:016x} got={got:016x}")
    smod_fail = 0
    for q in range(1, 65):
        a = np.arange(-10 * q, 10 * q + 1)
        s = smod(a, q)
        ok = ((s - a) % q == 0) & (s >= -(q // 2)) & (s < (q + 1) // 2) & (np.abs(s) <= np.abs(a))
        smod_fail += int((~ok).sum())
    _emit("smod_table_failed", smod_fail)
    passed = not bad and not smod_fail
    _emit("pass", passed)
    return EXIT_OK if passed else EXIT_CRITERIA


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsfilter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a filter from a vector file")
    b.add_argument("--input", required=True)
    b.add_argument("--r", type=int, required=True)
    b.add_argument("--c", type=float, default=2.0)
    b.add_argument("--eps", type=parse_eps, required=True)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--mode", choices=("pointwise", "average"), default="pointwise")
    b.add_argument("--regime", choices=("constant-c", "large-c"))
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="query a filter")
    q.add_argument("--filter", required=True)
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--q")
    g.add_argument("--batch")
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("eval", help="measure false-positive rates")
    e.add_argument("--filter", required=True)
    e.add_argument("--input", required=True)
    e.add_argument("--mode", choices=("exhaustive", "sampled", "per-point"), default="sampled")
    e.add_argument("--trials", type=int, default=10_000,
                   help="samples (sampled) or far points (per-point)")
    e.add_argument("--seeds", type=int, default=200)
    e.add_argument("--rng-seed", type=int, default=0, help="seed of the sampling RNG")
    e.add_argument("--report", help="write the structured JSON report here")
    e.set_defaults(func=cmd_eval)

    bd = sub.add_parser("bounds", help="evaluate lower bounds and their hypotheses")
    for name, typ in (("n", int), ("d", int), ("r", int), ("c", float)):
        bd.add_argument(f"--{name}", type=typ, required=True)
    bd.add_argument("--eps", type=parse_eps, required=True)
    bd.add_argument("--delta-prime", type=float, default=bounds_mod.DEFAULT_DELTA_PRIME)
    bd.add_argument("--json")
    bd.set_defaults(func=cmd_bounds)

    be = sub.add_parser("bench", help="space and speed on random data")
    be.add_argument("--d", type=int, default=1024)
    be.add_argument("--n", type=int, default=100)
    be.add_argument("--r", type=int, default=8)
    be.add_argument("--c", type=float, default=2.0)
    be.add_argument("--eps", type=parse_eps, default=2 ** -6)
    be.add_argument("--seeds", type=int, default=3)
    be.add_argument("--queries", type=int, default=1000)
    be.add_argument("--seed", type=_seed, default=0)
    be.set_defaults(func=cmd_bench)

    st = sub.add_parser("selftest", help="PRNG reference vectors and smod table")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_FORMAT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DimensionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
