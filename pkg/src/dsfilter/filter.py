"""Distance-sensitive membership filters built from stored signatures."""

from __future__ import annotations

import enum
import math
import struct
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .hamming import (
    MAX_DIMENSION,
    MAX_POINTS,
    DimensionError,
    HammingVector,
    PointSet,
    pack_bits,
)
from .signature import (
    LARGE_C_THRESHOLD,
    FilterConfig,
    ParameterError,
    Regime,
    derive_params,
    entry_range,
    gap_vector,
    signature_many,
)


class Mode(enum.IntEnum):
    POINT_WISE = 0
    AVERAGE = 1


@dataclass(frozen=True)
class Hypothesis:
    """One evaluated side condition.  ``lhs``/``rhs`` are log2 values when ``log2`` is set."""

    text: str
    satisfied: bool
    lhs: float
    rhs: float
    log2: bool = False


class HypothesisError(ParameterError):
    def __init__(self, failed: list[Hypothesis]):
        self.failed = failed
        super().__init__("hypothesis violated: " + "; ".join(h.text for h in failed))


def average_hypotheses(n: int, d: int, r: int, eps: float) -> list[Hypothesis]:
    """Side conditions of the (r, 1, eps) average-error construction.

    ``r <= sqrt(d)``, ``n <= 2^(d/3)`` and ``eps >= 2^-(d-2)``, each decided in
    exact arithmetic.
    """
    eps_q = Fraction(eps)
    return [
        Hypothesis("r <= sqrt(d)", r * r <= d, float(r), math.sqrt(d)),
        Hypothesis("n <= 2^(d/3)", n ** 3 <= 2 ** d, math.log2(n), d / 3, log2=True),
        Hypothesis(
            "eps >= 1/2^(d-2)",
            eps_q * 2 ** (d - 2) >= 1,
            math.log2(eps),
            -(d - 2.0),
            log2=True,
        ),
    ]


@dataclass(frozen=True)
class FilterAnswer:
    yes: bool
    best_gap: float
    argmin_index: int | None

    @property
    def decision(self) -> str:
        return "yes" if self.yes else "no"


@dataclass(frozen=True, eq=False)
class DistSenseFilter:
    """``n`` signatures under one shared seed plus the parameters to compare them.

    ``config.eps`` is the per-signature error; ``eps`` is the filter-level
    target it was derived from.
    """

    config: FilterConfig
    seed: int
    eps: float
    mode: Mode
    signatures: np.ndarray
    hypotheses: tuple[Hypothesis, ...] = field(default=())

    def __post_init__(self):
        sig = np.array(self.signatures, dtype=np.int64)
        if sig.ndim != 2 or sig.shape[1] != self.config.m:
            raise ValueError(f"signatures must have shape (n, {self.config.m})")
        sig.flags.writeable = False
        object.__setattr__(self, "signatures", sig)

    @property
    def n(self) -> int:
        return self.signatures.shape[0]

    @property
    def d(self) -> int:
        return self.config.d

    def query(self, q: HammingVector) -> FilterAnswer:
        if q.d != self.d:
            raise DimensionError(f"query dimension {q.d} does not match filter d={self.d}")
        yes, best, arg = self.query_many(PointSet(q.d, q.words))
        return FilterAnswer(bool(yes[0]), float(best[0]), int(arg[0]))

    def query_many(self, Q, chunk: int = 256) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Decisions, minimum gaps and argmin members for a batch of queries.

        ``Q`` is a PointSet or an ``(N, d)`` bit array.
        """
        if isinstance(Q, PointSet) and Q.d != self.d:
            raise DimensionError(f"query dimension {Q.d} does not match filter d={self.d}")
        sq = signature_many(Q, self.config, self.seed)
        parity = self.config.regime is Regime.CONSTANT_C
        if parity:
            sq = _parity_words(sq)
            stored = self._parity
        best = np.empty(sq.shape[0], dtype=np.int64)
        arg = np.empty(sq.shape[0], dtype=np.int64)
        for lo in range(0, sq.shape[0], chunk):
            if parity:
                # entries are 0/-1, so |smod(a - b, 2)| is the xor of their low bits
                g = np.bitwise_count(sq[lo:lo + chunk, None, :] ^ stored[None, :, :]).sum(
                    axis=2, dtype=np.int64)
            else:
                block = gap_vector(sq[lo:lo + chunk, None, :], self.signatures[None, :, :],
                                   self.config)
                g = np.abs(block).sum(axis=2)
            arg[lo:lo + chunk] = g.argmin(axis=1)
            best[lo:lo + chunk] = g.min(axis=1)
        return best <= self.config.psi, best.astype(np.float64), arg

    @property
    def _parity(self) -> np.ndarray:
        cached = self.__dict__.get("_parity_cache")
        if cached is None:
            cached = _parity_words(self.signatures)
            object.__setattr__(self, "_parity_cache", cached)
        return cached

    @property
    def payload_bytes_per_point(self) -> int:
        return (self.config.signature_bits + 7) // 8

    @property
    def bits_per_element(self) -> float:
        return 8.0 * self.payload_bytes_per_point

    def optimality_flag(self) -> bool:
        """``c >= 2`` and ``r/c >= log2(n/eps)``; reported only, not a guarantee."""
        return self.config.c >= 2 and self.config.r / self.config.c >= math.log2(self.n / self.eps)

    def to_bytes(self) -> bytes:
        return serialize(self)

    @classmethod
    def from_bytes(cls, data: bytes) -> DistSenseFilter:
        return deserialize(data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DistSenseFilter):
            return NotImplemented
        return (
            self.config == other.config
            and self.seed == other.seed
            and self.eps == other.eps
            and self.mode == other.mode
            and np.array_equal(self.signatures, other.signatures)
        )

    __hash__ = None


def _parity_words(sigs: np.ndarray) -> np.ndarray:
    return pack_bits((sigs & 1).astype(np.uint8))


def _check_build(S: PointSet, eps: float, seed: int) -> PointSet:
    if S.n == 0:
        raise ParameterError("cannot build a filter on an empty set")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must be in (0, 1), got {eps}")
    if not 0 <= seed < 1 << 64:
        raise ParameterError(f"seed must be a 64-bit unsigned value, got {seed}")
    return S.unique()


def build_pointwise(
    S: PointSet, r: int, c: float, eps: float, seed: int, regime: Regime | None = None
) -> DistSenseFilter:
    """Filter with point-wise error ``eps``: each signature gets ``eps / n``."""
    S = _check_build(S, eps, seed)
    config = derive_params(S.d, r, c, eps / S.n, regime)
    return DistSenseFilter(config, seed, eps, Mode.POINT_WISE, signature_many(S, config, seed))


def build_average(S: PointSet, r: int, eps: float, seed: int) -> DistSenseFilter:
    """Average-error filter with approximation factor 1.

    Realised as a point-wise ``(r, r, eps/4)`` filter; the side conditions
    ``r <= sqrt(d)``, ``n <= 2^(d/3)``, ``eps >= 2^-(d-2)`` must hold.
    """
    if r < 2:
        raise ParameterError(f"average mode needs r >= 2 so that c = r exceeds 1 (r={r})")
    S = _check_build(S, eps, seed)
    hyps = average_hypotheses(S.n, S.d, r, eps)
    failed = [h for h in hyps if not h.satisfied]
    if failed:
        raise HypothesisError(failed)
    quarter = eps / 4
    config = derive_params(S.d, r, float(r), quarter / S.n)
    sigs = signature_many(S, config, seed)
    return DistSenseFilter(config, seed, eps, Mode.AVERAGE, sigs, tuple(hyps))


def per_signature_eps(eps: float, n: int, mode: Mode) -> float:
    return eps / n if mode is Mode.POINT_WISE else (eps / 4) / n


# Binary format -----------------------------------------------------------

MAGIC = b"DSBF"
VERSION = 1
_HEADER = struct.Struct("<HBBIIddQQdIdiBQQ")
_CRC = struct.Struct("<I")


class FormatError(ValueError):
    code = "format"


class BadMagicError(FormatError):
    code = "bad-magic"


class VersionError(FormatError):
    code = "bad-version"


class TruncatedError(FormatError):
    code = "truncated"


class ChecksumError(FormatError):
    code = "checksum"


class HeaderRangeError(FormatError):
    code = "header-range"


def _pack_payload(sigs: np.ndarray, lo: int, w: int) -> bytes:
    offsets = (sigs - lo).astype(np.uint64)
    shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
    bits = ((offsets[:, :, None] >> shifts) & np.uint64(1)).astype(np.uint8)
    return np.packbits(bits.reshape(sigs.shape[0], -1), axis=1, bitorder="big").tobytes()


def _unpack_payload(raw: bytes, n: int, m: int, lo: int, w: int) -> np.ndarray:
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(n, -1)
    bits = np.unpackbits(rows, axis=1, count=m * w, bitorder="big").reshape(n, m, w)
    weights = (np.uint64(1) << np.arange(w - 1, -1, -1, dtype=np.uint64))
    offsets = (bits.astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    return offsets.astype(np.int64) + lo


def serialize(f: DistSenseFilter) -> bytes:
    cfg = f.config
    lo, _ = cfg.entry_range
    w = cfg.entry_width
    header = _HEADER.pack(
        VERSION, int(f.mode), int(cfg.regime), cfg.d, cfg.r, cfg.c, f.eps,
        cfg.m, cfg.c_mod, cfg.c_div, cfg.delta, cfg.psi, lo, w, f.seed, f.n,
    )
    body = header + _pack_payload(f.signatures, lo, w)
    return MAGIC + body + _CRC.pack(zlib.crc32(body))


def deserialize(data: bytes) -> DistSenseFilter:
    data = bytes(data)
    if len(data) < len(MAGIC):
        raise TruncatedError("shorter than the magic number")
    if data[:4] != MAGIC:
        raise BadMagicError(f"bad magic {data[:4]!r}")
    if len(data) < 4 + _HEADER.size + _CRC.size:
        raise TruncatedError("header truncated")
    (version, mode, regime, d, r, c, eps, m, c_mod, c_div, delta, psi,
     lo, w, seed, n) = _HEADER.unpack_from(data, 4)
    if version != VERSION:
        raise VersionError(f"unsupported version {version}")
    if not 1 <= w <= 63:
        raise HeaderRangeError(f"entry width {w} out of range")
    if not 1 <= m < 1 << 32 or not 1 <= n <= MAX_POINTS:
        raise HeaderRangeError(f"m={m} or n={n} out of range")
    per_point = (m * w + 7) // 8
    total = 4 + _HEADER.size + n * per_point + _CRC.size
    if len(data) < total:
        raise TruncatedError(f"expected {total} bytes, got {len(data)}")
    if len(data) > total:
        raise FormatError(f"{len(data) - total} trailing bytes")
    body = data[4:-_CRC.size]
    (stored_crc,) = _CRC.unpack_from(data, total - _CRC.size)
    if zlib.crc32(body) != stored_crc:
        raise ChecksumError("crc32 mismatch")

    problems = []
    if mode not in (0, 1):
        problems.append(f"mode={mode}")
    if regime not in (0, 1):
        problems.append(f"regime={regime}")
    if not 1 <= d <= MAX_DIMENSION:
        problems.append(f"d={d}")
    if r < 1:
        problems.append(f"r={r}")
    if not c > 1:
        problems.append(f"c={c}")
    if not 0 < eps < 1:
        problems.append(f"eps={eps}")
    if c_mod < 2 or not c_div > 0 or delta < 1:
        problems.append("c_mod/c_div/delta")
    if not psi >= 0:
        problems.append(f"psi={psi}")
    if regime == 0 and (c_mod != 2 or c_div != 1.0 or delta != 1):
        problems.append("constant-c regime requires c_mod=2, c_div=1, delta=1")
    if regime == 1 and not c >= LARGE_C_THRESHOLD:
        problems.append(f"large-c regime requires c >= {LARGE_C_THRESHOLD}")
    if mode == 1 and c != r:
        problems.append("average mode requires c = r")
    if c_mod >= 2 and c_div > 0:
        lo_x, hi_x = entry_range(c_mod, c_div)
        if lo != lo_x or w != (hi_x - lo_x).bit_length():
            problems.append("entry encoding does not match c_mod/c_div")
    if problems:
        raise HeaderRangeError("out-of-range header values: " + ", ".join(problems))

    sigs = _unpack_payload(body[_HEADER.size:], n, m, lo, w)
    if sigs.size and sigs.max() > hi_x:
        raise HeaderRangeError("signature entry above the encodable range")
    fmode = Mode(mode)
    config = FilterConfig(
        d, r, c, per_signature_eps(eps, n, fmode), Regime(regime), m, c_mod, c_div, delta, psi
    )
    hyps = tuple(average_hypotheses(n, d, r, eps)) if fmode is Mode.AVERAGE else ()
    return DistSenseFilter(config, seed, eps, fmode, sigs, hyps)
