"""Vector signatures: a reduced CountSketch of a Hamming vector.

Every column ``j`` of an ``m x d`` matrix ``M`` receives ``delta`` random
signed unit updates on uniformly random rows.  The signature of ``x`` is::

    sigma(x)_i = floor(smod(M x, c_mod)_i / c_div)

and two vectors are declared near when the gap
``sum_i |smod(round(c_div * (sigma(x)_i - sigma(y)_i)), c_mod)|`` is at most
``psi``.  Vectors within distance ``r`` always pass; vectors beyond ``c*r``
pass with probability at most ``eps``.

Two parameter regimes exist.  ``CONSTANT_C`` (parity sketch, ``c_mod = 2``)
is used for every ``1 < c < LARGE_C_THRESHOLD``; ``LARGE_C`` uses real
``c_div`` and ``delta > 1`` and is only valid from the threshold (545) up.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .hamming import DimensionError, HammingVector, PointSet, MAX_DIMENSION
from .prng import bounded, random_words

P1 = 0.9
P2 = 0.094
BETA = 15.0 / (P1 * P2) ** 2
LARGE_C_THRESHOLD = math.ceil(math.sqrt(5.0 * BETA / (4.0 * P2 * P2)))


class Regime(enum.IntEnum):
    CONSTANT_C = 0
    LARGE_C = 1


class ParameterError(ValueError):
    """Construction parameters violate a precondition."""


@dataclass(frozen=True)
class FilterConfig:
    d: int
    r: int
    c: float
    eps: float
    regime: Regime
    m: int
    c_mod: int
    c_div: float
    delta: int
    psi: float

    def __post_init__(self):
        if self.m < 1 or self.c_mod < 2 or self.delta < 1:
            raise ParameterError(f"invalid derived parameters: {self}")
        if self.regime is Regime.CONSTANT_C and (
            self.c_mod != 2 or self.c_div != 1 or self.delta != 1
        ):
            raise ParameterError("constant-c regime requires c_mod=2, c_div=1, delta=1")

    @property
    def entry_range(self) -> tuple[int, int]:
        """Inclusive ``(lo, hi)`` bounds of a signature entry."""
        return entry_range(self.c_mod, self.c_div)

    @property
    def entry_width(self) -> int:
        lo, hi = self.entry_range
        return (hi - lo).bit_length()

    @property
    def signature_bits(self) -> int:
        return self.m * self.entry_width


def entry_range(c_mod: int, c_div: float) -> tuple[int, int]:
    lo = math.floor(-(c_mod // 2) / c_div)
    hi = math.floor(((c_mod + 1) // 2 - 1) / c_div)
    return lo, hi


def smod(a, q: int):
    """Symmetric modulo into ``[-floor(q/2), ceil(q/2))``.

    Works elementwise on integer arrays and on Python ints.
    """
    if q < 1:
        raise ValueError(f"modulus must be positive, got {q}")
    half = q // 2
    return (a + half) % q - half


def _log2_inverse(eps: float) -> Fraction:
    mant, exp = math.frexp(eps)
    if mant == 0.5:
        return Fraction(1 - exp)
    return Fraction(math.log2(1.0 / eps))


def derive_params(d: int, r: int, c: float, eps: float, regime: Regime | None = None) -> FilterConfig:
    """Signature parameters for one pair-wise guarantee at error ``eps``.

    The default regime is ``CONSTANT_C`` below ``LARGE_C_THRESHOLD`` and
    ``LARGE_C`` at or above it.  Logarithms are base 2.
    """
    if not 1 <= d <= MAX_DIMENSION:
        raise ParameterError(f"d must be in [1, {MAX_DIMENSION}], got {d}")
    if r < 1 or int(r) != r:
        raise ParameterError(f"r must be a positive integer, got {r}")
    if not c > 1:
        raise ParameterError(f"c must exceed 1 for a point-wise construction, got {c}")
    if not 0 < eps < 1:
        raise ParameterError(f"eps must be in (0, 1), got {eps}")
    r = int(r)
    c = float(c)
    if regime is None:
        regime = Regime.CONSTANT_C if c < LARGE_C_THRESHOLD else Regime.LARGE_C
    regime = Regime(regime)

    if regime is Regime.CONSTANT_C:
        cf = Fraction(c)
        bound = max(Fraction(r), 2 / (cf - 1) * _log2_inverse(eps))
        m = math.ceil(24 * cf * cf / (cf - 1) * bound)
        cfg = FilterConfig(d, r, c, eps, regime, m, 2, 1.0, 1, float(r))
    else:
        if c < LARGE_C_THRESHOLD:
            raise ParameterError(
                f"large-c constants unproven below threshold {LARGE_C_THRESHOLD} (c={c})"
            )
        log_term = math.log2(2.0 / eps)
        m = math.ceil(BETA * max(r / c, log_term))
        c_div = 2.0 * c / (math.sqrt(5.0) * BETA)
        c_mod = math.ceil(8.0 * c)
        delta = math.ceil((c / r) * log_term)
        psi = float(delta * r) + max(float(r), c * log_term)
        cfg = FilterConfig(d, r, c, eps, regime, m, c_mod, c_div, delta, psi)
    if cfg.m >= 1 << 32:
        raise ParameterError(f"m={cfg.m} exceeds the supported row count")
    return cfg


def column_updates(seed: int, config: FilterConfig, columns=None) -> tuple[np.ndarray, np.ndarray]:
    """Rows (0-based) and signs of the updates for the given columns.

    ``columns`` are 1-based indices in ``[1, d]``; the default is all of them.
    Returns two ``(len(columns), delta)`` arrays.
    """
    if columns is None:
        columns = np.arange(1, config.d + 1, dtype=np.uint64)
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size and (cols.min() < 1 or cols.max() > config.d):
        raise IndexError("column index out of range")
    idx = np.arange(config.delta, dtype=np.uint64)
    words = random_words(seed, cols.astype(np.uint64)[:, None], idx[None, :])
    rows = bounded(words, config.m).astype(np.int64)
    signs = np.where(words & np.uint64(1), 1, -1).astype(np.int64)
    return rows, signs


def update_stream(seed: int, j: int, config: FilterConfig) -> list[tuple[int, int]]:
    """The ``delta`` ``(row, sign)`` updates of column ``j``, rows 1-based."""
    if not 1 <= j <= config.d:
        raise IndexError(f"column {j} outside [1, {config.d}]")
    rows, signs = column_updates(seed, config, [j])
    return [(int(i) + 1, int(s)) for i, s in zip(rows[0], signs[0])]


@lru_cache(maxsize=64)
def update_matrix(seed: int, config: FilterConfig) -> sp.csr_array:
    """``M`` as a sparse ``m x d`` integer matrix (duplicates summed)."""
    rows, signs = column_updates(seed, config)
    cols = np.repeat(np.arange(config.d), config.delta)
    M = sp.coo_array((signs.ravel(), (rows.ravel(), cols)), shape=(config.m, config.d))
    return M.tocsr()


def _bit_matrix(x, d: int) -> np.ndarray:
    if isinstance(x, HammingVector):
        if x.d != d:
            raise DimensionError(f"vector dimension {x.d} does not match config d={d}")
        return x.bits[None, :]
    if isinstance(x, PointSet):
        if x.d != d:
            raise DimensionError(f"point dimension {x.d} does not match config d={d}")
        return x.bits
    arr = np.atleast_2d(np.asarray(x))
    if arr.shape[-1] != d:
        raise DimensionError(f"bit length {arr.shape[-1]} does not match config d={d}")
    return arr


def sketch_many(X, config: FilterConfig, seed: int) -> np.ndarray:
    """``M x`` for every row of ``X`` (a PointSet or an ``(N, d)`` bit array)."""
    bits = _bit_matrix(X, config.d).astype(np.int64)
    M = update_matrix(seed, config)
    return np.asarray(M @ bits.T).T.astype(np.int64)


def sketch(x: HammingVector, config: FilterConfig, seed: int) -> np.ndarray:
    return sketch_many(x, config, seed)[0]


def reduce_sketch(sk: np.ndarray, config: FilterConfig) -> np.ndarray:
    """Apply ``floor(smod(., c_mod) / c_div)`` entry-wise."""
    reduced = smod(np.asarray(sk, dtype=np.int64), config.c_mod)
    if config.c_div == 1.0:
        return reduced
    return np.floor(reduced.astype(np.float64) / config.c_div).astype(np.int64)


def signature_many(X, config: FilterConfig, seed: int) -> np.ndarray:
    return reduce_sketch(sketch_many(X, config, seed), config)


def signature(x: HammingVector, config: FilterConfig, seed: int) -> np.ndarray:
    """The ``m`` signed entries of ``sigma(x)``."""
    return signature_many(x, config, seed)[0]


@dataclass(frozen=True)
class GapResult:
    gamma: float
    is_near: bool


def _round_half_away(v: np.ndarray) -> np.ndarray:
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.int64)


def gap_vector(sx: np.ndarray, sy: np.ndarray, config: FilterConfig) -> np.ndarray:
    sx = np.asarray(sx, dtype=np.int64)
    sy = np.asarray(sy, dtype=np.int64)
    if sx.shape[-1] != config.m or sy.shape[-1] != config.m:
        raise DimensionError(f"signatures must have {config.m} entries")
    diff = sx - sy
    if config.c_div != 1.0:
        diff = _round_half_away(config.c_div * diff.astype(np.float64))
    return smod(diff, config.c_mod)


def gaps(sq: np.ndarray, stored: np.ndarray, config: FilterConfig) -> np.ndarray:
    """Gap between one signature and each row of ``stored``."""
    return np.abs(gap_vector(np.asarray(sq)[None, :], stored, config)).sum(axis=-1)


def gap(sx: np.ndarray, sy: np.ndarray, config: FilterConfig) -> GapResult:
    sx = np.asarray(sx)
    sy = np.asarray(sy)
    if sx.shape != sy.shape:
        raise DimensionError(f"signature lengths differ: {sx.shape} vs {sy.shape}")
    gamma = int(np.abs(gap_vector(sx, sy, config)).sum())
    return GapResult(float(gamma), gamma <= config.psi)
