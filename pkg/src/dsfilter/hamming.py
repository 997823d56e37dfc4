"""Hamming-space primitives: bit-packed vectors, distances, near/far classes."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_DIMENSION = 1 << 16
MAX_POINTS = 1 << 32

_WORD = 64


class DimensionError(ValueError):
    """Vectors of different dimension were combined."""


class VectorFormatError(ValueError):
    """A vector text file or string could not be parsed."""


def _n_words(d: int) -> int:
    return (d + _WORD - 1) // _WORD


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(..., d)`` 0/1 array into ``(..., ceil(d/64))`` uint64 words.

    Bit ``j`` of the vector is bit ``j % 64`` (LSB first) of word ``j // 64``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    d = bits.shape[-1]
    pad = _n_words(d) * _WORD - d
    if pad:
        widths = [(0, 0)] * (bits.ndim - 1) + [(0, pad)]
        bits = np.pad(bits, widths)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    packed = np.ascontiguousarray(packed)
    return packed.view("<u8").astype(np.uint64).reshape(*bits.shape[:-1], -1)


def unpack_bits(words: np.ndarray, d: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    as_bytes = words.view(np.uint8).reshape(*words.shape[:-1], -1)
    return np.unpackbits(as_bytes, axis=-1, bitorder="little", count=d)


def _check_dimension(d: int) -> None:
    if not 1 <= d <= MAX_DIMENSION:
        raise ValueError(f"dimension must be in [1, {MAX_DIMENSION}], got {d}")


class HammingVector:
    """An immutable point of ``{0,1}^d`` kept as bit-packed 64-bit words."""

    __slots__ = ("d", "_words")

    def __init__(self, d: int, words: np.ndarray):
        _check_dimension(d)
        words = np.array(words, dtype=np.uint64).reshape(-1)
        if words.size != _n_words(d):
            raise ValueError(f"expected {_n_words(d)} words for d={d}, got {words.size}")
        tail = d % _WORD
        if tail and int(words[-1]) >> tail:
            raise ValueError("bits set beyond the vector dimension")
        words.flags.writeable = False
        self.d = d
        self._words = words

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> HammingVector:
        arr = np.asarray(bits)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("every element must be 0 or 1")
        return cls(arr.size, pack_bits(arr.astype(np.uint8)))

    @classmethod
    def from_string(cls, text: str) -> HammingVector:
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise VectorFormatError(f"not a 0/1 string: {text!r}")
        return cls.from_bits(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> HammingVector:
        return cls.from_bits(rng.integers(0, 2, size=d, dtype=np.uint8))

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def bits(self) -> np.ndarray:
        return unpack_bits(self._words, self.d)

    def flip(self, positions: Iterable[int]) -> HammingVector:
        bits = self.bits.copy()
        pos = np.fromiter(positions, dtype=np.int64)
        if pos.size and (pos.min() < 0 or pos.max() >= self.d):
            raise IndexError("flip position out of range")
        np.logical_xor.at(bits, pos, 1)
        return HammingVector(self.d, pack_bits(bits))

    def __len__(self) -> int:
        return self.d

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HammingVector):
            return NotImplemented
        return self.d == other.d and np.array_equal(self._words, other._words)

    def __hash__(self) -> int:
        return hash((self.d, self._words.tobytes()))

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 40:
            s = s[:37] + "..."
        return f"HammingVector(d={self.d}, '{s}')"


class PointSet:
    """An ordered collection of ``n`` vectors sharing dimension ``d``.

    Stored as an ``(n, ceil(d/64))`` word matrix.  ``n`` may be zero here;
    filter construction rejects empty sets.
    """

    __slots__ = ("d", "_words")

    def __init__(self, d: int, words: np.ndarray):
        _check_dimension(d)
        words = np.array(words, dtype=np.uint64).reshape(-1, _n_words(d))
        if words.shape[0] > MAX_POINTS:
            raise ValueError(f"at most {MAX_POINTS} points are supported")
        words.flags.writeable = False
        self.d = d
        self._words = words

    @classmethod
    def from_vectors(cls, vectors: Iterable[HammingVector], d: int | None = None) -> PointSet:
        vectors = list(vectors)
        if d is None:
            if not vectors:
                raise ValueError("dimension required for an empty point set")
            d = vectors[0].d
        for v in vectors:
            if v.d != d:
                raise DimensionError(f"dimension {v.d} does not match {d}")
        words = np.stack([v.words for v in vectors]) if vectors else np.zeros((0, _n_words(d)))
        return cls(d, words)

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> PointSet:
        bits = np.asarray(bits)
        if bits.ndim != 2:
            raise ValueError("expected an (n, d) bit matrix")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("every element must be 0 or 1")
        return cls(bits.shape[1], pack_bits(bits.astype(np.uint8)))

    @classmethod
    def random(cls, n: int, d: int, rng: np.random.Generator) -> PointSet:
        return cls.from_bits(rng.integers(0, 2, size=(n, d), dtype=np.uint8))

    @property
    def words(self) -> np.ndarray:
        return self._words

    @property
    def bits(self) -> np.ndarray:
        return unpack_bits(self._words, self.d)

    @property
    def n(self) -> int:
        return self._words.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> HammingVector:
        return HammingVector(self.d, self._words[i])

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def unique(self) -> PointSet:
        """Drop repeated members, keeping first occurrences in order."""
        _, first = np.unique(self._words, axis=0, return_index=True)
        return PointSet(self.d, self._words[np.sort(first)])


def hamming_distance(x: HammingVector, y: HammingVector) -> int:
    if x.d != y.d:
        raise DimensionError(f"dimension mismatch: {x.d} vs {y.d}")
    return int(np.bitwise_count(x.words ^ y.words).sum())


def distances_to_members(q: HammingVector, S: PointSet) -> np.ndarray:
    if q.d != S.d:
        raise DimensionError(f"dimension mismatch: {q.d} vs {S.d}")
    return np.bitwise_count(S.words ^ q.words).sum(axis=1, dtype=np.int64)


def distance_to_set(q: HammingVector, S: PointSet) -> int:
    """``min_{p in S} D(q, p)``."""
    if S.n == 0:
        raise ValueError("distance to an empty set is undefined")
    return int(distances_to_members(q, S).min())


def batch_distance_to_set(Q: PointSet, S: PointSet, chunk: int = 4096) -> np.ndarray:
    """``D(q, S)`` for every row of ``Q``."""
    if Q.d != S.d:
        raise DimensionError(f"dimension mismatch: {Q.d} vs {S.d}")
    if S.n == 0:
        raise ValueError("distance to an empty set is undefined")
    out = np.empty(Q.n, dtype=np.int64)
    for lo in range(0, Q.n, chunk):
        block = Q.words[lo:lo + chunk, None, :] ^ S.words[None, :, :]
        out[lo:lo + chunk] = np.bitwise_count(block).sum(axis=2).min(axis=1)
    return out


class Zone(enum.Enum):
    NEAR = "near"
    GRAY = "gray"
    FAR = "far"


@dataclass(frozen=True)
class QueryClass:
    zone: Zone
    distance: int


def zone_of(distance: int, r: int, c: float) -> Zone:
    if distance <= r:
        return Zone.NEAR
    if distance > c * r:
        return Zone.FAR
    return Zone.GRAY


def classify_query(q: HammingVector, S: PointSet, r: int, c: float) -> QueryClass:
    """Near if ``D(q,S) <= r``, far if ``D(q,S) > c*r``, gray in between."""
    if r < 1:
        raise ValueError(f"r must be >= 1, got {r}")
    if c < 1:
        raise ValueError(f"c must be >= 1, got {c}")
    dist = distance_to_set(q, S)
    return QueryClass(zone_of(dist, r, c), dist)


def parse_vectors(lines: Iterable[str]) -> PointSet:
    """Parse the line-oriented vector format.

    One ``0``/``1`` string per line; blank lines and lines starting with
    ``#`` are skipped; every data line must have the same length.
    """
    rows: list[np.ndarray] = []
    d = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if set(line) - {"0", "1"}:
            raise VectorFormatError(f"line {lineno}: characters other than 0/1")
        if d is None:
            d = len(line)
        elif len(line) != d:
            raise VectorFormatError(f"line {lineno}: length {len(line)} differs from {d}")
        rows.append(np.frombuffer(line.encode(), dtype=np.uint8) - ord("0"))
    if d is None:
        raise VectorFormatError("no vectors found")
    if d > MAX_DIMENSION:
        raise VectorFormatError(f"dimension {d} exceeds {MAX_DIMENSION}")
    return PointSet.from_bits(np.stack(rows))


def read_vectors(path: str | Path) -> PointSet:
    with open(path, encoding="ascii", errors="replace") as fh:
        return parse_vectors(fh)


def format_vectors(S: PointSet) -> str:
    return "".join(str(v) + "\n" for v in S)


def write_vectors(path: str | Path, S: PointSet, header: str | None = None) -> None:
    with open(path, "w", encoding="ascii") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(format_vectors(S))
