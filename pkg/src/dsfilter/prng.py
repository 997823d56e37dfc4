"""Counter-based random bits for the update matrix.

The generator is Philox4x32-10 (Salmon et al., "Parallel random numbers:
as easy as 1, 2, 3", SC'11).  A block is keyed by the 64-bit filter seed
and addressed by ``(column, update_index)``, so any column of the matrix
can be regenerated on its own, in any order, on any machine.

Block layout::

    key     = (seed & 0xffffffff, seed >> 32)
    counter = (column, 0, update_index, 0)
    word    = out[0] | out[1] << 32

Only the first two output words are used.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

ROUNDS = 10
MASK64 = (1 << 64) - 1


def philox4x32(counter, key, rounds: int = ROUNDS) -> np.ndarray:
    """Vectorised Philox4x32 block function.

    ``counter`` has shape ``(..., 4)`` and ``key`` shape ``(..., 2)``
    (broadcastable); every word must fit in 32 bits.  Returns the four
    output words as ``uint64`` values below ``2**32``.
    """
    ctr = np.asarray(counter, dtype=np.uint64)
    k = np.asarray(key, dtype=np.uint64)
    c0, c1, c2, c3 = (ctr[..., i] for i in range(4))
    k0, k1 = k[..., 0], k[..., 1]
    for rnd in range(rounds):
        if rnd:
            k0 = (k0 + _W0) & _MASK32
            k1 = (k1 + _W1) & _MASK32
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _S32) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> _S32) ^ c3 ^ k1,
            p0 & _MASK32,
        )
    return np.stack(np.broadcast_arrays(c0, c1, c2, c3), axis=-1)


def random_words(seed: int, columns, indices) -> np.ndarray:
    """64 random bits for each ``(column, update_index)`` pair under ``seed``.

    ``columns`` and ``indices`` broadcast against each other.
    """
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned value, got {seed}")
    cols = np.asarray(columns, dtype=np.uint64)
    idx = np.asarray(indices, dtype=np.uint64)
    cols, idx = np.broadcast_arrays(cols, idx)
    zero = np.zeros_like(cols)
    ctr = np.stack([cols, zero, idx, zero], axis=-1)
    key = np.array([seed & 0xFFFFFFFF, seed >> 32], dtype=np.uint64)
    out = philox4x32(ctr, key)
    return out[..., 0] | (out[..., 1] << _S32)


def bounded(words: np.ndarray, m: int) -> np.ndarray:
    """Multiply-shift range reduction: ``floor(word * m / 2**64)``.

    Rejection-free; the bias is at most ``m / 2**64`` per value.  ``m`` must be
    below ``2**32`` so the partial products stay within 64 bits.
    """
    if not 1 <= m < 1 << 32:
        raise ValueError(f"range must be in [1, 2**32), got {m}")
    w = np.asarray(words, dtype=np.uint64)
    mm = np.uint64(m)
    hi = (w >> _S32) * mm
    lo = ((w & _MASK32) * mm) >> _S32
    return (hi + lo) >> _S32


def parse_test_vectors(text: str) -> list[tuple[int, int, int, int]]:
    """Parse ``seed column index -> hex64`` lines; ``#`` comments allowed."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            lhs, rhs = line.split("->")
            seed, col, idx = (int(tok, 0) for tok in lhs.split())
            out.append((seed, col, idx, int(rhs.strip(), 16)))
        except ValueError as exc:
            raise ValueError(f"test vector line {lineno}: {raw!r}") from exc
    return out


def load_test_vectors() -> list[tuple[int, int, int, int]]:
    from importlib.resources import files

    return parse_test_vectors(files("dsfilter").joinpath("data/prng_vectors.txt").read_text())


def check_test_vectors(vectors=None) -> list[tuple[tuple[int, int, int, int], int]]:
    """Mismatching vectors as ``(vector, actual)`` pairs; empty when all match."""
    if vectors is None:
        vectors = load_test_vectors()
    bad = []
    for vec in vectors:
        seed, col, idx, want = vec
        got = int(random_words(seed, [col], [idx])[0])
        if got != want:
            bad.append((vec, got))
    return bad
