import math
import struct
import zlib
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsfilter.filter import (
    MAGIC,
    BadMagicError,
    ChecksumError,
    DistSenseFilter,
    FormatError,
    HeaderRangeError,
    HypothesisError,
    Mode,
    TruncatedError,
    VersionError,
    _HEADER,
    build_average,
    build_pointwise,
    deserialize,
    serialize,
)
from dsfilter.hamming import DimensionError, HammingVector, PointSet
from dsfilter.oracle import sample_near_many
from dsfilter.signature import ParameterError, Regime, derive_params, gaps, signature


def test_single_member_query_yes(rng):
    S = PointSet.random(1, 40, rng)
    f = build_pointwise(S, 2, 2, 0.1, seed=3)
    ans = f.query(S[0])
    assert ans.yes and ans.best_gap == 0 and ans.argmin_index == 0
    assert ans.decision == "yes"


def test_pointwise_parameters(rng):
    S = PointSet.random(8, 64, rng)
    f = build_pointwise(S, 2, 2, 2**-6, seed=0)
    assert f.config.eps == 2**-9
    assert f.eps == 2**-6
    assert f.config == derive_params(64, 2, 2, 2**-9)
    # 24 * 4 * max(2, 2 * 9)
    assert f.config.m == 1728
    assert f.signatures.shape == (8, 1728)


def test_empty_set_rejected():
    with pytest.raises(ParameterError):
        build_pointwise(PointSet(8, np.zeros((0, 1))), 1, 2, 0.1, 0)


def test_duplicates_removed(rng):
    S = PointSet.random(3, 30, rng)
    dup = PointSet(30, np.concatenate([S.words, S.words[:2]]))
    f = build_pointwise(dup, 1, 2, 0.3, 1)
    assert f.n == 3
    assert f.config.eps == 0.3 / 3


def test_query_dimension_mismatch(rng):
    f = build_pointwise(PointSet.random(2, 16, rng), 1, 2, 0.1, 0)
    with pytest.raises(DimensionError):
        f.query(HammingVector.random(17, rng))
    with pytest.raises(DimensionError):
        f.query_many(PointSet.random(2, 15, rng))


def test_fast_parity_path_matches_gap(rng):
    S = PointSet.random(9, 100, rng)
    f = build_pointwise(S, 3, 2, 0.05, 12)
    Q = PointSet.random(30, 100, rng)
    yes, best, arg = f.query_many(Q)
    for i, q in enumerate(Q):
        g = gaps(signature(q, f.config, f.seed), f.signatures, f.config)
        assert best[i] == g.min()
        assert g[arg[i]] == g.min()
        assert yes[i] == (g.min() <= f.config.psi)


@pytest.mark.parametrize("c, d, r", [(2.0, 10, 1), (3.0, 9, 2), (1.5, 8, 1), (600.0, 8, 1)])
def test_no_false_negatives_exhaustive_small_cube(c, d, r):
    g = np.random.default_rng(int(c * 10) + d)
    S = PointSet.random(3, d, g)
    idx = np.arange(1 << d)
    cube = ((idx[:, None] >> np.arange(d)) & 1).astype(np.uint8)
    dist = np.array([[bin(int(q) ^ int("".join(map(str, p[::-1])), 2)).count("1")
                      for p in S.bits] for q in idx]).min(axis=1)
    for seed in range(4):
        f = build_pointwise(S, r, c, 0.1, seed)
        yes, _, _ = f.query_many(cube)
        assert yes[dist <= r].all()


def test_no_false_negatives_near_generator(rng):
    for d, r, c in [(512, 6, 2.0), (1000, 3, 1.2), (256, 2, 800.0)]:
        S = PointSet.random(5, d, rng)
        f = build_pointwise(S, r, c, 0.05, int(rng.integers(2**63)))
        yes, _, _ = f.query_many(sample_near_many(S, r, 200, rng))
        assert yes.all()


def test_permutation_invariance(rng):
    S = PointSet.random(12, 80, rng)
    perm = rng.permutation(12)
    f1 = build_pointwise(S, 2, 2, 0.05, 9)
    f2 = build_pointwise(PointSet(80, S.words[perm]), 2, 2, 0.05, 9)
    Q = PointSet(80, np.concatenate([S.words, PointSet.random(40, 80, rng).words]))
    y1, g1, _ = f1.query_many(Q)
    y2, g2, _ = f2.query_many(Q)
    assert np.array_equal(y1, y2) and np.array_equal(g1, g2)


def test_average_mode_example(rng):
    S = PointSet.random(64, 256, rng)
    f = build_average(S, 16, 2**-4, seed=1)
    assert f.mode is Mode.AVERAGE
    assert f.config.c == 16.0
    assert f.config.eps == 2**-4 / 4 / 64
    assert all(h.satisfied for h in f.hypotheses)
    assert [h.text for h in f.hypotheses] == ["r <= sqrt(d)", "n <= 2^(d/3)", "eps >= 1/2^(d-2)"]


def test_average_mode_violations(rng):
    S = PointSet.random(4, 64, rng)
    with pytest.raises(HypothesisError) as info:
        build_average(S, 9, 0.1, 0)
    assert [h.text for h in info.value.failed] == ["r <= sqrt(d)"]
    with pytest.raises(ParameterError):
        build_average(S, 1, 0.1, 0)
    with pytest.raises(HypothesisError) as info:
        build_average(PointSet.random(2, 6, rng), 2, 2**-5, 0)
    assert [h.text for h in info.value.failed] == ["eps >= 1/2^(d-2)"]
    with pytest.raises(HypothesisError) as info:
        build_average(PointSet.random(5, 6, rng), 2, 0.5, 0)
    assert [h.text for h in info.value.failed] == ["n <= 2^(d/3)"]


def test_entry_width_accounting():
    cfg = derive_params(64, 2, 2, 0.01)
    assert cfg.entry_width == 1 and cfg.signature_bits == cfg.m
    big = derive_params(64, 1, 600, 0.1)
    lo, hi = big.entry_range
    assert 2 ** (big.entry_width - 1) < hi - lo + 1 <= 2 ** big.entry_width


@st.composite
def filters(draw):
    d = draw(st.integers(1, 200))
    n = draw(st.integers(1, 12))
    seed = draw(st.integers(0, 2**64 - 1))
    g = np.random.default_rng(draw(st.integers(0, 2**32)))
    S = PointSet.random(n, d, g)
    kind = draw(st.sampled_from(["const", "large", "avg"]))
    if kind == "avg" and d >= 16:
        return build_average(S.unique(), draw(st.integers(2, math.isqrt(d))), 0.2, seed)
    c = 700.0 if kind == "large" else draw(st.sampled_from([1.5, 2.0, 4.0]))
    return build_pointwise(S, draw(st.integers(1, 4)), c, draw(st.sampled_from([0.3, 2**-10])), seed)


@given(filters())
def test_serialize_roundtrip(f):
    blob = serialize(f)
    g = deserialize(blob)
    assert g == f
    assert np.array_equal(g.signatures, f.signatures)
    assert g.config == f.config
    assert serialize(g) == blob
    n_payload = len(blob) - 4 - _HEADER.size - 4
    assert n_payload == f.n * math.ceil(f.config.m * f.config.entry_width / 8)


def test_header_layout(rng):
    f = build_pointwise(PointSet.random(3, 20, rng), 2, 2, 0.25, 0xABCDEF)
    blob = f.to_bytes()
    assert blob[:4] == MAGIC
    fields = struct.unpack_from("<HBBIIddQQdIdiBQQ", blob, 4)
    assert fields[0] == 1 and fields[1] == 0 and fields[2] == 0
    assert fields[3:5] == (20, 2)
    assert fields[7] == f.config.m and fields[8] == 2
    assert fields[12:] == (-1, 1, 0xABCDEF, 3)
    (crc,) = struct.unpack("<I", blob[-4:])
    assert crc == zlib.crc32(blob[4:-4])


def test_payload_bits_msb_first():
    cfg = derive_params(8, 1, 2, 0.3)
    sig = np.zeros((1, cfg.m), dtype=np.int64)
    sig[0, 0] = -1  # offset-encoded 0 ...
    sig[0, 1:] = 0  # ... and 1 elsewhere
    f = DistSenseFilter(cfg, 0, 0.3, Mode.POINT_WISE, sig)
    payload = f.to_bytes()[4 + _HEADER.size:-4]
    assert payload[0] == 0b01111111


def _byteswapped_copy(f):
    sig = f.signatures.astype(">i8")
    return DistSenseFilter(f.config, f.seed, f.eps, f.mode, sig, f.hypotheses)


def test_host_byte_order_irrelevant(rng):
    for c in (2.0, 600.0):
        f = build_pointwise(PointSet.random(4, 50, rng), 1, c, 0.2, 77)
        assert serialize(_byteswapped_copy(f)) == serialize(f)


def _resign(body: bytes) -> bytes:
    return MAGIC + body + struct.pack("<I", zlib.crc32(body))


@pytest.fixture
def blob(rng):
    return build_pointwise(PointSet.random(5, 30, rng), 2, 2, 0.1, 5).to_bytes()


def test_corrupted_checksum(blob):
    bad = bytearray(blob)
    bad[-1] ^= 0xFF
    with pytest.raises(ChecksumError):
        deserialize(bytes(bad))
    bad = bytearray(blob)
    bad[40] ^= 0x01
    with pytest.raises(ChecksumError):
        deserialize(bytes(bad))


def test_bad_magic(blob):
    with pytest.raises(BadMagicError):
        deserialize(b"XXXX" + blob[4:])


def test_bad_version(blob):
    body = bytearray(blob[4:-4])
    body[0:2] = struct.pack("<H", 2)
    with pytest.raises(VersionError):
        deserialize(_resign(bytes(body)))


@pytest.mark.parametrize("cut", [0, 2, 10, -5, -1])
def test_truncated(blob, cut):
    with pytest.raises(TruncatedError):
        deserialize(blob[:cut])


def test_trailing_bytes(blob):
    with pytest.raises(FormatError):
        deserialize(blob + b"\0")


@pytest.mark.parametrize("offset, fmt, value", [
    (2, "<B", 7),        # mode
    (3, "<B", 1),        # regime flips to large-c with c_mod=2 -> encoding mismatch
    (4, "<I", 0),        # d
    (12, "<d", 1.0),     # c
    (20, "<d", 1.5),     # eps
    (36, "<Q", 4),       # c_mod with constant-c regime
])
def test_header_range_errors(blob, offset, fmt, value):
    body = bytearray(blob[4:-4])
    struct.pack_into(fmt, body, offset, value)
    with pytest.raises(HeaderRangeError):
        deserialize(_resign(bytes(body)))


def test_error_codes_distinct():
    codes = {cls.code for cls in (BadMagicError, VersionError, TruncatedError,
                                  ChecksumError, HeaderRangeError)}
    assert len(codes) == 5


def test_infinite_psi_survives_roundtrip(rng):
    f = build_pointwise(PointSet.random(2, 12, rng), 1, 3, 0.1, 0)
    g = replace(f, config=replace(f.config, psi=math.inf))
    assert deserialize(serialize(g)).config.psi == math.inf


def test_optimality_flag(rng):
    S = PointSet.random(2, 64, rng)
    assert build_pointwise(S, 20, 2, 0.5, 0).optimality_flag()  # 10 >= log2(4)
    assert not build_pointwise(S, 2, 2, 0.5, 0).optimality_flag()
