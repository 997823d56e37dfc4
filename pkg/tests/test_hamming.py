import numpy as np
import pytest
from hypothesis import given, strategies as st

from dsfilter.hamming import (
    DimensionError,
    HammingVector,
    PointSet,
    VectorFormatError,
    Zone,
    batch_distance_to_set,
    classify_query,
    distance_to_set,
    hamming_distance,
    pack_bits,
    parse_vectors,
    read_vectors,
    unpack_bits,
    write_vectors,
)

V = HammingVector.from_string


@pytest.mark.parametrize("x, y, expected", [
    ("0101", "0110", 2),
    ("0101", "0101", 0),
    ("0000", "1111", 4),
])
def test_hamming_distance_examples(x, y, expected):
    assert hamming_distance(V(x), V(y)) == expected


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        hamming_distance(V("01"), V("011"))
    with pytest.raises(DimensionError):
        distance_to_set(V("01"), PointSet.from_vectors([V("011")]))


def test_distance_to_set_examples():
    S = PointSet.from_vectors([V("0000"), V("1111")])
    assert distance_to_set(V("0011"), S) == 2
    assert distance_to_set(V("1111"), S) == 0
    assert distance_to_set(V("000111"), PointSet.from_vectors([V("000000")])) == 3


def test_distance_to_empty_set():
    with pytest.raises(ValueError):
        distance_to_set(V("01"), PointSet(2, np.zeros((0, 1))))


@pytest.mark.parametrize("dist, zone", [(0, Zone.NEAR), (3, Zone.GRAY), (5, Zone.FAR)])
def test_classify_examples(dist, zone):
    S = PointSet.from_vectors([V("0" * 8)])
    q = V("1" * dist + "0" * (8 - dist))
    cls = classify_query(q, S, r=2, c=2)
    assert cls.zone is zone
    assert cls.distance == dist


def test_classify_rejects_bad_parameters():
    S = PointSet.from_vectors([V("0000")])
    with pytest.raises(ValueError):
        classify_query(V("0000"), S, r=0, c=2)
    with pytest.raises(ValueError):
        classify_query(V("0000"), S, r=1, c=0.5)


def test_vector_rejects_non_binary():
    with pytest.raises(ValueError):
        HammingVector.from_bits([0, 2, 1])
    with pytest.raises(VectorFormatError):
        V("01a1")


bit_strings = st.integers(1, 200).flatmap(
    lambda d: st.tuples(*[st.text("01", min_size=d, max_size=d)] * 3))


@given(bit_strings)
def test_metric_properties(triple):
    x, y, z = map(V, triple)
    assert hamming_distance(x, y) == hamming_distance(y, x)
    assert hamming_distance(x, z) <= hamming_distance(x, y) + hamming_distance(y, z)
    assert hamming_distance(x, x) == 0


@given(st.integers(1, 300), st.data())
def test_flip_k_positions_gives_distance_k(d, data):
    x = V(data.draw(st.text("01", min_size=d, max_size=d)))
    positions = data.draw(st.sets(st.integers(0, d - 1)))
    assert hamming_distance(x, x.flip(positions)) == len(positions)


@given(st.integers(1, 300), st.integers(0, 2**32))
def test_pack_roundtrip(d, seed):
    bits = np.random.default_rng(seed).integers(0, 2, size=(3, d), dtype=np.uint8)
    assert np.array_equal(unpack_bits(pack_bits(bits), d), bits)


def test_string_roundtrip():
    s = "1011" * 20 + "1"
    assert str(V(s)) == s
    assert V(s) == V(s)
    assert hash(V(s)) == hash(V(s))


def test_classify_consistent_with_distance(rng):
    for _ in range(200):
        d = int(rng.integers(4, 40))
        S = PointSet.random(int(rng.integers(1, 6)), d, rng)
        q = HammingVector.random(d, rng)
        r = int(rng.integers(1, 4))
        c = float(rng.uniform(1, 3))
        cls = classify_query(q, S, r, c)
        dist = min(hamming_distance(q, p) for p in S)
        assert cls.distance == dist
        assert (cls.zone is Zone.NEAR) == (dist <= r)
        assert (cls.zone is Zone.FAR) == (dist > c * r)


def test_batch_distance_matches_scalar(rng):
    S = PointSet.random(7, 100, rng)
    Q = PointSet.random(50, 100, rng)
    want = [distance_to_set(q, S) for q in Q]
    assert batch_distance_to_set(Q, S).tolist() == want


def test_unique_keeps_first_occurrence_order():
    S = PointSet.from_vectors([V("01"), V("11"), V("01"), V("00"), V("11")])
    assert [str(v) for v in S.unique()] == ["01", "11", "00"]


def test_parse_vectors_format(tmp_path):
    text = "# comment\n\n0101\n  1111\n#x\n0000\n"
    S = parse_vectors(text.splitlines())
    assert S.n == 3 and S.d == 4
    path = tmp_path / "v.txt"
    write_vectors(path, S, header="hello")
    back = read_vectors(path)
    assert np.array_equal(back.words, S.words)


@pytest.mark.parametrize("text", ["0101\n011\n", "01x1\n", "# only comments\n", ""])
def test_parse_vectors_errors(text):
    with pytest.raises(VectorFormatError):
        parse_vectors(text.splitlines())


def test_non_ascii_file_is_format_error(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_bytes("01é1\n".encode())
    with pytest.raises(VectorFormatError):
        read_vectors(path)


def test_dimension_cap():
    with pytest.raises(ValueError):
        PointSet(1 << 16 + 1, np.zeros((0, 1025)))
