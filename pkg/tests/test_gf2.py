import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_in_rowspace
from fbgnn.codes import hamming_7_4
from fbgnn.gf2 import BitMatrix, BitVector, DimensionMismatch, in_row_space, matvec_mod2, rank_mod2


def test_matvec_direct():
    m = BitMatrix.from_array([[1, 1, 0], [0, 1, 1]])
    v = BitVector.from_array([1, 1, 0])
    assert matvec_mod2(m, v).to_array().tolist() == [0, 1]


def test_matvec_zero_vector():
    m = BitMatrix.from_array(np.random.default_rng(0).integers(0, 2, (5, 9)))
    assert matvec_mod2(m, BitVector(9)).to_array().tolist() == [0] * 5


def test_matvec_unit_vector_picks_column():
    h = hamming_7_4()
    m = BitMatrix.from_array(h)
    e0 = BitVector.from_array([1, 0, 0, 0, 0, 0, 0])
    assert matvec_mod2(m, e0).to_array().tolist() == h[:, 0].tolist()


def test_matvec_dimension_mismatch():
    m = BitMatrix.from_array([[1, 0], [0, 1]])
    with pytest.raises(DimensionMismatch):
        matvec_mod2(m, BitVector.from_array([1, 0, 1]))


def test_rank_zero_matrix():
    assert rank_mod2(BitMatrix.zeros(4, 6)) == 0


def test_rank_identity():
    assert rank_mod2(BitMatrix.from_array(np.eye(3, dtype=np.uint8))) == 3


def test_rank_hamming():
    # oracle: enumerate the row span; 2^rank distinct vectors
    h = hamming_7_4()
    span = set()
    for bits in range(8):
        acc = np.zeros(7, dtype=np.int64)
        for i in range(3):
            if (bits >> i) & 1:
                acc ^= h[i].astype(np.int64)
        span.add(tuple(acc % 2))
    assert len(span) == 2 ** 3
    assert rank_mod2(BitMatrix.from_array(h)) == 3


def test_in_row_space_zero_and_rows():
    h = BitMatrix.from_array(hamming_7_4())
    assert in_row_space(h, BitVector(7))
    for i in range(3):
        assert in_row_space(h, h.row(i))


def test_in_row_space_weight_one_false():
    # the dual of the Hamming code has minimum weight 4, so no weight-1 vector
    # is a combination of rows (verified against the brute-force oracle)
    h = hamming_7_4()
    m = BitMatrix.from_array(h)
    for i in range(7):
        v = np.zeros(7, dtype=np.uint8)
        v[i] = 1
        assert not brute_force_in_rowspace(h, v)
        assert not in_row_space(m, BitVector.from_array(v))


def test_in_row_space_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        in_row_space(BitMatrix.zeros(2, 4), BitVector(5))


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_in_row_space_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    rows = rng.integers(1, 7)
    cols = rng.integers(1, 9)
    a = rng.integers(0, 2, (rows, cols)).astype(np.uint8)
    v = rng.integers(0, 2, cols).astype(np.uint8)
    expected = brute_force_in_rowspace(a, v)
    assert in_row_space(BitMatrix.from_array(a), BitVector.from_array(v)) == expected


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_matvec_linearity(seed):
    rng = np.random.default_rng(seed)
    m = BitMatrix.from_array(rng.integers(0, 2, (6, 11)))
    a = BitVector.from_array(rng.integers(0, 2, 11))
    b = BitVector.from_array(rng.integers(0, 2, 11))
    assert matvec_mod2(m, a ^ b) == matvec_mod2(m, a) ^ matvec_mod2(m, b)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_rank_invariant_under_row_ops(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, (5, 8)).astype(np.uint8)
    base = rank_mod2(BitMatrix.from_array(a))
    perm = rng.permutation(5)
    assert rank_mod2(BitMatrix.from_array(a[perm])) == base
    i, j = rng.choice(5, 2, replace=False)
    b = a.copy()
    b[i] ^= b[j]
    assert rank_mod2(BitMatrix.from_array(b)) == base


def test_bitvector_array_round_trip():
    rng = np.random.default_rng(3)
    v = rng.integers(0, 2, 37).astype(np.uint8)
    assert BitVector.from_array(v).to_array().tolist() == v.tolist()


def test_bitmatrix_array_round_trip():
    rng = np.random.default_rng(4)
    a = rng.integers(0, 2, (9, 23)).astype(np.uint8)
    assert np.array_equal(BitMatrix.from_array(a).to_array(), a)


def test_weight():
    assert BitVector.from_array([1, 0, 1, 1, 0]).weight() == 3
