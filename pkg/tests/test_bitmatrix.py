import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from eprldpc.bitmatrix import (
    BitMatrix,
    DimensionError,
    block_diag,
    blocks_of,
    expand_mother,
    extract_mother,
    gf2_mul,
    kron,
    precedes,
    rank_f2,
    weight,
)
from eprldpc.gf import extender_basis, field
from eprldpc.representation import NonBinaryMatrix, binary_image


def dense(shape_r=(1, 6), shape_c=(1, 6)):
    return st.tuples(st.integers(*shape_r), st.integers(*shape_c)).flatmap(
        lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


def rank_oracle(a):
    # rank via float determinant minors is unreliable; use brute-force span size
    rows = [int("".join(map(str, r)), 2) for r in a.tolist()]
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def test_rank_examples():
    assert rank_f2(np.eye(3, dtype=np.uint8)) == 3
    assert rank_f2(np.zeros((2, 4), dtype=np.uint8)) == 0
    assert rank_f2(np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]])) == 2


@given(dense())
def test_rank_matches_span_size(a):
    assert rank_f2(a) == rank_oracle(a)
    assert rank_f2(BitMatrix.from_dense(a)) == rank_oracle(a)


def test_products():
    B = BitMatrix.from_dense([[1, 0, 1], [0, 1, 1]])
    I2 = BitMatrix.identity(2)
    assert kron(I2, B) == block_diag([B, B])
    P = BitMatrix.from_dense(np.eye(4, dtype=np.uint8)[[2, 0, 3, 1]])
    PT = BitMatrix.from_dense(P.to_dense().T)
    assert gf2_mul(P, PT) == BitMatrix.identity(4)
    a = BitMatrix.from_dense(np.ones((2, 3), dtype=np.uint8))
    b = BitMatrix.from_dense(np.ones((4, 5), dtype=np.uint8))
    assert kron(a, b).shape == (8, 15)


@given(dense((1, 4), (1, 4)), dense((1, 4), (1, 4)))
def test_kron_rank_multiplies(a, b):
    assert rank_f2(kron(a, b)) == rank_f2(a) * rank_f2(b)


@given(dense(), st.data())
def test_gf2_mul_matches_dense(a, data):
    b = data.draw(arrays(np.uint8, (a.shape[1], data.draw(st.integers(1, 5))), elements=st.integers(0, 1)))
    assert np.array_equal(gf2_mul(a, b).to_dense(), (a.astype(int) @ b) % 2)


def test_weight_examples():
    assert weight(extender_basis(2)) == 3
    assert weight(np.zeros((3, 3))) == 0
    assert weight([1, 0, 1, 1], "nonzero_entries_of_vector") == 3


def test_precedes_examples():
    B = extender_basis(3).copy()
    assert precedes(B, B)
    Bz = B.copy()
    Bz[:, 2] = 0
    assert precedes(Bz, B, strict=True)
    assert not precedes(B, B, strict=True)
    Ba = B.copy()
    Ba[:, 2] = B[:, 3]
    assert not precedes(Ba, B)
    with pytest.raises(DimensionError):
        precedes(B[:, :3], B)


@given(dense((1, 4), (1, 6)), st.data())
def test_precedes_partial_order(b, data):
    n = b.shape[1]
    z1 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    z2 = np.array(data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    a = b * z1
    c = a * z2
    assert precedes(b, b)
    assert precedes(a, b) and precedes(c, a) and precedes(c, b)  # transitivity
    if precedes(b, a):
        assert np.array_equal(a, b)  # antisymmetry
    other = data.draw(arrays(np.uint8, b.shape, elements=st.integers(0, 1)))
    if precedes(other, b) and precedes(b, other):
        assert np.array_equal(other, b)


def test_binary_image_is_reducible():
    h = NonBinaryMatrix(field(3), np.array([[1, 5, 0, 3], [0, 2, 7, 6]]))
    mother, ok = extract_mother(binary_image(h).matrix, 3)
    assert ok
    assert mother.to_dense().tolist() == [[1, 1, 0, 1], [0, 1, 1, 1]]


def test_singular_block_not_reducible():
    m = np.zeros((4, 4), dtype=np.uint8)
    m[:2, :2] = [[1, 1], [1, 1]]
    m[2:, 2:] = np.eye(2)
    assert extract_mother(BitMatrix.from_dense(m), 2)[1] is False


def test_permutation_array_code_is_3_reducible(rng):
    # a length-12 (3,4)-regular code as a 3x4 array of 3x3 permutation blocks
    blocks = np.zeros((9, 12), dtype=np.uint8)
    for i in range(3):
        for j in range(4):
            blocks[3 * i:3 * i + 3, 3 * j:3 * j + 3] = np.eye(3, dtype=np.uint8)[rng.permutation(3)]
    m = BitMatrix.from_dense(blocks)
    assert set(m.row_weights()) == {4} and set(m.col_weights()) == {3}
    mother, ok = extract_mother(m, 3)
    assert ok and mother.to_dense().all()


@given(st.integers(2, 3), st.integers(1, 3), st.integers(1, 4), st.data())
def test_extract_then_expand_round_trip(p, mr, nc, data):
    f = field(p)
    vals = np.array(data.draw(st.lists(st.integers(0, f.q - 1), min_size=mr * nc, max_size=mr * nc)))
    h = NonBinaryMatrix(f, vals.reshape(mr, nc))
    hb = binary_image(h).matrix
    mother, ok = extract_mother(hb, p)
    assert ok
    assert expand_mother(mother, blocks_of(hb, p), p) == hb


def test_bitmatrix_basics():
    m = BitMatrix(2, 5, [[4, 1], [0]])
    assert m.row(0).tolist() == [1, 4]
    assert m.matvec([1, 1, 0, 0, 1]).tolist() == [0, 1]
    assert hash(m) == hash(BitMatrix.from_dense(m.to_dense()))
    with pytest.raises(DimensionError):
        BitMatrix(1, 3, [[3]])
