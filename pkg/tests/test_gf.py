import numpy as np
import pytest
from hypothesis import given, strategies as st

from eprldpc.bitmatrix import rank_f2
from eprldpc.gf import PRIMITIVE_POLYS, FieldError, GF2m, extender_basis, field, int_to_bits


def clmul_mod(a, b, poly, p):
    # schoolbook polynomial product reduced mod poly; independent of the tables
    r = 0
    for k in range(p):
        if b >> k & 1:
            r ^= a << k
    for k in range(2 * p - 2, p - 1, -1):
        if r >> k & 1:
            r ^= poly << (k - p)
    return r


def test_add_self_cancels():
    f = field(2)
    assert f.add(2, 2) == 0


def test_gf4_alpha_squared():
    f = field(2)
    assert f.prim_poly == 0b111
    assert f.mul(2, 2) == 3


def test_gf8_alpha3_alpha4_is_one():
    f = field(3)
    assert f.prim_poly == 0b1011
    assert f.mul(f.pow_alpha(3), f.pow_alpha(4)) == 1


@pytest.mark.parametrize("p", [2, 3, 4, 5, 6])
def test_tables_match_polynomial_multiplication(p):
    f = field(p)
    for a in range(f.q):
        for b in range(f.q):
            assert f.mul_table[a, b] == clmul_mod(a, b, f.prim_poly, p)


@pytest.mark.parametrize("p", range(2, 17))
def test_log_antilog_inverse(p):
    f = field(p)
    u = np.arange(1, f.q)
    assert np.array_equal(f.antilog[f.log[u]], u)
    i = np.arange(f.q - 1)
    assert np.array_equal(f.log[f.antilog[i]], i)


def test_primitive_polys_generate_group():
    for p, poly in PRIMITIVE_POLYS.items():
        # a cycle shorter than q-1 raises in the constructor
        assert GF2m(p, poly).q == 1 << p


def test_non_primitive_rejected():
    with pytest.raises(FieldError):
        GF2m(4, 0b11111)  # x^4+x^3+x^2+x+1 has order 5


def test_inverse_and_division():
    f = field(4)
    for a in range(1, 16):
        assert f.mul(a, f.inv(a)) == 1
        assert f.arith(f.mul(a, 7), a, "inv-mul") == 7
    with pytest.raises(ZeroDivisionError):
        f.div(3, 0)


def test_companion_examples():
    f4 = field(2)
    assert np.array_equal(f4.companion_label(1), np.eye(2, dtype=np.uint8))
    assert np.array_equal(f4.companion_label(2), [[0, 1], [1, 1]])
    assert not field(3).companion_label(0).any()


@pytest.mark.parametrize("p", [2, 3, 4])
def test_companion_acts_as_multiplication(p):
    f = field(p)
    for u in range(f.q):
        A = f.companion_label(u)
        for w in range(f.q):
            assert np.array_equal(A @ f.bits(w) % 2, f.bits(f.mul(u, w)))


@pytest.mark.parametrize("p", [2, 3, 4])
def test_companion_ring_homomorphism_and_rank(p):
    f = field(p)
    for u in range(f.q):
        for v in range(f.q):
            prod = f.companion_label(u).astype(int) @ f.companion_label(v) % 2
            assert np.array_equal(prod, f.companion_label(f.mul(u, v)))
        if u:
            assert rank_f2(f.companion_label(u)) == p


def test_extender_basis_examples():
    assert extender_basis(2).T.tolist() == [[1, 0], [0, 1], [1, 1]]
    phi = extender_basis(3)
    assert phi.shape == (3, 7)
    assert phi[:, 4].tolist() == [1, 0, 1]


@given(st.integers(2, 10))
def test_extender_basis_is_hamming_check(p):
    phi = extender_basis(p)
    cols = {tuple(c) for c in phi.T}
    assert len(cols) == (1 << p) - 1
    assert (0,) * p not in cols


@given(st.integers(2, 8), st.data())
def test_field_axioms(p, data):
    f = field(p)
    a, b, c = (data.draw(st.integers(0, f.q - 1)) for _ in range(3))
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    assert f.mul(a, b) == f.mul(b, a)
    assert np.array_equal(int_to_bits(a, p), f.bits(a))
