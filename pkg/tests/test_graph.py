from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from eprldpc import _kernels
from eprldpc.bitmatrix import BitMatrix, kron
from eprldpc.gf import field
from eprldpc.graph import (
    TannerGraph,
    label_set_p4_bounds,
    count_cycles_exhaustive,
    degree_distributions,
    degree_distributions_exact,
    estimate_cycle_prob,
    estimate_p4,
    field_labels,
    girth,
    induced_rows_on_cycles,
    matrix_cycles,
)
from eprldpc.representation import NonBinaryMatrix, binary_image, build_omega, image_from_labels


def nx_girth(a):
    g = nx.Graph()
    r, c = np.nonzero(a)
    g.add_edges_from((("c", int(i)), ("v", int(j))) for i, j in zip(r, c))
    gi = nx.girth(g)
    return 0 if gi == float("inf") else int(gi)


def test_all_ones_2x2():
    rep = girth(BitMatrix.from_dense(np.ones((2, 2), dtype=np.uint8)))
    assert rep.girth == 4
    assert rep.short_cycle_counts == {4: 1}


def test_tree_has_girth_zero():
    tree = BitMatrix.from_dense([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1]])
    rep = girth(tree)
    assert rep.girth == 0
    assert rep.describe() == "girth: 0 (cycle-free)"


def test_cycle_free_lift_is_cycle_free():
    tree = BitMatrix.from_dense([[1, 1, 1, 0], [0, 0, 1, 1]])
    assert girth(kron(tree, BitMatrix.identity(7))).girth == 0


def test_beyond_cap():
    # an 8-cycle reported with cap 6
    ring = np.zeros((4, 4), dtype=np.uint8)
    for k in range(4):
        ring[k, k] = ring[k, (k + 1) % 4] = 1
    rep = girth(BitMatrix.from_dense(ring), cap=6)
    assert rep.girth == 0 and rep.beyond_cap and rep.describe() == "girth: > 6"
    assert girth(BitMatrix.from_dense(ring)).girth == 8


@given(arrays(np.uint8, st.tuples(st.integers(1, 7), st.integers(1, 9)), elements=st.integers(0, 1)))
def test_girth_matches_networkx(a):
    rep = girth(BitMatrix.from_dense(a), cap=20)
    assert rep.girth == nx_girth(a)
    if rep.girth:
        assert rep.short_cycle_counts[rep.girth] == count_cycles_exhaustive(BitMatrix.from_dense(a), 20)[rep.girth]


@pytest.mark.skipif("cython" not in _kernels.BACKENDS, reason="compiled kernels not built")
def test_edge_girth_backends_agree(rng):
    m = BitMatrix.from_dense((rng.random((30, 60)) < 0.08).astype(np.uint8))
    tg = TannerGraph(m)
    a = tg.edge_girth(10, backend="python")
    b = tg.edge_girth(10, backend="cython")
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_matrix_cycles_identical_blocks():
    mother = BitMatrix.from_dense(np.ones((2, 2), dtype=np.uint8))
    img = image_from_labels(mother, {(i, j): field(2).companion_label(2) for i in range(2) for j in range(2)}, 2)
    cyc = matrix_cycles(mother, build_omega(img), 4)
    assert len(cyc) == 1 and cyc[0].bit_cycle_present


def test_matrix_cycles_fixed_point_free_composition():
    f = field(2)
    mother = BitMatrix.from_dense(np.ones((2, 2), dtype=np.uint8))
    labels = {(0, 0): f.companion_label(1), (0, 1): f.companion_label(1),
              (1, 0): f.companion_label(1), (1, 1): f.companion_label(2)}
    om = build_omega(image_from_labels(mother, labels, 2))
    (c,) = matrix_cycles(mother, om, 4)
    assert not c.bit_cycle_present
    assert girth(om.matrix).girth > 4


def test_matrix_cycles_cycle_free_mother():
    mother = BitMatrix.from_dense([[1, 1, 0], [0, 1, 1]])
    h = NonBinaryMatrix(field(3), mother.to_dense() * 3)
    assert matrix_cycles(mother, build_omega(binary_image(h)), 12) == []


def test_four_cycles_only_inside_matrix_cycles(rng):
    for _ in range(5):
        h = NonBinaryMatrix(field(2), rng.integers(1, 4, size=(4, 8)) * (rng.random((4, 8)) < 0.5))
        if not h.mother().nnz or (h.mother().row_weights() == 0).any():
            continue
        om = build_omega(binary_image(h))
        rows = set(induced_rows_on_cycles(om.matrix, 4).tolist())
        inside = set()
        for c in matrix_cycles(h.mother(), om, 4):
            inside |= set(c.cycle_rows.tolist())
        assert rows <= inside


def test_p4_values():
    ex = estimate_p4(field(2), exhaustive=True)
    assert (ex.hits, ex.trials, ex.exact) == (27, 81, Fraction(1, 3))
    for p in (2, 3):
        est = estimate_p4(field(p), 20_000, seed=3)
        assert est.within(1 / ((1 << p) - 1))


def test_p4_monte_carlo_approaches_exhaustive():
    mc = estimate_p4(field(2), 50_000, seed=9)
    assert abs(mc.estimate - 1 / 3) < 4 * mc.standard_error


def test_single_label_always_cycles():
    f = field(3)
    assert estimate_cycle_prob(f, [f.companion_label(5)], 4, 1000).estimate == 1.0
    assert label_set_p4_bounds(f, [f.companion_label(5)])[:3] == (1, 1, 1)


def test_full_label_set_bounds_coincide():
    f = field(3)
    lo, hi, P, Q = label_set_p4_bounds(f, field_labels(f))
    assert P == Q == 7 and lo == hi == Fraction(1, 7)


def test_six_cycles_exceed_four_cycle_rate():
    f = field(3)
    est = estimate_cycle_prob(f, field_labels(f), 6, 100_000, seed=1)
    assert est.estimate > 1 / 7


def test_regular_degree_distribution():
    from eprldpc.construction import random_mother

    lam, rho = degree_distributions_exact(random_mother([3] * 60, [6] * 30, seed=2))
    assert lam == {3: 1} and rho == {6: 1}


def test_fixture_distributions_are_normalized():
    from eprldpc import fixtures

    for lam in (fixtures.GF16_LAMBDA, fixtures.GF16_RHO, fixtures.RHO_P1, fixtures.RHO_H, fixtures.RHO_OMEGA_E,
                fixtures.RHO_P2):
        assert sum(lam.values()) == pytest.approx(1, abs=0.01)
    for lam in (fixtures.LAMBDA_P1, fixtures.LAMBDA_H, fixtures.LAMBDA_OMEGA_E, fixtures.LAMBDA_P2):
        assert sum(lam.values()) == pytest.approx(1, abs=0.02)


def test_omega_keeps_mother_distributions(rng):
    h = NonBinaryMatrix(field(3), rng.integers(1, 8, size=(5, 10)) * (rng.random((5, 10)) < 0.5))
    if (h.mother().row_weights() == 0).any() or (h.mother().col_weights() == 0).any():
        pytest.skip("degenerate draw")
    assert degree_distributions(build_omega(binary_image(h)).matrix) == degree_distributions(h.mother())
