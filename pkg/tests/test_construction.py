import numpy as np
import pytest

from eprldpc.bitmatrix import BitMatrix
from eprldpc.channel import CodeSpec, encode
from eprldpc.construction import (
    ConstructionConfig,
    ExhaustionError,
    block_is_cycle_free,
    build_block_set,
    epr_construct,
    optimize_code,
    optimize_labels,
    peg,
    peg_mother,
    random_mother,
)
from eprldpc.gf import field
from eprldpc.graph import girth
from eprldpc.representation import build_omega, extend_codeword, is_complete, is_valid


def test_peg_deterministic_and_degrees():
    a = peg([3] * 60, [6] * 30, seed=4)
    b = peg([3] * 60, [6] * 30, seed=4)
    assert np.array_equal(a.to_dense(), b.to_dense())
    assert np.all(a.col_weights() == 3)
    assert a.nnz == 180


def test_peg_girth_six():
    m = peg([3] * 60, [6] * 30, seed=0)
    assert girth(m).girth >= 6


def test_random_mother_exact_degrees():
    m = random_mother([3] * 40, [6] * 20, seed=3)
    assert np.all(m.col_weights() == 3)
    assert np.all(m.row_weights() == 6)
    assert m.to_dense().max() == 1


def test_config_validation():
    with pytest.raises(ValueError):
        ConstructionConfig(g_s=7)
    with pytest.raises(ValueError):
        ConstructionConfig(p=1)


def test_block_set_p2():
    bs = build_block_set(2)
    assert bs.rows == (frozenset({1, 2, 3}),)
    assert bs.is_valid_row({1, 2, 3})
    # a single row cannot form a 2-row block
    assert len(bs) == 0


def test_block_set_p3():
    bs = build_block_set(3)
    assert len(bs.rows) == 7
    assert all(bs.is_valid_row(r) for r in bs.rows)
    assert not bs.is_valid_row({1, 2, 4})
    assert block_is_cycle_free(({1, 2, 3}, {1, 4, 5}))
    assert not block_is_cycle_free(({1, 2, 3}, {1, 2, 3}))
    # any two distinct lines of the Fano plane meet in one point
    assert len(bs) == 21
    assert bs.identities({1, 2, 3}) == "v(1) + v(2) + v(3) = 0"


def test_label_optimizer_removes_bit_four_cycles():
    # all-ones 2x2 mother: 4-cycle in the mother, labels can avoid bit 4-cycles
    mother = BitMatrix.from_dense(np.ones((2, 2), dtype=np.uint8))
    img = optimize_labels(mother, field(3), seed=0, target_girth=6)
    assert girth(build_omega(img).matrix, 4).girth == 0


def test_cycle_free_mother_keeps_full_omega():
    mother = BitMatrix.from_dense(np.array([[1, 1, 0], [0, 1, 1]], dtype=np.uint8))
    img = optimize_labels(mother, field(3), 0, 6, 0)
    cfg = ConstructionConfig(p=3, N=3, g_s=6)
    omega_e, gens, rep = epr_construct(img, cfg)
    full = build_omega(img).matrix
    assert rep.zeroed_rows == 0
    assert rep.replacement_blocks == 0
    assert np.array_equal(np.sort(omega_e.matrix.to_dense(), axis=0), np.sort(full.to_dense(), axis=0))
    assert gens.weights.tolist() == [7, 7, 7]


@pytest.fixture(scope="module")
def built():
    cfg = ConstructionConfig(p=3, N=60, g_s=6, max_p=3)
    omega_e, gens, img, rep = optimize_code(cfg)
    return cfg, omega_e, gens, img, rep


def test_optimize_code_girth(built):
    cfg, omega_e, gens, img, rep = built
    assert rep.p == 3
    g = girth(omega_e.matrix).girth
    assert g == 0 or g >= 6
    assert rep.girth == g


def test_extended_matrix_invariants(built, rng):
    cfg, omega_e, gens, img, rep = built
    assert is_valid(omega_e, img)
    assert is_complete(omega_e, img)
    assert np.all(omega_e.matrix.row_weights() >= 2)
    assert np.all(gens.weights >= cfg.psi_for(3))
    assert rep.m_s == int(gens.flat_mask.sum())
    spec = CodeSpec.from_image(img, omega_e, gens)
    for s in range(10):
        _, xbar = encode(spec, seed=s)
        ve = extend_codeword(xbar, gens)
        assert not np.any(omega_e.matrix.matvec(ve.bits))


def test_report_text(built):
    rep = built[4]
    text = rep.text()
    assert text.startswith("p: 3\nq: 8\n")
    assert f"M_s: {rep.m_s}" in text


def test_larger_girth_moves_to_larger_field():
    cfg = ConstructionConfig(p=2, N=60, g_s=8, max_p=5)
    omega_e, gens, img, rep = optimize_code(cfg)
    assert rep.p > 2
    g = girth(omega_e.matrix).girth
    assert g == 0 or g >= 8


def test_exhaustion():
    cfg = ConstructionConfig(p=2, N=20, g_s=20, max_p=4)
    with pytest.raises(ExhaustionError):
        optimize_code(cfg)


def test_peg_mother_respects_config():
    cfg = ConstructionConfig(N=30, dv=2, dc=4)
    m = peg_mother(cfg)
    assert m.shape == (15, 30)
    assert np.all(m.col_weights() == 2)
