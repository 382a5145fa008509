import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eprldpc._kernels import BACKENDS
from eprldpc.channel import LLR_SAT, ChannelModel, encode, hard_extend, llr_init_direct, transmit
from eprldpc.decoders import (
    HybridSchedule,
    decode_bec_hybrid,
    decode_binary_bp,
    decode_hard_epr,
    decode_hybrid_sepr,
    decode_qspa,
)
from eprldpc.decoders.base import BPState, resolve_frame
from eprldpc.decoders.bec import BECDecoder
from eprldpc.decoders.bp import HybridDecoder
from eprldpc.decoders.hard import HardDecoder
from eprldpc.decoders.qspa import symbol_priors
from eprldpc.fixtures import girth6_code
from eprldpc.representation import extend_codeword


@pytest.fixture(scope="module")
def spec():
    return girth6_code()


@pytest.fixture(scope="module")
def word(spec):
    x, xbar = encode(spec, seed=11)
    return x, xbar, extend_codeword(xbar, spec.gens).bits


def sat(bits):
    return LLR_SAT * (1.0 - 2.0 * np.asarray(bits, dtype=float))


def test_schedule_validation():
    with pytest.raises(ValueError):
        HybridSchedule(mu=0)
    s = HybridSchedule.from_max_iter(40, 16, 4)
    assert s.rounds == 2 and s.max_iterations == 40


def test_noiseless_identity_all_decoders(spec, word):
    x, xbar, ve = word
    r = decode_binary_bp(spec.img.matrix, sat(xbar), 40, spec.p)
    assert r.converged and r.iterations <= 1 and np.array_equal(r.x_hat, x)
    r = decode_hard_epr(spec.omega_e, spec.gens, ve, 10)
    assert r.converged and r.iterations == 0 and np.array_equal(r.x_hat, x)
    r = decode_hybrid_sepr(spec.omega_e, spec.gens, sat(ve), HybridSchedule(16, 4, 2))
    assert r.converged and np.array_equal(r.x_hat, x)
    assert r.trace[-1] == 0
    r = decode_bec_hybrid(spec.omega_e, spec.gens, ve, np.zeros(ve.size, dtype=bool))
    assert r.converged and r.erasures == 0 and np.array_equal(r.x_hat, x)
    r = decode_qspa(spec.h, symbol_priors(sat(xbar), spec.p), 10)
    assert r.converged and r.iterations <= 1 and np.array_equal(r.x_hat, x)


def test_trivial_resolution_reads_unit_positions(spec, word):
    x, xbar, ve = word
    v = ve.reshape(spec.N, -1)
    units = [(1 << k) - 1 for k in range(spec.p)]
    assert np.array_equal(v[:, units].ravel(), xbar)
    xr, ok = resolve_frame(ve, spec.gens)
    assert ok.all() and np.array_equal(xr, x)


def test_hard_single_error(spec, word):
    x, _, ve = word
    active = np.flatnonzero(spec.gens.flat_mask)
    dec = HardDecoder(spec.omega_e, spec.gens, 2)
    for pos in active[::17]:
        v = ve.copy()
        v[pos] ^= 1
        r = decode_hard_epr(spec.omega_e, spec.gens, v, 5, decoder=dec)
        assert r.converged and r.iterations <= 3
        assert np.array_equal(r.x_hat, x)


def test_hard_never_flips_satisfied_bits(spec, word, rng):
    _, _, ve = word
    dec = HardDecoder(spec.omega_e, spec.gens)
    H = spec.omega_e.matrix.to_dense().astype(np.int64)
    for _ in range(10):
        v = ve.copy()
        flips = rng.choice(np.flatnonzero(spec.gens.flat_mask), 3, replace=False)
        v[flips] ^= 1
        V = v.reshape(spec.N, -1).copy()
        z = dec.syndrome(V)
        quiet = (z @ H) == 0
        before = V.ravel().copy()
        dec.step(V, z)
        assert np.array_equal(V.ravel()[quiet], before[quiet])


def test_hard_schedule_argument(spec, word):
    _, _, ve = word
    v = ve.copy()
    v[np.flatnonzero(spec.gens.flat_mask)[0]] ^= 1
    r = decode_hard_epr(spec.omega_e, spec.gens, v, HybridSchedule(16, 2, 2, flip_threshold=1, k_max=3))
    assert r.converged


def test_bp_single_flip(spec, word):
    x, xbar, _ = word
    llr = sat(xbar) / 3
    llr[5] = -llr[5]
    r = decode_binary_bp(spec.img.matrix, llr, 20, spec.p)
    assert r.converged and np.array_equal(r.xbar_hat, xbar)


def test_sepr_corrects_noise(spec, word):
    x, _, ve = word
    ch = ChannelModel("biawgn", 0.6, seed=2)
    llr = llr_init_direct(ch, transmit(ch, ve), spec.gens)
    r = decode_hybrid_sepr(spec.omega_e, spec.gens, llr, HybridSchedule(16, 4, 2))
    assert r.converged and np.array_equal(r.x_hat, x)
    assert r.trace[-1] == 0
    assert len(r.trace) >= 1


def test_sepr_trace_every_iteration(spec, word):
    _, _, ve = word
    ch = ChannelModel("biawgn", 1.2, seed=4)
    llr = llr_init_direct(ch, transmit(ch, ve), spec.gens)
    r = decode_hybrid_sepr(spec.omega_e, spec.gens, llr, HybridSchedule(4, 2, 3))
    assert len(r.trace) == r.iterations
    if r.converged:
        assert r.trace[-1] == 0


def test_sepr_ops_within_contract(spec):
    dec = HybridDecoder(spec.omega_e, spec.gens, HybridSchedule())
    assert dec.static_ops["check_sum_max"] <= spec.q - 1
    assert dec.static_ops["tailor_max"] == spec.gens.weights.max()


def test_bec_single_erasure_filled(spec, word):
    x, _, ve = word
    er = np.zeros(ve.size, dtype=bool)
    er[np.flatnonzero(spec.gens.flat_mask)[3]] = True
    bits = ve.copy()
    bits[er] = 0
    r = decode_bec_hybrid(spec.omega_e, spec.gens, bits, er)
    assert r.converged and np.array_equal(r.x_hat, x)
    assert r.info["extended_erasures"] == 0


def test_bec_complete_uses_simplex_partner(spec, word):
    _, _, ve = word
    dec = BECDecoder(spec.omega_e, spec.gens)
    mask = spec.gens.masks
    j = int(np.flatnonzero(mask.all(axis=1))[0])
    er = np.zeros(ve.size, dtype=bool)
    er[j * (spec.q - 1) + 2] = True  # position 3 = 1 xor 2
    v = ve.copy()
    v[er] = 0
    assert dec.complete(v, er) >= 1
    assert not er.any() and np.array_equal(v, ve)


def test_bec_known_bits_untouched_and_order_independent(spec, word, rng):
    _, _, ve = word
    er = (rng.random(ve.size) < 0.45) & spec.gens.flat_mask
    bits = np.where(er, 0, ve).astype(np.uint8)
    base = decode_bec_hybrid(spec.omega_e, spec.gens, bits, er)
    known = spec.gens.flat_mask & ~er
    assert np.array_equal(base.v_hat[known], ve[known])
    left = base.info["extended_erased"]
    assert np.array_equal(base.v_hat[~left & spec.gens.flat_mask], ve[~left & spec.gens.flat_mask])
    for s in range(5):
        r = decode_bec_hybrid(spec.omega_e, spec.gens, bits, er, order_seed=s)
        assert np.array_equal(r.info["extended_erased"], left)
        assert np.array_equal(r.v_hat, base.v_hat)


def test_bec_erasure_set_shrinks(spec, word, rng):
    _, _, ve = word
    er = (rng.random(ve.size) < 0.6) & spec.gens.flat_mask
    r = decode_bec_hybrid(spec.omega_e, spec.gens, np.where(er, 0, ve), er)
    assert all(a >= b for a, b in zip(r.trace, r.trace[1:]))


def test_qspa_single_symbol_error(spec, word):
    x, xbar, _ = word
    llr = sat(xbar) / 6
    llr[:spec.p] = -llr[:spec.p]
    r = decode_qspa(spec.h, symbol_priors(llr, spec.p), 20)
    assert r.converged and np.array_equal(r.x_hat, x)


def test_qspa_uniform_priors_fail(spec):
    pri = np.full((spec.N, spec.q), 1.0 / spec.q)
    pri[:, 0] = pri[:, 1] = 0.5 / spec.q
    pri /= pri.sum(axis=1, keepdims=True)
    r = decode_qspa(spec.h, pri, 3)
    assert r.status == "max_iter"


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_backends_agree(seed):
    spec = girth6_code()
    rng = np.random.default_rng(seed)
    llr = rng.normal(1.0, 2.0, spec.omega_e.matrix.n_cols)
    out = []
    for name in ("python", "cython"):
        s = BPState(spec.omega_e.matrix, llr, name)
        trace = s.run(5, early_stop=False)
        out.append((trace, s.post.copy(), s.hard.copy(), s.check_ops.copy()))
    assert out[0][0] == out[1][0]
    assert np.allclose(out[0][1], out[1][1], atol=1e-9)
    assert np.array_equal(out[0][2], out[1][2])
    assert np.array_equal(out[0][3], out[1][3])


def test_hard_extend_matches_codeword(spec, word):
    _, xbar, ve = word
    assert np.array_equal(hard_extend(xbar, spec.gens), ve)
