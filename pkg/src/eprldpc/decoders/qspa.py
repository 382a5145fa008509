"""Reference q-ary sum-product decoding with direct O(q^2) check convolutions."""

from __future__ import annotations

import numpy as np

from ..representation import NonBinaryMatrix, bits_from_symbols
from .base import CONVERGED, MAX_ITER, DecodeResult

TINY = 1e-300


def symbol_priors(bit_llr, p: int) -> np.ndarray:
    """``(N, q)`` symbol probabilities from independent bit LLRs."""
    L = np.asarray(bit_llr, dtype=float).reshape(-1, p)
    q = 1 << p
    bits = (np.arange(q)[:, None] >> np.arange(p)[None, :]) & 1
    logp = -(L[:, None, :] * bits[None, :, :]).sum(axis=2)
    logp -= logp.max(axis=1, keepdims=True)
    P = np.exp(logp)
    return P / P.sum(axis=1, keepdims=True)


def _normalize(a):
    s = a.sum(axis=-1, keepdims=True)
    return a / np.maximum(s, TINY)


def decode_qspa(h: NonBinaryMatrix, priors, max_iter: int = 40) -> DecodeResult:
    """Symbol-level sum-product decoding.

    Parameters
    ----------
    h : NonBinaryMatrix
        Parity-check matrix over GF(q), q <= 64.
    priors : array_like, shape (N, q)
        Channel probabilities of each symbol value.
    max_iter : int
        Iteration limit; decoding stops early on a zero syndrome.
    """
    ctx = h.field
    q = ctx.q
    if q > 64:
        raise ValueError("reference QSPA is limited to q <= 64")
    P0 = _normalize(np.asarray(priors, dtype=float))
    M = h.M
    ent = np.asarray(h.entries)
    chk, var = np.nonzero(ent)
    coef = ent[chk, var]
    E = chk.size
    deg = np.bincount(chk, minlength=M)
    dmax = int(deg.max(initial=0))
    start = np.concatenate([[0], np.cumsum(deg)[:-1]])
    slot = np.arange(E) - start[chk]
    mul = ctx.mul_table
    # perm[e, a] = h_e * a; messages in the "h x" domain are indexed by that product
    perm = mul[coef[:, None], np.arange(q)[None, :]]
    xor_idx = np.arange(q)[:, None] ^ np.arange(q)[None, :]
    delta = np.zeros(q)
    delta[0] = 1.0

    v2c = P0[var].copy()
    x = np.argmax(P0, axis=1)
    trace: list[int] = []
    ops = 0

    def conv(a, b):
        # c[s] = sum_a a[a] b[a ^ s]
        return np.einsum("ma,mas->ms", a, b[:, xor_idx])

    if not h.syndrome(x).any():
        res = DecodeResult(CONVERGED, x, bits_from_symbols(x, ctx.p), 0, [0])
        res.ops["check_sum"] = 0
        return res

    it = 0
    for it in range(1, max_iter + 1):
        T = np.tile(delta, (M, dmax, 1))
        Tm = np.zeros((E, q))
        Tm[np.arange(E)[:, None], perm] = v2c
        T[chk, slot] = Tm
        fwd = np.empty((M, dmax + 1, q))
        bwd = np.empty((M, dmax + 1, q))
        fwd[:, 0] = delta
        bwd[:, dmax] = delta
        for k in range(dmax):
            fwd[:, k + 1] = _normalize(conv(fwd[:, k], T[:, k]))
            bwd[:, dmax - k - 1] = _normalize(conv(bwd[:, dmax - k], T[:, dmax - k - 1]))
        ops += 3 * E * q * q
        excl = conv(fwd[chk, slot], bwd[chk, slot + 1])
        c2v = _normalize(np.take_along_axis(excl, perm, axis=1))
        logc = np.log(np.maximum(c2v, TINY))
        tot = np.log(np.maximum(P0, TINY))
        np.add.at(tot, var, logc)
        x = np.argmax(tot, axis=1)
        ext = tot[var] - logc
        ext -= ext.max(axis=1, keepdims=True)
        v2c = _normalize(np.exp(ext))
        w = int(np.count_nonzero(h.syndrome(x)))
        trace.append(w)
        if w == 0:
            break
    status = CONVERGED if trace and trace[-1] == 0 else MAX_ITER
    res = DecodeResult(status, x, bits_from_symbols(x, ctx.p), it, trace)
    res.ops["check_sum"] = ops
    return res
