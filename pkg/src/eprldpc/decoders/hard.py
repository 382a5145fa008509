"""Extended hard-decision bit flipping with simplex-consistency checks."""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from ..bitmatrix import BitMatrix
from ..representation import EPRMatrix, GeneratorSet, bits_from_symbols
from .base import (
    CONVERGED,
    INCONSISTENT,
    MAX_ITER,
    DecodeResult,
    HybridSchedule,
    default_thresholds,
    resolve_frame,
)


@lru_cache(maxsize=16)
def csr(m: BitMatrix) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    a = m.to_scipy().astype(np.int64)
    return a.tocsr(), a.T.tocsr()


@lru_cache(maxsize=None)
def combinations(p: int, k_max: int) -> list[list[np.ndarray]]:
    """For each ``j'`` (0-based), arrays of 0-based column tuples whose labels XOR to ``j'``.

    Entry ``[j'-1][k-2]`` is an array of shape ``(n, k)``; ``j'`` itself is
    never part of a combination.
    """
    n = (1 << p) - 1
    out = []
    for jp in range(1, n + 1):
        others = [c for c in range(1, n + 1) if c != jp]
        pairs = [(a, a ^ jp) for a in others if a < a ^ jp]
        rows = [np.array(pairs, dtype=np.int64).reshape(-1, 2) - 1]
        if k_max >= 3:
            triples = [(a, b, a ^ b ^ jp) for a, b in itertools.combinations(others, 2)
                       if b < (a ^ b ^ jp) and (a ^ b ^ jp) != jp]
            rows.append(np.array(triples, dtype=np.int64).reshape(-1, 3) - 1)
        out.append(rows)
    return out


def disagreements(v: np.ndarray, masks: np.ndarray, cand: np.ndarray, k_max: int) -> np.ndarray:
    """Flag candidate bits that some active combination contradicts.

    ``v`` and ``masks`` are ``(N, q-1)``; ``cand`` is a boolean array of the
    same shape selecting bits to examine.
    """
    n = v.shape[1]
    p = n.bit_length()
    combos = combinations(p, k_max)
    out = np.zeros_like(cand)
    for jp in range(n):
        rows = np.flatnonzero(cand[:, jp])
        if rows.size == 0:
            continue
        vr, mr = v[rows], masks[rows]
        hit = np.zeros(rows.size, dtype=bool)
        for C in combos[jp]:
            if C.size == 0:
                continue
            ok = mr[:, C].all(axis=2)
            par = np.bitwise_xor.reduce(vr[:, C], axis=2)
            hit |= (ok & (par != vr[:, jp][:, None])).any(axis=1)
        out[rows, jp] = hit
    return out


class HardDecoder:
    """Bit flipping on an EPR matrix; reusable across frames."""

    def __init__(self, omega_e: EPRMatrix, gens: GeneratorSet, flip_threshold: int | None = None,
                 k_max: int = 2):
        self.omega_e = omega_e
        self.gens = gens
        self.m = omega_e.matrix
        self.H, self.HT = csr(self.m)
        nq = gens.masks.shape[1]
        if flip_threshold is None:
            b = default_thresholds(self.m)
        else:
            b = np.full(self.m.n_cols, int(flip_threshold))
        self.b = b.reshape(gens.N, nq)
        self.k_max = k_max

    def syndrome(self, v) -> np.ndarray:
        return (self.H @ v.ravel().astype(np.int64)) & 1

    def step(self, v: np.ndarray, z: np.ndarray) -> int:
        """One flip iteration in place on ``v`` (shape ``(N, q-1)``); returns the flip count."""
        s = (self.HT @ z).reshape(v.shape)
        cand = (s >= self.b) & self.gens.masks
        if not cand.any():
            return 0
        flip = disagreements(v, self.gens.masks, cand, self.k_max)
        v ^= flip.astype(v.dtype)
        return int(flip.sum())

    def iterate(self, v: np.ndarray, n_iter: int, trace: list[int]) -> tuple[bool, int, bool]:
        """Up to ``n_iter`` iterations; returns (zero syndrome, iterations run, oscillated)."""
        seen = {v.tobytes()}
        z = self.syndrome(v)
        for it in range(n_iter):
            if not z.any():
                return True, it, False
            flips = self.step(v, z)
            z = self.syndrome(v)
            trace.append(int(z.sum()))
            if flips == 0:
                return not z.any(), it + 1, False
            key = v.tobytes()
            if key in seen:
                return not z.any(), it + 1, True
            seen.add(key)
        return not z.any(), n_iter, False

    def finish(self, v: np.ndarray, ok: bool, iterations: int, trace: list[int], post=None,
               **extra) -> DecodeResult:
        x, consistent = resolve_frame(v, self.gens, post)
        if not ok:
            status = MAX_ITER
        elif consistent.all():
            status = CONVERGED
        else:
            status = INCONSISTENT
        return DecodeResult(status, x, bits_from_symbols(x, self.gens.p), iterations, trace,
                            v_hat=v.ravel().astype(np.uint8), **extra)


def decode_hard_epr(omega_e: EPRMatrix, gens: GeneratorSet, v_init, sched: HybridSchedule | int = 20,
                    decoder: HardDecoder | None = None) -> DecodeResult:
    """Hard-decision decoding from initial extended bits.

    ``sched`` may be an iteration count or a :class:`HybridSchedule`, whose
    ``rounds * nu`` iterations and flip settings are used.
    """
    if isinstance(sched, HybridSchedule):
        n_iter = sched.rounds * sched.nu
        b, k = sched.flip_threshold, sched.k_max
    else:
        n_iter, b, k = int(sched), None, 2
    dec = decoder or HardDecoder(omega_e, gens, b, k)
    v = np.asarray(v_init, dtype=np.uint8).reshape(gens.N, -1).copy()
    v &= gens.masks.astype(np.uint8)
    trace: list[int] = [int(dec.syndrome(v).sum())]
    ok, its, osc = dec.iterate(v, n_iter, trace)
    res = dec.finish(v, ok, its, trace)
    res.info["oscillation"] = osc
    return res
