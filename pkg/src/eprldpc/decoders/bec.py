"""Erasure decoding: peeling on the EPR matrix plus simplex completion."""

from __future__ import annotations

import numpy as np

from ..representation import EPRMatrix, GeneratorSet, bits_from_symbols
from .base import CONVERGED, INCONSISTENT, MAX_ITER, DecodeResult, HybridSchedule, tanner
from .hard import combinations


def base_to_extended_erasures(bits, erased, gens: GeneratorSet) -> tuple[np.ndarray, np.ndarray]:
    """Extended bits and erasure flags implied by a base-bit reception.

    An extended bit is known iff every base bit it combines is known.
    """
    p = gens.p
    b = np.asarray(bits, dtype=np.int64).reshape(gens.N, p)
    e = np.asarray(erased, dtype=bool).reshape(gens.N, p)
    n = (1 << p) - 1
    val = np.zeros((gens.N, n), dtype=np.uint8)
    er = np.zeros((gens.N, n), dtype=bool)
    for jp in range(1, n + 1):
        S = [k for k in range(p) if jp >> k & 1]
        val[:, jp - 1] = np.bitwise_xor.reduce(b[:, S], axis=1)
        er[:, jp - 1] = e[:, S].any(axis=1)
    val[~gens.masks] = 0
    er &= gens.masks
    return val.ravel(), er.ravel()


class BECDecoder:
    """Flooding peeling and simplex completion to a fixpoint."""

    def __init__(self, omega_e: EPRMatrix, gens: GeneratorSet, k_max: int = 2):
        self.omega_e = omega_e
        self.gens = gens
        self.g = tanner(omega_e.matrix)
        self.k_max = k_max

    def peel(self, v: np.ndarray, er: np.ndarray) -> int:
        """One flooding pass over all checks; returns the number of bits filled."""
        g = self.g
        e_er = er[g.chk_var]
        cnt = np.bincount(g.edge_chk, weights=e_er, minlength=g.n_checks)
        par = np.bincount(g.edge_chk, weights=v[g.chk_var] & ~e_er, minlength=g.n_checks)
        sel = e_er & (cnt[g.edge_chk] == 1)
        tgt = g.chk_var[sel]
        if tgt.size == 0:
            return 0
        v[tgt] = (par[g.edge_chk[sel]].astype(np.int64) & 1).astype(v.dtype)
        er[tgt] = False
        return int(np.unique(tgt).size)

    def complete(self, v: np.ndarray, er: np.ndarray) -> int:
        """Fill erased active bits from known active combinations."""
        shape = self.gens.masks.shape
        V = v.reshape(shape)
        E = er.reshape(shape)
        masks = self.gens.masks
        known = masks & ~E
        combos = combinations(self.gens.p, self.k_max)
        filled = 0
        for jp in range(shape[1]):
            rows = np.flatnonzero(E[:, jp])
            if rows.size == 0:
                continue
            for C in combos[jp]:
                if C.size == 0 or rows.size == 0:
                    continue
                ok = known[rows][:, C].all(axis=2)
                have = ok.any(axis=1)
                if not have.any():
                    continue
                first = np.argmax(ok, axis=1)[have]
                r = rows[have]
                V[r, jp] = np.bitwise_xor.reduce(V[r[:, None], C[first]], axis=1)
                E[r, jp] = False
                filled += r.size
                rows = rows[~have]
        return filled

    def decode(self, bits, erased, sched: HybridSchedule | None = None, order_seed: int | None = None
               ) -> DecodeResult:
        v = np.asarray(bits, dtype=np.uint8).copy()
        er = np.asarray(erased, dtype=bool) & self.gens.flat_mask
        v[er] = 0
        max_rounds = 10_000 if sched is None else sched.rounds * (sched.mu + sched.nu)
        trace = [int(er.sum())]
        it = 0
        if order_seed is not None:
            self._serial(v, er, np.random.default_rng(order_seed))
            trace.append(int(er.sum()))
            it = 1
        else:
            while er.any() and it < max_rounds:
                changed = self.peel(v, er) + self.complete(v, er)
                it += 1
                trace.append(int(er.sum()))
                if not changed:
                    break
        return self._finish(v, er, it, trace)

    def _serial(self, v, er, rng) -> None:
        """Sequential peeling and completion in a random order, to a fixpoint."""
        g = self.g
        rows = [g.chk_var[g.chk_ptr[c]:g.chk_ptr[c + 1]] for c in range(g.n_checks)]
        shape = self.gens.masks.shape
        nq = shape[1]
        combos = combinations(self.gens.p, self.k_max)
        masks = self.gens.flat_mask
        changed = True
        while changed:
            changed = False
            for c in rng.permutation(g.n_checks):
                r = rows[c]
                e = r[er[r]]
                if e.size == 1:
                    v[e[0]] = np.bitwise_xor.reduce(v[r[~er[r]]]) if r.size > 1 else 0
                    er[e[0]] = False
                    changed = True
            for col in rng.permutation(np.flatnonzero(er)):
                j, jp = divmod(int(col), nq)
                base = j * nq
                for C in combos[jp]:
                    for comb in C:
                        idx = base + comb
                        if masks[idx].all() and not er[idx].any():
                            v[col] = np.bitwise_xor.reduce(v[idx])
                            er[col] = False
                            changed = True
                            break
                    if not er[col]:
                        break

    def _finish(self, v, er, it, trace) -> DecodeResult:
        gens = self.gens
        p = gens.p
        nq = gens.masks.shape[1]
        V = v.reshape(gens.N, nq)
        known = gens.masks & ~er.reshape(gens.N, nq)
        x = np.zeros(gens.N, dtype=np.int64)
        unknown_bits = np.zeros((gens.N, p), dtype=bool)
        consistent = True
        units = [(1 << k) - 1 for k in range(p)]
        direct = known[:, units].all(axis=1)
        x[direct] = (V[direct][:, units].astype(np.int64) << np.arange(p)).sum(axis=1)
        for j in np.flatnonzero(~direct):
            cols = np.flatnonzero(known[j]) + 1
            xj, undetermined, ok = _solve_symbol(cols, V[j, cols - 1], p)
            x[j] = xj
            unknown_bits[j] = undetermined
            consistent &= ok
        residual = int(unknown_bits.sum())
        if residual:
            status = MAX_ITER
        elif consistent:
            status = CONVERGED
        else:
            status = INCONSISTENT
        res = DecodeResult(status, x, bits_from_symbols(x, p), it, trace, v_hat=v, erasures=residual)
        res.info["extended_erasures"] = int(er.sum())
        res.info["extended_erased"] = er.copy()
        res.info["erased_bits"] = unknown_bits.ravel()
        return res


def _solve_symbol(cols, vals, p) -> tuple[int, np.ndarray, bool]:
    """Solve ``<x, j'> = v(j')`` for the known columns; undetermined bits read as 0."""
    basis: dict[int, tuple[int, int]] = {}
    ok = True
    for r, b in zip(cols.tolist(), vals.tolist()):
        while r:
            h = r.bit_length() - 1
            if h not in basis:
                basis[h] = (r, b)
                break
            br, bb = basis[h]
            r ^= br
            b ^= bb
        else:
            ok &= b == 0
    x = 0
    undetermined = np.zeros(p, dtype=bool)
    for k in range(p):
        t, acc = 1 << k, 0
        for h in range(p - 1, -1, -1):
            if t >> h & 1 and h in basis:
                t ^= basis[h][0]
                acc ^= basis[h][1]
        if t:
            undetermined[k] = True
        else:
            x |= acc << k
    return x, undetermined, ok


def decode_bec_hybrid(omega_e: EPRMatrix, gens: GeneratorSet, bits, erased,
                      sched: HybridSchedule | None = None, order_seed: int | None = None) -> DecodeResult:
    """Erasure decoding of extended bits; known bits are never altered.

    ``erasures`` in the result counts base bits left undetermined.
    """
    k = sched.k_max if sched is not None else 2
    return BECDecoder(omega_e, gens, k).decode(bits, erased, sched, order_seed)
