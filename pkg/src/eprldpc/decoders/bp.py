"""Binary BP on a bit-level parity-check matrix and the hybrid EPR decoder."""

from __future__ import annotations

import numpy as np

from ..bitmatrix import BitMatrix
from ..representation import EPRMatrix, GeneratorSet, symbols_from_bits
from .base import CONVERGED, MAX_ITER, BPState, DecodeResult, HybridSchedule
from .hard import HardDecoder


def decode_binary_bp(hbar: BitMatrix, llr, max_iter: int = 40, p: int | None = None,
                     backend: str | None = None) -> DecodeResult:
    """Tanh-rule flooding BP with early stop on a zero syndrome.

    With ``p`` given, the decision is also grouped into GF(2^p) symbols.
    """
    st = BPState(hbar, llr, backend)
    trace = st.run(max_iter)
    ok = bool(trace) and trace[-1] == 0
    bits = st.hard.copy()
    x = symbols_from_bits(bits, p) if p else None
    res = DecodeResult(CONVERGED if ok else MAX_ITER, x, bits, len(trace), trace)
    res.ops["row_degree_max"] = int(st.check_ops.max(initial=0))
    return res


def check_sum_work(omega_e: EPRMatrix, used: np.ndarray | None = None) -> np.ndarray:
    """Distinct active columns of each (constraint block, symbol) pair touched by BP.

    The binary rows of one constraint block that meet one symbol form a
    single check-vector-sum; its work is the number of distinct extended
    columns involved. Replacement rows of a symbol are counted as one
    block. ``used`` restricts the count to rows that were processed.
    """
    m = omega_e.matrix
    nq = omega_e.q - 1
    rows = np.repeat(np.arange(m.n_rows), m.row_weights())
    if used is not None:
        keep = np.asarray(used, dtype=bool)[rows]
    else:
        keep = np.ones(rows.size, dtype=bool)
    rows = rows[keep]
    blk = np.asarray(omega_e.row_check)[rows]
    col = m.indices[keep]
    if not col.size:
        return np.zeros(0, dtype=np.int64)
    n_cols = m.n_cols
    # (block, column) pairs, block shifted so replacement rows (-1) stay distinct
    pairs = np.unique((blk + 1) * n_cols + col)
    _, counts = np.unique(pairs // nq, return_counts=True)
    return counts


class HybridDecoder:
    """Alternating BP and hard-decision rounds on an EPR matrix."""

    def __init__(self, omega_e: EPRMatrix, gens: GeneratorSet, sched: HybridSchedule,
                 backend: str | None = None):
        self.omega_e = omega_e
        self.gens = gens
        self.sched = sched
        self.backend = backend
        self.hard = HardDecoder(omega_e, gens, sched.flip_threshold, sched.k_max)
        work = check_sum_work(omega_e)
        self.static_ops = {
            "check_sum_max": int(work.max(initial=0)),
            "tailor_max": int(gens.weights.max(initial=0)),
        }

    def decode(self, llr) -> DecodeResult:
        s = self.sched
        st = BPState(self.omega_e.matrix, llr, self.backend)
        shape = self.gens.masks.shape
        trace: list[int] = []
        iterations = 0
        ok = False
        v = st.hard.reshape(shape).copy()
        for _ in range(s.rounds):
            t = st.run(s.mu)
            trace += t
            iterations += len(t)
            v = st.hard.reshape(shape).copy()
            if t and t[-1] == 0:
                ok = True
                break
            ok, its, _ = self.hard.iterate(v, s.nu, trace)
            iterations += its
            if ok:
                break
            st.force_signs(v.ravel())
        res = self.hard.finish(v, ok, iterations, trace, post=st.post)
        res.ops.update(self.static_ops)
        res.ops["check_sum_max"] = int(check_sum_work(self.omega_e, st.check_ops > 0).max(initial=0))
        res.ops["row_degree_max"] = int(st.check_ops.max(initial=0))
        return res


def decode_hybrid_sepr(omega_e: EPRMatrix, gens: GeneratorSet, llr, sched: HybridSchedule | None = None,
                       backend: str | None = None) -> DecodeResult:
    """Hybrid parallel decoding from extended-bit LLRs.

    Each round runs ``mu`` BP iterations, then ``nu`` hard-decision
    iterations from the BP hard decision, and forces every variable-to-check
    message to the sign of the resulting bit (negative for 1).
    """
    return HybridDecoder(omega_e, gens, sched or HybridSchedule(), backend).decode(llr)
