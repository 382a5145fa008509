"""Shared decoder types: schedule, result record and symbol resolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .. import _kernels
from ..bitmatrix import BitMatrix
from ..graph import TannerGraph
from ..representation import GeneratorSet, parity_table

CONVERGED = "converged"
MAX_ITER = "max_iter"
INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class HybridSchedule:
    """Round structure of the hybrid decoder.

    Parameters
    ----------
    mu : int
        BP iterations per round.
    nu : int
        Hard-decision iterations per round.
    rounds : int
        Maximum number of rounds ``h``.
    flip_threshold : int or None
        Bit-flip threshold ``b``; ``None`` means ``ceil(d/2)`` per column.
    k_max : int
        Largest combination size searched by the flip rule (2 or 3).
    """

    mu: int = 16
    nu: int = 4
    rounds: int = 2
    flip_threshold: int | None = None
    k_max: int = 2

    def __post_init__(self):
        if min(self.mu, self.nu, self.rounds) < 1:
            raise ValueError("mu, nu and rounds must be >= 1")
        if self.flip_threshold is not None and self.flip_threshold < 1:
            raise ValueError("flip threshold must be >= 1")
        if self.k_max not in (2, 3):
            raise ValueError("k_max must be 2 or 3")

    @classmethod
    def from_max_iter(cls, max_iter: int, mu: int = 16, nu: int = 4, **kw) -> "HybridSchedule":
        """Rounds so that ``rounds * (mu + nu)`` stays within ``max_iter``."""
        return cls(mu, nu, max(1, max_iter // (mu + nu)), **kw)

    @property
    def max_iterations(self) -> int:
        return self.rounds * (self.mu + self.nu)


@dataclass
class DecodeResult:
    """Outcome of one decode.

    ``trace`` holds the syndrome weight after every iteration (BP and hard
    iterations alike). ``ops`` holds operation counters where a decoder
    records them.
    """

    status: str
    x_hat: np.ndarray | None
    xbar_hat: np.ndarray
    iterations: int
    trace: list[int] = field(default_factory=list)
    v_hat: np.ndarray | None = None
    ops: dict = field(default_factory=dict)
    erasures: int = 0
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED


@lru_cache(maxsize=16)
def tanner(m: BitMatrix) -> TannerGraph:
    return TannerGraph(m)


class BPState:
    """Flooding BP on one Tanner graph with persistent edge messages."""

    def __init__(self, m: BitMatrix, llr, backend: str | None = None):
        g = tanner(m)
        self.g = g
        self.llr = np.ascontiguousarray(llr, dtype=np.float64)
        if self.llr.size != g.n_vars:
            raise ValueError(f"LLR length {self.llr.size} does not match {g.n_vars} variables")
        self.v2c = np.ascontiguousarray(self.llr[g.chk_var])
        self.c2v = np.zeros(g.n_edges)
        self.post = self.llr.copy()
        self.hard = (self.llr < 0).astype(np.uint8)
        self.check_ops = np.zeros(g.n_checks, dtype=np.int64)
        self.impl = _kernels if backend is None else _kernels.BACKENDS[backend]

    def run(self, n_iter: int, early_stop: bool = True) -> list[int]:
        trace = np.zeros(n_iter, dtype=np.int64)
        g = self.g
        used = self.impl.bp_run(g.chk_ptr, g.chk_var, g.var_ptr, g.var_edge, self.llr, self.v2c,
                                self.c2v, self.post, self.hard, trace, self.check_ops,
                                int(n_iter), bool(early_stop))
        return trace[:used].tolist()

    def force_signs(self, bits) -> None:
        """Make every outgoing message agree in sign with ``bits`` (1 means negative)."""
        neg = np.asarray(bits, dtype=bool)[self.g.chk_var]
        a = np.abs(self.v2c)
        self.v2c[:] = np.where(neg, -a, a)


def syndrome_weight(m: BitMatrix, bits) -> int:
    return int(np.count_nonzero(m.matvec(bits)))


def resolve_frame(v, gens: GeneratorSet, post=None) -> tuple[np.ndarray, np.ndarray]:
    """Symbols from extended bits, plus a per-symbol consistency flag.

    A symbol is consistent when exactly one field element reproduces its
    active extended bits. Otherwise the element with the least (soft, if
    ``post`` is given) disagreement is returned.
    """
    p = gens.p
    T = parity_table(p).astype(bool)
    v = np.asarray(v, dtype=bool).reshape(gens.N, -1)
    mask = gens.masks
    mism = (v[:, None, :] != T[None, :, :]) & mask[:, None, :]
    hd = mism.sum(axis=2)
    exact = hd == 0
    consistent = exact.sum(axis=1) == 1
    if post is None:
        cost = hd.astype(float)
    else:
        w = np.abs(np.asarray(post, dtype=float).reshape(gens.N, -1)) + 1e-9
        cost = (mism * w[:, None, :]).sum(axis=2)
    x = np.argmin(cost, axis=1)
    x = np.where(consistent, np.argmax(exact, axis=1), x)
    return x.astype(np.int64), consistent


def default_thresholds(m: BitMatrix) -> np.ndarray:
    """Majority threshold ``ceil(d/2)`` per column (at least 1)."""
    d = m.col_weights()
    return np.maximum(1, (d + 1) // 2)


def ceil_half(d: int) -> int:
    return max(1, math.ceil(d / 2))
