"""Encoding over GF(q), binary-input channels and LLR initialization.

LLRs are ``log P(bit=0)/P(bit=1)``: positive favours 0. BPSK maps bit ``b``
to ``1 - 2b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .bitmatrix import rank_f2
from .representation import (
    BinaryImage,
    EPRMatrix,
    GeneratorSet,
    NonBinaryMatrix,
    bits_from_symbols,
    build_omega,
    parity_table,
    symbols_from_bits,
)

LLR_SAT = 30.0


class ModeError(ValueError):
    pass


def rref_gfq(h: NonBinaryMatrix, reverse: bool = False) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(q); returns (R, pivot columns).

    ``reverse`` picks pivots from the last column backwards, which leaves
    the information symbols at the front of a systematic codeword.
    """
    ctx = h.field
    mul, inv = ctx.mul_table, ctx.inv_table
    a = np.array(h.entries, dtype=np.int64)
    M, N = a.shape
    pivots: list[int] = []
    r = 0
    for c in (range(N - 1, -1, -1) if reverse else range(N)):
        if r == M:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = mul[inv[a[r, c]], a[r]]
        col = a[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            a[rows] ^= mul[col[rows][:, None], a[r][None, :]]
        pivots.append(c)
        r += 1
    return a[:r], pivots


class Encoder:
    """Systematic encoder: information symbols sit on the non-pivot columns.

    Pivots are taken from the right, so for a full-rank ``H`` with an
    invertible trailing block the information symbols come first.
    """

    def __init__(self, h: NonBinaryMatrix):
        self.h = h
        self.ctx = h.field
        self.R, self.pivots = rref_gfq(h, reverse=True)
        piv = set(self.pivots)
        self.info_cols = [c for c in range(h.N) if c not in piv]
        self._coef = self.R[:, self.info_cols]

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def k(self) -> int:
        return self.h.N - self.rank

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.int64)
        if info.size != self.k:
            raise ValueError(f"need {self.k} information symbols, got {info.size}")
        x = np.zeros(self.h.N, dtype=np.int64)
        x[self.info_cols] = info
        if self.rank:
            x[self.pivots] = np.bitwise_xor.reduce(self.ctx.mul_table[self._coef, info[None, :]], axis=1) \
                if self.k else 0
        return x

    def random_codeword(self, rng: np.random.Generator) -> np.ndarray:
        return self.encode(rng.integers(0, self.ctx.q, size=self.k))


@dataclass(eq=False)
class CodeSpec:
    """A non-binary code with its binary image and an EPR matrix."""

    h: NonBinaryMatrix
    img: BinaryImage
    omega_e: EPRMatrix
    gens: GeneratorSet
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.img.N != self.h.N or self.gens.N != self.h.N:
            raise ValueError("component dimensions disagree")
        if self.omega_e.matrix.n_cols != self.h.N * (self.img.q - 1):
            raise ValueError("EPR matrix width does not match N*(q-1)")

    @classmethod
    def from_image(cls, img: BinaryImage, omega_e: EPRMatrix | None = None,
                   gens: GeneratorSet | None = None, meta: dict | None = None) -> "CodeSpec":
        if img.h is None:
            raise ValueError("image carries no non-binary matrix")
        if omega_e is None:
            omega_e = EPRMatrix.from_omega(build_omega(img))
            gens = GeneratorSet.full(img.p, img.N, img.mother)
        if gens is None:
            raise ValueError("an EPR matrix needs its generator set")
        return cls(img.h, img, omega_e, gens, dict(meta or {}))

    @property
    def p(self) -> int:
        return self.img.p

    @property
    def q(self) -> int:
        return self.img.q

    @property
    def N(self) -> int:
        return self.h.N

    @property
    def Np(self) -> int:
        return self.h.N * self.p

    @property
    def M_s(self) -> int:
        return self.gens.m_s

    @cached_property
    def encoder(self) -> Encoder:
        return Encoder(self.h)

    @property
    def rate(self) -> Fraction:
        return Fraction(self.encoder.k, self.N)

    @cached_property
    def rate_extended(self) -> Fraction:
        return 1 - Fraction(rank_f2(self.omega_e.matrix), self.M_s)

    def rate_for(self, mode: str) -> float:
        if mode == "base":
            return float(self.rate)
        if mode == "extended":
            # k information bits carried by M_s channel uses
            return float(self.rate_extended)
        raise ModeError(f"unknown transmission mode {mode!r}")


def encode(spec: CodeSpec, info=None, seed: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(x, xbar)``; random information symbols when ``info`` is None."""
    if info is None:
        info = np.random.default_rng(seed).integers(0, spec.q, size=spec.encoder.k)
    x = spec.encoder.encode(info)
    return x, bits_from_symbols(x, spec.p)


def ebn0_to_sigma(ebn0_db: float, rate: float) -> float:
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def sigma_to_ebn0(sigma: float, rate: float) -> float:
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


@dataclass(frozen=True)
class ChannelModel:
    """``kind`` is ``bsc`` (param = crossover), ``bec`` (erasure) or ``biawgn`` (sigma)."""

    kind: str
    param: float
    seed: int = 0

    def __post_init__(self):
        if self.kind == "bsc" and not 0 <= self.param <= 0.5:
            raise ValueError("crossover must lie in [0, 1/2]")
        if self.kind == "bec" and not 0 <= self.param <= 1:
            raise ValueError("erasure probability must lie in [0, 1]")
        if self.kind == "biawgn" and not self.param >= 0:
            raise ValueError("sigma must be non-negative")
        if self.kind not in ("bsc", "bec", "biawgn"):
            raise ValueError(f"unknown channel {self.kind!r}")

    @classmethod
    def awgn_ebn0(cls, ebn0_db: float, rate: float, seed: int = 0) -> "ChannelModel":
        return cls("biawgn", ebn0_to_sigma(ebn0_db, rate), seed)

    @property
    def sigma2(self) -> float:
        return self.param * self.param

    def rng(self, frame: int, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, frame, stream])


def transmit(ch: ChannelModel, bits, frame: int = 0, stream: int = 0):
    """Pass bits through the channel; deterministic per ``(seed, frame, stream)``.

    Returns flipped bits (BSC), a pair ``(bits, erased)`` (BEC) or BPSK
    samples plus noise (BI-AWGN).
    """
    bits = np.asarray(bits, dtype=np.uint8) & 1
    rng = ch.rng(frame, stream)
    if ch.kind == "bsc":
        return bits ^ (rng.random(bits.size) < ch.param).astype(np.uint8)
    if ch.kind == "bec":
        return bits.copy(), rng.random(bits.size) < ch.param
    return (1.0 - 2.0 * bits) + ch.param * rng.standard_normal(bits.size)


def channel_llr(ch: ChannelModel, received) -> np.ndarray:
    """Per-bit LLRs of a received sequence of the same length."""
    if ch.kind == "biawgn":
        if ch.param == 0:
            return np.clip(np.sign(received) * LLR_SAT, -LLR_SAT, LLR_SAT)
        return np.clip(2.0 * np.asarray(received, dtype=float) / ch.sigma2, -LLR_SAT, LLR_SAT)
    if ch.kind == "bsc":
        r = np.asarray(received, dtype=float)
        mag = LLR_SAT if ch.param == 0 else min(LLR_SAT, math.log((1 - ch.param) / ch.param))
        return mag * (1.0 - 2.0 * r)
    bits, erased = received
    out = LLR_SAT * (1.0 - 2.0 * np.asarray(bits, dtype=float))
    out[np.asarray(erased, dtype=bool)] = 0.0
    return out


def llr_init_direct(ch: ChannelModel, y_e, gens: GeneratorSet | None = None) -> np.ndarray:
    """``2 y / sigma^2`` per extended bit; inactive positions get 0."""
    if ch.kind != "biawgn":
        raise ModeError("direct initialization needs a BI-AWGN channel")
    llr = channel_llr(ch, np.asarray(y_e, dtype=float))
    if gens is not None:
        if llr.size != gens.flat_mask.size:
            raise ModeError("received length does not match the extended length")
        llr = np.where(gens.flat_mask, llr, 0.0)
    return llr


def extended_llr_from_base(base_llr, gens: GeneratorSet) -> np.ndarray:
    """Min-magnitude, parity-sign combination of base-bit LLRs for each extended bit."""
    p = gens.p
    n = (1 << p) - 1
    L = np.asarray(base_llr, dtype=float).reshape(-1, p)
    if L.shape[0] != gens.N:
        raise ModeError("base length does not match the generator set")
    mag = np.abs(L)
    neg = L < 0
    out = np.zeros((gens.N, n))
    for jp in range(1, n + 1):
        S = [k for k in range(p) if jp >> k & 1]
        m = mag[:, S].min(axis=1)
        par = np.bitwise_xor.reduce(neg[:, S], axis=1)
        out[:, jp - 1] = np.where(par, -m, m)
    out[~gens.masks] = 0.0
    return out.ravel()


def llr_init_indirect(ch: ChannelModel, ybar, gens: GeneratorSet) -> np.ndarray:
    """Extended-bit LLRs from a transmitted base sequence ``ybar``.

    Magnitude ``2/sigma^2 * min |ybar(i)|`` over the bits combined by the
    extended position; the sign is negative iff their hard decisions XOR
    to one.
    """
    if ch.kind != "biawgn":
        raise ModeError("indirect initialization needs a BI-AWGN channel")
    return extended_llr_from_base(channel_llr(ch, np.asarray(ybar, dtype=float)), gens)


def support_sets(p: int) -> list[list[int]]:
    """Base-bit offsets combined by each extended position ``1..q-1``."""
    return [[k for k in range(p) if jp >> k & 1] for jp in range(1, 1 << p)]


def hard_extend(bits, gens: GeneratorSet) -> np.ndarray:
    """``Psi^eT_j y_j`` for hard base decisions (inactive positions 0)."""
    p = gens.p
    v = parity_table(p)[symbols_from_bits(bits, p)]
    return np.where(gens.masks, v, 0).astype(np.uint8).ravel()
