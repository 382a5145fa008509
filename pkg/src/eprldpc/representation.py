"""Binary images, extended (simplex-coded) representations and EPR matrices.

Indexing conventions
--------------------
Inside one symbol, extended positions and extended rows are numbered by the
integer ``1..q-1`` whose bits select a combination of the symbol's ``p`` bits
(position ``j'`` holds ``bits(j') . xbar_j``). In flat arrays symbol ``j``,
position ``j'`` lives at ``j*(q-1) + j' - 1``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .bitmatrix import BitMatrix, BlockStructure, DimensionError, precedes, xor_basis_rank
from .gf import GF2m, extender_basis


class RepresentationError(ValueError):
    pass


class SelectorError(RepresentationError):
    pass


class UnresolvableError(RepresentationError):
    """Generator matrix has rank < p; the symbol bits cannot be recovered."""


class InconsistentError(RepresentationError):
    """Extended symbol bits are not a codeword of the generator."""


@dataclass(frozen=True, eq=False)
class NonBinaryMatrix:
    field: GF2m
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=np.int64)
        if e.ndim != 2 or min(e.shape) < 1:
            raise DimensionError("non-binary matrix must be 2-D and non-empty")
        if e.min() < 0 or e.max() >= self.field.q:
            raise RepresentationError("entry outside the field")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def N(self) -> int:
        return self.entries.shape[1]

    def row_entries(self, i: int) -> list[tuple[int, int]]:
        cols = np.flatnonzero(self.entries[i])
        return [(int(c), int(self.entries[i, c])) for c in cols]

    def mother(self) -> BitMatrix:
        return BitMatrix.from_dense(self.entries != 0)

    def syndrome(self, x) -> np.ndarray:
        """``H @ x`` over GF(q)."""
        x = np.asarray(x, dtype=np.int64)
        prods = self.field.mul_table[self.entries, x[None, :]]
        return np.bitwise_xor.reduce(prods, axis=1)

    def __eq__(self, other):
        return (isinstance(other, NonBinaryMatrix) and self.field == other.field
                and np.array_equal(self.entries, other.entries))

    @classmethod
    def from_mother(cls, mother: BitMatrix, ctx: GF2m, values: Mapping[tuple[int, int], int]):
        e = np.zeros(mother.shape, dtype=np.int64)
        for (i, j), v in values.items():
            e[i, j] = v
        return cls(ctx, e)


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """A ``p``-block binary parity-check matrix with its matrix labels."""

    matrix: BitMatrix
    blocks: BlockStructure
    mother: BitMatrix
    labels: Mapping[tuple[int, int], np.ndarray]
    p: int
    h: NonBinaryMatrix | None = None

    @property
    def M(self) -> int:
        return self.mother.n_rows

    @property
    def N(self) -> int:
        return self.mother.n_cols

    @property
    def q(self) -> int:
        return 1 << self.p


def image_from_labels(mother: BitMatrix, labels: Mapping[tuple[int, int], np.ndarray], p: int,
                      h: NonBinaryMatrix | None = None) -> BinaryImage:
    """Fill ``mother`` with ``p x p`` labels; every label must be full rank."""
    rows: list[list[int]] = [[] for _ in range(mother.n_rows * p)]
    for i in range(mother.n_rows):
        for j in mother.row(i):
            j = int(j)
            lab = np.asarray(labels[(i, j)], dtype=np.uint8) % 2
            if lab.shape != (p, p):
                raise DimensionError(f"label at {(i, j)} has shape {lab.shape}")
            for r in range(p):
                rows[i * p + r].extend(j * p + np.flatnonzero(lab[r]))
    for key, lab in labels.items():
        if mother.to_dense()[key] == 0:
            raise RepresentationError(f"label at zero mother position {key}")
    mat = BitMatrix(mother.n_rows * p, mother.n_cols * p, rows)
    labs = {k: np.asarray(v, dtype=np.uint8) % 2 for k, v in labels.items()}
    for v in labs.values():
        v.setflags(write=False)
    return BinaryImage(mat, BlockStructure(mother.n_rows, mother.n_cols, p, p), mother, labs, p, h)


def binary_image(h: NonBinaryMatrix) -> BinaryImage:
    """Replace every ``h_ij`` by its companion matrix."""
    ctx = h.field
    mother = h.mother()
    labels = {}
    cache = {}
    for i in range(h.M):
        for j, v in h.row_entries(i):
            if v not in cache:
                cache[v] = ctx.companion_label(v)
            labels[(i, j)] = cache[v]
    return image_from_labels(mother, labels, ctx.p, h)


def label_row_ints(label: np.ndarray) -> list[int]:
    p = label.shape[0]
    return [int(sum(int(label[k, r]) << r for r in range(p))) for k in range(p)]


def omega_perm(label: np.ndarray) -> np.ndarray:
    """Permutation form of ``f_omega(Phi, label)``.

    Returns ``sigma`` with ``sigma[i'-1] = j'`` where ``j' = label.T @ bits(i')``
    (0 where that product vanishes, which only happens for singular labels).
    """
    label = np.asarray(label, dtype=np.uint8) % 2
    p = label.shape[0]
    q = 1 << p
    rows = label_row_ints(label)
    out = np.zeros(q - 1, dtype=np.int64)
    for ip in range(1, q):
        v = 0
        for k in range(p):
            if ip >> k & 1:
                v ^= rows[k]
        out[ip - 1] = v
    return out


def f_omega(basis_sel, label) -> np.ndarray:
    """The ``(q-1) x (q-1)`` matrix relating extended rows to extended bits.

    Entry ``(i', j')`` is one iff column ``j'`` of ``basis_sel`` is nonzero
    and equals ``label.T @ Phi[:, i']``.
    """
    basis_sel = np.asarray(basis_sel, dtype=np.uint8) % 2
    label = np.asarray(label, dtype=np.uint8) % 2
    p = label.shape[0]
    q = 1 << p
    phi = extender_basis(p)
    if basis_sel.shape != phi.shape:
        raise DimensionError(f"basis selection must be {phi.shape}")
    if not precedes(basis_sel, phi):
        raise RepresentationError("basis selection is not a column-zeroing of Phi")
    out = np.zeros((q - 1, q - 1), dtype=np.uint8)
    if not label.any():
        return out
    active = basis_sel.any(axis=0)
    sigma = omega_perm(label)
    for ip in range(1, q):
        jp = sigma[ip - 1]
        if jp and active[jp - 1]:
            out[ip - 1, jp - 1] = 1
    return out


def basis_with_columns(p: int, cols: Sequence[int]) -> np.ndarray:
    """``Phi`` with every column outside ``cols`` (1-based) zeroed."""
    phi = extender_basis(p).copy()
    keep = np.zeros(phi.shape[1], dtype=bool)
    keep[np.asarray(list(cols), dtype=np.int64) - 1] = True
    phi[:, ~keep] = 0
    return phi


@dataclass(frozen=True, eq=False)
class ExtendedMatrix:
    """``Omega``: every nonzero label replaced by its ``(q-1)``-permutation."""

    matrix: BitMatrix
    blocks: BlockStructure
    mother: BitMatrix
    perms: Mapping[tuple[int, int], np.ndarray]
    p: int

    @property
    def q(self) -> int:
        return 1 << self.p


def build_omega(img: BinaryImage) -> ExtendedMatrix:
    p, q = img.p, img.q
    n = q - 1
    perms = {key: omega_perm(lab) for key, lab in img.labels.items()}
    rows: list[list[int]] = [[] for _ in range(img.M * n)]
    for (i, j), sigma in perms.items():
        if np.any(sigma == 0):
            raise RepresentationError(f"label at {(i, j)} is not full rank")
        for ip in range(n):
            rows[i * n + ip].append(j * n + int(sigma[ip]) - 1)
    mat = BitMatrix(img.M * n, img.N * n, rows)
    return ExtendedMatrix(mat, BlockStructure(img.M, img.N, n, n), img.mother, perms, p)


@dataclass(frozen=True, eq=False)
class GeneratorMatrix:
    owner: int
    mask: np.ndarray  # bool, length q-1; mask[j'-1] true iff column j' active

    @property
    def p(self) -> int:
        return int(round(math.log2(len(self.mask) + 1)))

    @property
    def matrix(self) -> np.ndarray:
        phi = extender_basis(self.p).copy()
        phi[:, ~np.asarray(self.mask, dtype=bool)] = 0
        return phi

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.mask))

    def active(self) -> np.ndarray:
        """Active positions as 1-based integers."""
        return np.flatnonzero(self.mask) + 1


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    """Per-symbol active masks and per-(check, symbol) extended-row selectors."""

    p: int
    masks: np.ndarray  # (N, q-1) bool
    selectors: Mapping[tuple[int, int], frozenset] = dc_field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.masks, dtype=bool)
        if m.ndim != 2 or m.shape[1] != (1 << self.p) - 1:
            raise DimensionError("masks must be (N, q-1)")
        m.setflags(write=False)
        object.__setattr__(self, "masks", m)
        for key, sel in self.selectors.items():
            if any(not 1 <= s < (1 << self.p) for s in sel):
                raise SelectorError(f"selector {key} holds row outside [1, q-1]")

    @property
    def N(self) -> int:
        return self.masks.shape[0]

    def __getitem__(self, j: int) -> GeneratorMatrix:
        return GeneratorMatrix(j, self.masks[j])

    @property
    def weights(self) -> np.ndarray:
        return self.masks.sum(axis=1)

    @property
    def flat_mask(self) -> np.ndarray:
        return self.masks.ravel()

    @property
    def m_s(self) -> int:
        return int(self.masks.sum())

    @classmethod
    def full(cls, p: int, N: int, mother: BitMatrix | None = None) -> "GeneratorSet":
        n = (1 << p) - 1
        sel = {}
        if mother is not None:
            all_rows = frozenset(range(1, n + 1))
            sel = {(i, int(j)): all_rows for i in range(mother.n_rows) for j in mother.row(i)}
        return cls(p, np.ones((N, n), dtype=bool), sel)

    def __eq__(self, other):
        return (isinstance(other, GeneratorSet) and self.p == other.p
                and np.array_equal(self.masks, other.masks) and dict(self.selectors) == dict(other.selectors))


PROVENANCE = ("omega_row", "row_addition", "replacement_block")


@dataclass(frozen=True, eq=False)
class EPRMatrix:
    """Extended p-reducible parity-check matrix.

    ``row_check[r]``/``row_local[r]`` name the check and extended row
    ``i'`` a row came from (``-1``/``0`` for rows that are not plain
    ``Omega`` rows).
    """

    matrix: BitMatrix
    blocks: BlockStructure  # column tiling: N blocks of q-1 columns
    column_mask: np.ndarray
    provenance: tuple
    row_check: np.ndarray
    row_local: np.ndarray
    p: int

    def __post_init__(self):
        mask = np.asarray(self.column_mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "column_mask", mask)
        if mask.size != self.matrix.n_cols:
            raise DimensionError("column mask length mismatch")
        if len(self.provenance) != self.matrix.n_rows:
            raise DimensionError("provenance length mismatch")
        if np.any(self.matrix.col_weights()[~mask]):
            raise RepresentationError("inactive column carries a nonzero entry")

    @property
    def q(self) -> int:
        return 1 << self.p

    @property
    def N(self) -> int:
        return self.blocks.block_cols

    @classmethod
    def from_omega(cls, omega: ExtendedMatrix) -> "EPRMatrix":
        n = omega.q - 1
        M = omega.blocks.block_rows
        rc = np.repeat(np.arange(M), n)
        rl = np.tile(np.arange(1, n + 1), M)
        return cls(omega.matrix, BlockStructure(1, omega.blocks.block_cols, omega.matrix.n_rows, n),
                   np.ones(omega.matrix.n_cols, dtype=bool), ("omega_row",) * omega.matrix.n_rows,
                   rc, rl, omega.p)


@dataclass(frozen=True, eq=False)
class ExtendedCodeword:
    bits: np.ndarray  # flat, length N*(q-1); inactive positions are zero
    mask: np.ndarray  # flat bool
    p: int

    @property
    def n_symbols(self) -> int:
        return self.bits.size // ((1 << self.p) - 1)

    @property
    def m_s(self) -> int:
        return int(self.mask.sum())

    def symbol(self, j: int) -> np.ndarray:
        n = (1 << self.p) - 1
        return self.bits[j * n:(j + 1) * n]


def _parity_table(p: int) -> np.ndarray:
    """``table[x, j'-1] = popcount(x & j') % 2``."""
    q = 1 << p
    x = np.arange(q)[:, None]
    j = np.arange(1, q)[None, :]
    v = x & j
    par = np.zeros_like(v)
    for k in range(p):
        par ^= (v >> k) & 1
    return par.astype(np.uint8)


_PARITY: dict[int, np.ndarray] = {}


def parity_table(p: int) -> np.ndarray:
    t = _PARITY.get(p)
    if t is None:
        t = _PARITY[p] = _parity_table(p)
        t.setflags(write=False)
    return t


def symbols_from_bits(xbar, p: int) -> np.ndarray:
    x = np.asarray(xbar, dtype=np.int64).reshape(-1, p)
    return (x << np.arange(p)[None, :]).sum(axis=1)


def bits_from_symbols(x, p: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return ((x[:, None] >> np.arange(p)[None, :]) & 1).astype(np.uint8).ravel()


def extend_codeword(xbar, gens: GeneratorSet | None = None, p: int | None = None) -> ExtendedCodeword:
    """``v^e_j = Psi^eT_j xbar_j`` for every symbol; ``gens=None`` means full ``Phi``."""
    if gens is None and p is None:
        raise ValueError("need a generator set or p")
    p = gens.p if gens is not None else p
    xbar = np.asarray(xbar, dtype=np.int64).ravel()
    if xbar.size % p:
        raise DimensionError(f"length {xbar.size} is not a multiple of p={p}")
    N = xbar.size // p
    if gens is not None and gens.N != N:
        raise DimensionError(f"length {xbar.size} does not match {gens.N} symbols of {p} bits")
    v = parity_table(p)[symbols_from_bits(xbar, p)]
    mask = np.ones(v.shape, dtype=bool) if gens is None else gens.masks
    v = np.where(mask, v, 0).astype(np.uint8)
    return ExtendedCodeword(v.ravel(), mask.ravel().copy(), p)


def resolve_symbol(vj, gen: GeneratorMatrix | np.ndarray) -> np.ndarray:
    """Recover ``xbar_j`` from its extended bits.

    Raises :class:`UnresolvableError` if the active columns have rank < p and
    :class:`InconsistentError` if ``vj`` is not in the generator's code.
    """
    mask = gen.mask if isinstance(gen, GeneratorMatrix) else np.asarray(gen, dtype=bool)
    vj = np.asarray(vj, dtype=np.int64) & 1
    q = mask.size + 1
    p = q.bit_length() - 1
    active = np.flatnonzero(mask) + 1
    if all(mask[(1 << k) - 1] for k in range(p)):
        x = sum(int(vj[(1 << k) - 1]) << k for k in range(p))
    else:
        # Gaussian elimination on rows (bits(j') | v(j')).
        basis: dict[int, tuple[int, int]] = {}
        for jp in active:
            r, b = int(jp), int(vj[jp - 1])
            while r:
                h = r.bit_length() - 1
                if h in basis:
                    br, bb = basis[h]
                    r ^= br
                    b ^= bb
                else:
                    basis[h] = (r, b)
                    break
        if len(basis) < p:
            raise UnresolvableError(f"generator rank {len(basis)} < p={p}")
        x = 0
        for h in sorted(basis):
            r, b = basis[h]
            lower = r & ~(1 << h)
            # bits below h are already solved
            b ^= bin(lower & x).count("1") & 1
            if b:
                x |= 1 << h
    expected = parity_table(p)[x]
    if np.any(expected[mask] != vj[mask]):
        raise InconsistentError("extended symbol is not a generator codeword")
    return np.array([(x >> k) & 1 for k in range(p)], dtype=np.uint8)


def gaussian_binomial(n: int, k: int, base: int = 2) -> int:
    if not 0 <= k <= n:
        return 0
    num = den = 1
    for i in range(k):
        num *= base ** (n - i) - 1
        den *= base ** (i + 1) - 1
    return num // den


def _full_rank_subset(vals, p) -> bool:
    return xor_basis_rank(vals) == p


def resolvability_probability(ctx: GF2m | int, w: int, *, exhaustive_limit: int = 10**6,
                              trials: int = 100_000, seed: int = 0) -> Fraction:
    """Probability that ``w`` distinct random nonzero p-bit vectors have rank p."""
    p = ctx if isinstance(ctx, int) else ctx.p
    q = 1 << p
    if p < 2 or not 1 <= w <= q - 1:
        raise ValueError(f"w={w} out of range for q={q}")
    half = q // 2 - 1
    if w > half:
        return Fraction(1)
    total = math.comb(q - 1, w)
    if w == half:
        return 1 - Fraction(gaussian_binomial(p, p - 1), total)
    if total <= exhaustive_limit:
        return exhaustive_resolvability(p, w)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(trials):
        vals = rng.choice(np.arange(1, q), size=w, replace=False)
        hits += _full_rank_subset([int(v) for v in vals], p)
    return Fraction(hits, trials)


def exhaustive_resolvability(p: int, w: int) -> Fraction:
    q = 1 << p
    good = total = 0
    for combo in itertools.combinations(range(1, q), w):
        total += 1
        good += _full_rank_subset(combo, p)
    return Fraction(good, total)


def _check_selectors(img: BinaryImage, gens: GeneratorSet, perms) -> dict[int, frozenset]:
    """Per-check selected rows; selectors must agree across a check."""
    per_check: dict[int, frozenset] = {}
    for i in range(img.M):
        sels = {gens.selectors.get((i, int(j)), frozenset()) for j in img.mother.row(i)}
        if len(sels) > 1:
            raise SelectorError(f"check {i}: selectors disagree across symbols; rows would not be parity checks")
        per_check[i] = sels.pop() if sels else frozenset()
    for (i, j), sel in gens.selectors.items():
        if (i, j) not in perms:
            raise SelectorError(f"selector at zero mother position {(i, j)}")
        sigma = perms[(i, j)]
        for ip in sel:
            if not gens.masks[j, sigma[ip - 1] - 1]:
                raise SelectorError(f"row {ip} of block {(i, j)} uses inactive column {sigma[ip - 1]}")
    return per_check


def apply_f_e(img: BinaryImage, gens: GeneratorSet) -> EPRMatrix:
    """Build ``Omega^e`` block by block from the per-(check, symbol) selectors.

    Block ``(i, j)`` is the sum over selected rows ``i'`` of
    ``f_omega(Phi restricted to column sigma(i'), A_ij)``. Rows stay aligned
    to ``M*(q-1)`` slots; unselected rows are zero.
    """
    n = img.q - 1
    if gens.N != img.N or gens.p != img.p:
        raise DimensionError("generator set does not match the image")
    perms = {key: omega_perm(lab) for key, lab in img.labels.items()}
    _check_selectors(img, gens, perms)
    rows: list[list[int]] = [[] for _ in range(img.M * n)]
    for (i, j), sel in sorted(gens.selectors.items()):
        lab = img.labels[(i, j)]
        sigma = perms[(i, j)]
        block = np.zeros((n, n), dtype=np.uint8)
        for ip in sorted(sel):
            block |= f_omega(basis_with_columns(img.p, [sigma[ip - 1]]), lab)
        for r, c in zip(*np.nonzero(block)):
            rows[i * n + r].append(j * n + c)
    mat = BitMatrix(img.M * n, img.N * n, rows)
    rc = np.repeat(np.arange(img.M), n)
    rl = np.tile(np.arange(1, n + 1), img.M)
    return EPRMatrix(mat, BlockStructure(1, img.N, mat.n_rows, n), gens.flat_mask.copy(),
                     ("omega_row",) * mat.n_rows, rc, rl, img.p)


def extended_row_functional(cols, p: int) -> int:
    """The linear functional on ``xbar`` (bit-packed) computed by an extended row."""
    n = (1 << p) - 1
    f = 0
    for c in cols:
        j, r = divmod(int(c), n)
        f ^= (r + 1) << (j * p)
    return f


def functionals(m: BitMatrix, p: int) -> list[int]:
    return [extended_row_functional(m.row(r), p) for r in range(m.n_rows)]


def is_complete(omega_e: EPRMatrix | BitMatrix, img: BinaryImage) -> bool:
    """True iff the rows of ``omega_e`` imply every parity check of ``img``."""
    m = omega_e.matrix if isinstance(omega_e, EPRMatrix) else omega_e
    f = functionals(m, img.p)
    hb = img.matrix.packed_rows()
    r_h = xor_basis_rank(hb)
    return xor_basis_rank(f) == r_h and xor_basis_rank(f + hb) == r_h


def is_valid(omega_e: EPRMatrix | BitMatrix, img: BinaryImage) -> bool:
    """True iff every row of ``omega_e`` is a parity relation of the code."""
    m = omega_e.matrix if isinstance(omega_e, EPRMatrix) else omega_e
    hb = img.matrix.packed_rows()
    r_h = xor_basis_rank(hb)
    f = functionals(m, img.p)
    return xor_basis_rank(f + hb) == r_h
