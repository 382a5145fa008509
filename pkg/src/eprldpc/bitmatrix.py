"""Sparse binary matrices over GF(2).

A :class:`BitMatrix` stores, for every row, the strictly increasing list of
columns holding a one (CSR layout). Rank uses bit-packed rows held as Python
integers, which stay cheap for the ~60000-column extended matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    pass


class BitMatrix:
    """Immutable sparse binary matrix."""

    __slots__ = ("n_rows", "n_cols", "indptr", "indices", "_hash")

    def __init__(self, n_rows: int, n_cols: int, rows: Iterable[Iterable[int]] = ()):
        rows = [np.unique(np.asarray(list(r), dtype=np.int64)) for r in rows]
        if len(rows) > n_rows:
            raise DimensionError("more rows supplied than n_rows")
        rows += [np.zeros(0, dtype=np.int64)] * (n_rows - len(rows))
        indptr = np.zeros(n_rows + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        self._set(n_rows, n_cols, indptr, indices.astype(np.int64))

    def _set(self, n_rows, n_cols, indptr, indices):
        if indices.size and (indices.min() < 0 or indices.max() >= n_cols):
            raise DimensionError("column index out of range")
        self.n_rows = int(n_rows)
        self.n_cols = int(n_cols)
        self.indptr = indptr
        self.indices = indices
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self._hash = None

    @classmethod
    def from_csr(cls, n_rows, n_cols, indptr, indices, check=True) -> "BitMatrix":
        m = cls.__new__(cls)
        indptr = np.asarray(indptr, dtype=np.int64).copy()
        indices = np.asarray(indices, dtype=np.int64).copy()
        if check:
            for i in range(n_rows):
                r = indices[indptr[i]:indptr[i + 1]]
                if r.size > 1 and np.any(np.diff(r) <= 0):
                    raise ValueError(f"row {i} indices not strictly increasing")
        m._set(n_rows, n_cols, indptr, indices)
        return m

    @classmethod
    def from_sorted_rows(cls, n_cols: int, rows: Sequence) -> "BitMatrix":
        """Fast path for rows that are already strictly increasing int arrays."""
        lens = [len(r) for r in rows]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(lens)
        parts = [np.asarray(r, dtype=np.int64) for r in rows if len(r)]
        idx = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        return cls.from_csr(len(rows), n_cols, indptr, idx, check=False)

    @classmethod
    def from_dense(cls, arr) -> "BitMatrix":
        a = np.atleast_2d(np.asarray(arr)) % 2
        csr = sp.csr_matrix(a.astype(np.int8))
        csr.sort_indices()
        return cls.from_csr(a.shape[0], a.shape[1], csr.indptr, csr.indices, check=False)

    @classmethod
    def from_scipy(cls, m) -> "BitMatrix":
        csr = sp.csr_matrix(m, dtype=np.int64)
        csr.data %= 2
        csr.eliminate_zeros()
        csr.sort_indices()
        return cls.from_csr(csr.shape[0], csr.shape[1], csr.indptr, csr.indices, check=False)

    @classmethod
    def zeros(cls, n_rows, n_cols) -> "BitMatrix":
        return cls.from_csr(n_rows, n_cols, np.zeros(n_rows + 1, dtype=np.int64), [], check=False)

    @classmethod
    def identity(cls, n) -> "BitMatrix":
        return cls.from_csr(n, n, np.arange(n + 1), np.arange(n), check=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def row(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    @property
    def rows(self) -> list[np.ndarray]:
        return [self.row(i) for i in range(self.n_rows)]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.indptr)

    def col_weights(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=self.n_cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        r = np.repeat(np.arange(self.n_rows), self.row_weights())
        out[r, self.indices] = 1
        return out

    def to_scipy(self) -> sp.csr_matrix:
        data = np.ones(self.nnz, dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=self.shape)

    @property
    def T(self) -> "BitMatrix":
        csc = self.to_scipy().tocsc()
        csc.sort_indices()
        return BitMatrix.from_csr(self.n_cols, self.n_rows, csc.indptr, csc.indices, check=False)

    def matvec(self, x) -> np.ndarray:
        """``self @ x`` over GF(2)."""
        x = np.asarray(x, dtype=np.int64).ravel()
        if x.size != self.n_cols:
            raise DimensionError(f"vector of length {x.size} for {self.n_cols} columns")
        return (self.to_scipy() @ (x & 1)) % 2

    def submatrix(self, rows=None, cols=None) -> "BitMatrix":
        m = self.to_scipy()
        if rows is not None:
            m = m[np.asarray(rows)]
        if cols is not None:
            m = m[:, np.asarray(cols)]
        return BitMatrix.from_scipy(m)

    def packed_rows(self) -> list[int]:
        """Rows as Python integers, bit ``c`` set for column ``c``."""
        out = []
        for i in range(self.n_rows):
            r = self.row(i)
            if r.size == 0:
                out.append(0)
                continue
            buf = np.zeros((self.n_cols + 7) // 8 * 8, dtype=np.uint8)
            buf[r] = 1
            out.append(int.from_bytes(np.packbits(buf, bitorder="little").tobytes(), "little"))
        return out

    def __eq__(self, other):
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return (self.shape == other.shape and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, self.indptr.tobytes(), self.indices.tobytes()))
        return self._hash

    def __repr__(self):
        return f"BitMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


@dataclass(frozen=True)
class BlockStructure:
    block_rows: int
    block_cols: int
    row_size: int
    col_size: int

    def check(self, m: BitMatrix) -> None:
        if self.block_rows * self.row_size != m.n_rows or self.block_cols * self.col_size != m.n_cols:
            raise DimensionError(f"{self} does not tile a {m.n_rows}x{m.n_cols} matrix")


def xor_basis_rank(vectors: Iterable[int]) -> int:
    """GF(2) rank of bit-packed vectors."""
    basis: dict[int, int] = {}
    for r in vectors:
        while r:
            h = r.bit_length() - 1
            b = basis.get(h)
            if b is None:
                basis[h] = r
                break
            r ^= b
    return len(basis)


def rank_f2(m: BitMatrix | np.ndarray) -> int:
    if not isinstance(m, BitMatrix):
        m = BitMatrix.from_dense(m)
    return xor_basis_rank(m.packed_rows())


def _as_bitmatrix(m) -> BitMatrix:
    return m if isinstance(m, BitMatrix) else BitMatrix.from_dense(m)


def gf2_mul(a, b) -> BitMatrix:
    a, b = _as_bitmatrix(a), _as_bitmatrix(b)
    if a.n_cols != b.n_rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return BitMatrix.from_scipy(a.to_scipy() @ b.to_scipy())


def kron(a, b) -> BitMatrix:
    a, b = _as_bitmatrix(a), _as_bitmatrix(b)
    return BitMatrix.from_scipy(sp.kron(a.to_scipy(), b.to_scipy(), format="csr"))


def block_diag(blocks: Sequence) -> BitMatrix:
    blocks = [_as_bitmatrix(b) for b in blocks]
    return BitMatrix.from_scipy(sp.block_diag([b.to_scipy() for b in blocks], format="csr"))


def hstack(blocks: Sequence) -> BitMatrix:
    blocks = [_as_bitmatrix(b) for b in blocks]
    return BitMatrix.from_scipy(sp.hstack([b.to_scipy() for b in blocks], format="csr"))


def vstack(blocks: Sequence) -> BitMatrix:
    blocks = [_as_bitmatrix(b) for b in blocks]
    return BitMatrix.from_scipy(sp.vstack([b.to_scipy() for b in blocks], format="csr"))


def weight(m, mode: str = "nonzero_columns") -> int:
    """Number of nonzero columns of a matrix, or nonzero entries of a vector."""
    if mode == "nonzero_entries_of_vector":
        return int(np.count_nonzero(np.asarray(m) % 2))
    if mode != "nonzero_columns":
        raise ValueError(f"unknown weight mode {mode!r}")
    if isinstance(m, BitMatrix):
        return int(np.count_nonzero(m.col_weights()))
    a = np.atleast_2d(np.asarray(m)) % 2
    return int(np.count_nonzero(a.any(axis=0)))


def precedes(a, b, strict: bool = False) -> bool:
    """True iff ``a`` is ``b`` with some columns replaced by zero vectors."""
    a = np.atleast_2d(np.asarray(a.to_dense() if isinstance(a, BitMatrix) else a)) % 2
    b = np.atleast_2d(np.asarray(b.to_dense() if isinstance(b, BitMatrix) else b)) % 2
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    nz = a.any(axis=0)
    if not np.array_equal(a[:, nz], b[:, nz]):
        return False
    if strict:
        return weight(a) < weight(b)
    return True


def extract_mother(m: BitMatrix, p: int) -> tuple[BitMatrix, bool]:
    """Split ``m`` into ``p x p`` blocks in place.

    Returns the block-occupancy (mother) matrix and whether every nonzero
    block has full rank ``p``. No row/column rearrangement is attempted.
    """
    if m.n_rows % p or m.n_cols % p:
        raise DimensionError(f"p={p} does not divide {m.shape}")
    mr, nc = m.n_rows // p, m.n_cols // p
    blocks: dict[tuple[int, int], list[int]] = {}
    for i in range(m.n_rows):
        bi, ri = divmod(i, p)
        for c in m.row(i):
            bj, cj = divmod(int(c), p)
            key = (bi, bj)
            if key not in blocks:
                blocks[key] = [0] * p
            blocks[key][ri] |= 1 << cj
    reducible = all(xor_basis_rank(rows) == p for rows in blocks.values())
    mother_rows = [[] for _ in range(mr)]
    for bi, bj in sorted(blocks):
        mother_rows[bi].append(bj)
    return BitMatrix(mr, nc, mother_rows), reducible


def blocks_of(m: BitMatrix, p: int) -> dict[tuple[int, int], np.ndarray]:
    """Nonzero ``p x p`` blocks of ``m`` keyed by block position."""
    dense_blocks: dict[tuple[int, int], np.ndarray] = {}
    for i in range(m.n_rows):
        bi, ri = divmod(i, p)
        for c in m.row(i):
            bj, cj = divmod(int(c), p)
            blk = dense_blocks.get((bi, bj))
            if blk is None:
                blk = dense_blocks[(bi, bj)] = np.zeros((p, p), dtype=np.uint8)
            blk[ri, cj] = 1
    return dense_blocks


def expand_mother(mother: BitMatrix, blocks: dict[tuple[int, int], np.ndarray], p: int) -> BitMatrix:
    """Inverse of :func:`extract_mother` given the block contents."""
    out = np.zeros((mother.n_rows * p, mother.n_cols * p), dtype=np.uint8)
    for i in range(mother.n_rows):
        for j in mother.row(i):
            out[i * p:(i + 1) * p, j * p:(j + 1) * p] = blocks[(i, int(j))]
    return BitMatrix.from_dense(out)
