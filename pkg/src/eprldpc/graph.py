"""Tanner-graph cycle analysis and label-collision probabilities."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import networkx as nx
import numpy as np

from . import _kernels
from .bitmatrix import BitMatrix
from .gf import GF2m
from .representation import EPRMatrix, ExtendedMatrix, omega_perm


class TannerGraph:
    """Bipartite check/variable adjacency in CSR form, edges in check order."""

    def __init__(self, m: BitMatrix):
        self.matrix = m
        self.n_checks, self.n_vars = m.shape
        self.chk_ptr = np.ascontiguousarray(m.indptr, dtype=np.int64)
        self.chk_var = np.ascontiguousarray(m.indices, dtype=np.int64)
        self.edge_chk = np.repeat(np.arange(self.n_checks, dtype=np.int64), m.row_weights())
        order = np.argsort(self.chk_var, kind="stable")
        self.var_edge = np.ascontiguousarray(order, dtype=np.int64)
        counts = np.bincount(self.chk_var, minlength=self.n_vars)
        self.var_ptr = np.zeros(self.n_vars + 1, dtype=np.int64)
        self.var_ptr[1:] = np.cumsum(counts)
        self.var_chk = np.ascontiguousarray(self.edge_chk[order])

    @property
    def n_edges(self) -> int:
        return int(self.chk_var.size)

    @property
    def check_degrees(self) -> np.ndarray:
        return np.diff(self.chk_ptr)

    @property
    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def edge_girth(self, cap: int, edges=None, backend=None) -> tuple[np.ndarray, np.ndarray]:
        """Shortest-cycle length (0 if none <= cap) and count for each edge."""
        if edges is None:
            qc, qv = self.edge_chk, self.chk_var
        else:
            edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
            qc, qv = edges[:, 0].copy(), edges[:, 1].copy()
        out_len = np.zeros(len(qc), dtype=np.int64)
        out_cnt = np.zeros(len(qc), dtype=np.float64)
        impl = _kernels if backend is None else _kernels.BACKENDS[backend]
        impl.edge_girth(self.chk_ptr, self.chk_var, self.var_ptr, self.var_chk,
                        np.ascontiguousarray(qc), np.ascontiguousarray(qv), int(cap), out_len, out_cnt)
        return out_len, out_cnt


@dataclass
class GirthReport:
    """Result of :func:`girth`.

    ``girth`` is 0 when no cycle of length <= ``cap`` exists; ``beyond_cap``
    distinguishes a cycle-free graph from one whose girth exceeds ``cap``.
    ``short_cycle_counts`` always holds the exact girth-length count; other
    lengths are present only when ``exhaustive`` enumeration ran.
    """

    girth: int
    cap: int
    short_cycle_counts: dict = dc_field(default_factory=dict)
    edge_girth: np.ndarray | None = None
    beyond_cap: bool = False
    exhaustive: bool = False

    def describe(self) -> str:
        if self.girth:
            return f"girth: {self.girth}"
        if self.beyond_cap:
            return f"girth: > {self.cap}"
        return "girth: 0 (cycle-free)"


def _has_cycle(m: BitMatrix) -> bool:
    # A bipartite graph is a forest iff E = V - components.
    g = nx.Graph()
    g.add_nodes_from(range(m.n_rows + m.n_cols))
    for i in range(m.n_rows):
        g.add_edges_from((m.n_cols + i, int(j)) for j in m.row(i))
    return g.number_of_edges() > g.number_of_nodes() - nx.number_connected_components(g)


def count_cycles_exhaustive(m: BitMatrix, cap: int) -> dict[int, int]:
    """Count simple cycles of every length <= cap by rooted DFS (small graphs only)."""
    n = m.n_cols
    adj: list[list[int]] = [[] for _ in range(n + m.n_rows)]
    for i in range(m.n_rows):
        for j in m.row(i):
            adj[n + i].append(int(j))
            adj[int(j)].append(n + i)
    counts: dict[int, int] = {}
    for s in range(len(adj)):
        stack = [(s, iter(adj[s]))]
        on_path = {s}
        while stack:
            u, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                on_path.discard(u)
                continue
            if nxt == s and len(stack) >= 3:
                counts[len(stack)] = counts.get(len(stack), 0) + 1
            elif nxt > s and nxt not in on_path and len(stack) < cap:
                stack.append((nxt, iter(adj[nxt])))
                on_path.add(nxt)
    # every cycle is found once per direction from its smallest node
    return {k: v // 2 for k, v in sorted(counts.items()) if k % 2 == 0}


def girth(m: BitMatrix | TannerGraph, cap: int = 12, exhaustive: bool | None = None) -> GirthReport:
    """Girth with exact shortest-cycle count, by BFS from every edge.

    Parameters
    ----------
    cap : int
        Even bound >= 4 on the cycle lengths examined.
    exhaustive : bool, optional
        Also enumerate every cycle up to ``cap``. Defaults to true for graphs
        with at most 60 edges.
    """
    if cap < 4 or cap % 2:
        raise ValueError("cap must be even and >= 4")
    tg = m if isinstance(m, TannerGraph) else TannerGraph(m)
    lens, cnts = tg.edge_girth(cap)
    found = lens[lens > 0]
    if exhaustive is None:
        exhaustive = tg.n_edges <= 60
    if found.size == 0:
        beyond = _has_cycle(tg.matrix)
        return GirthReport(0, cap, {}, lens, beyond, exhaustive)
    g = int(found.min())
    total = cnts[lens == g].sum() / g
    counts = {g: int(round(total))}
    if exhaustive:
        counts = count_cycles_exhaustive(tg.matrix, cap)
    return GirthReport(g, cap, counts, lens, False, exhaustive)


def induced_rows_on_cycles(m: BitMatrix, cap: int) -> np.ndarray:
    """Rows lying on at least one cycle of length <= cap."""
    tg = TannerGraph(m)
    lens, _ = tg.edge_girth(cap)
    return np.unique(tg.edge_chk[lens > 0])


@dataclass
class MatrixCycle:
    checks: tuple  # symbol-level cycle as alternating (check, var) sequence start
    symbols: tuple
    length: int
    bit_cycle_present: bool
    crossing_rows: np.ndarray
    cycle_rows: np.ndarray


def symbol_cycles(mother: BitMatrix, max_len: int) -> list[tuple[tuple, tuple]]:
    """Simple cycles of the mother Tanner graph up to ``max_len``.

    Each cycle is returned once as ``(checks, vars)`` in traversal order
    ``c0 v0 c1 v1 ...`` where ``c_k`` joins ``v_{k-1}`` and ``v_k``.
    """
    n = mother.n_cols
    adj: list[list[int]] = [[] for _ in range(n + mother.n_rows)]
    for i in range(mother.n_rows):
        for j in mother.row(i):
            adj[n + i].append(int(j))
            adj[int(j)].append(n + i)
    out = []
    for s in range(n, n + mother.n_rows):
        path = [s]
        on_path = {s}
        stack = [iter(adj[s])]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt == s and len(path) >= 4:
                # keep one orientation: second node smaller than last
                if path[1] < path[-1]:
                    checks = tuple(x - n for x in path[0::2])
                    syms = tuple(path[1::2])
                    out.append((checks, syms))
            elif (nxt < n or nxt > s) and nxt not in on_path and len(path) < max_len:
                path.append(nxt)
                on_path.add(nxt)
                stack.append(iter(adj[nxt]))
    return out


def matrix_cycles(mother: BitMatrix, ext: ExtendedMatrix | EPRMatrix, max_len: int) -> list[MatrixCycle]:
    """Inspect the extended blocks along every short symbol-level cycle.

    ``bit_cycle_present`` is true when the cycle's blocks alone contain a
    bit-level cycle of the same length. ``crossing_rows`` are extended rows
    with entries in those blocks; ``cycle_rows`` the ones on such bit cycles.
    """
    m = ext.matrix
    n = ext.blocks.col_size
    if m.n_cols != mother.n_cols * n:
        raise ValueError("block structure does not match the mother matrix")
    if isinstance(ext, EPRMatrix):
        rc = ext.row_check
    else:
        rc = np.repeat(np.arange(mother.n_rows), n)
    rows_of = {}
    for r in range(m.n_rows):
        rows_of.setdefault(int(rc[r]), []).append(r)
    out = []
    for checks, syms in symbol_cycles(mother, max_len):
        L = len(checks)
        blocks = set()
        for k in range(L):
            blocks.add((checks[k], syms[k - 1]))
            blocks.add((checks[k], syms[k]))
        sub_rows, crossing = [], []
        for c in checks:
            for r in rows_of.get(c, []):
                cols = [int(x) for x in m.row(r) if (c, int(x) // n) in blocks]
                if cols:
                    crossing.append(r)
                    sub_rows.append(cols)
        sub = BitMatrix(len(sub_rows), m.n_cols, sub_rows)
        tg = TannerGraph(sub)
        lens, _ = tg.edge_girth(2 * L)
        hit = lens == 2 * L
        present = bool(hit.any())
        cyc = np.unique(np.asarray(crossing, dtype=np.int64)[tg.edge_chk[hit]]) if present else np.zeros(0, np.int64)
        out.append(MatrixCycle(checks, syms, 2 * L, present, np.asarray(crossing, dtype=np.int64), cyc))
    return out


@dataclass
class CycleProbabilityEstimate:
    q: int
    cycle_length: int
    trials: int
    hits: int
    estimate: float
    standard_error: float
    exact: Fraction | None = None

    def within(self, target: float, n_se: float = 3.0) -> bool:
        return abs(self.estimate - target) <= n_se * max(self.standard_error, 1e-15)


def _perm_tables(labels: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array([omega_perm(lab) - 1 for lab in labels], dtype=np.int64)
    if np.any(perms < 0):
        raise ValueError("labels must be full rank")
    inv = np.empty_like(perms)
    n = perms.shape[1]
    for t, pm in enumerate(perms):
        inv[t, pm] = np.arange(n)
    return perms, inv


def _ring_has_bit_cycle(perms, inv, a_idx, b_idx) -> np.ndarray:
    """Vectorized test over trials of a symbol ring of ``L`` checks.

    Check ``k`` holds label ``b_idx[:, k]`` toward symbol ``k+1`` and label
    ``a_idx[:, k]`` toward symbol ``k``; a bit cycle of the ring's length
    exists iff walking once around maps some row to itself.
    """
    T, L = a_idx.shape
    n = perms.shape[1]
    r0 = np.broadcast_to(np.arange(n), (T, n))
    r = r0
    rows = np.arange(T)[:, None]
    for k in range(L):
        col = perms[b_idx[rows, k], r]
        r = inv[a_idx[rows, (k + 1) % L], col]
    return np.any(r == r0, axis=1)


def _block_has_four_cycle(perms, a):
    """Generic check on the assembled 2x2 block matrix (for cross-validation)."""
    n = perms.shape[1]
    B = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for bi in range(2):
        for bj in range(2):
            B[bi * n + np.arange(n), bj * n + perms[a[bi][bj]]] = 1
    G = B @ B.T
    np.fill_diagonal(G, 0)
    return bool((G >= 2).any())


def _estimate(perms, inv, L, trials, seed, batch=20_000):
    Q = perms.shape[0]
    hits = 0
    done = 0
    b = 0
    while done < trials:
        t = min(batch, trials - done)
        rng = np.random.default_rng([seed, b])
        a_idx = rng.integers(0, Q, size=(t, L))
        b_idx = rng.integers(0, Q, size=(t, L))
        hits += int(_ring_has_bit_cycle(perms, inv, a_idx, b_idx).sum())
        done += t
        b += 1
    return hits


def _exhaustive(perms, inv, L) -> tuple[int, int]:
    Q = perms.shape[0]
    grid = np.array(list(itertools.product(range(Q), repeat=2 * L)), dtype=np.int64)
    hits = int(_ring_has_bit_cycle(perms, inv, grid[:, :L], grid[:, L:]).sum())
    return hits, len(grid)


def _make_estimate(q, g_c, trials, hits, exact=None):
    est = hits / trials
    se = math.sqrt(est * (1 - est) / trials)
    return CycleProbabilityEstimate(q, g_c, trials, hits, est, se, exact)


def field_labels(ctx: GF2m) -> list[np.ndarray]:
    return [ctx.companion_label(u) for u in range(1, ctx.q)]


def estimate_p4(ctx: GF2m, trials: int = 100_000, seed: int = 0, exhaustive: bool = False
                ) -> CycleProbabilityEstimate:
    """Probability that a length-4 symbol cycle with uniform F_q^* labels gives a bit 4-cycle."""
    if ctx.q < 4:
        raise ValueError("need q >= 4")
    return estimate_cycle_prob(ctx, field_labels(ctx), 4, trials, seed, exhaustive=exhaustive)


def estimate_cycle_prob(ctx: GF2m, label_set: Sequence[np.ndarray], g_c: int, trials: int = 100_000,
                        seed: int = 0, exhaustive: bool = False) -> CycleProbabilityEstimate:
    """Probability that a length-``g_c`` symbol cycle gives a bit cycle of that length.

    Labels are drawn independently and uniformly from ``label_set``.
    """
    if len(label_set) == 0:
        raise ValueError("empty label set")
    if g_c < 4 or g_c % 2:
        raise ValueError("g_c must be even and >= 4")
    perms, inv = _perm_tables(label_set)
    L = g_c // 2
    if exhaustive:
        hits, total = _exhaustive(perms, inv, L)
        return _make_estimate(ctx.q, g_c, total, hits, Fraction(hits, total))
    if trials < 1:
        raise ValueError("trials must be positive")
    return _make_estimate(ctx.q, g_c, trials, _estimate(perms, inv, L, trials, seed))


def labels_compatible(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff the two label permutations disagree on every extended row."""
    return bool(np.all(omega_perm(a) != omega_perm(b)))


def largest_compatible_subset(label_set: Sequence[np.ndarray]) -> list[int]:
    """Indices of a maximum set of pairwise compatible labels (max clique)."""
    g = nx.Graph()
    g.add_nodes_from(range(len(label_set)))
    perms = [omega_perm(lab) for lab in label_set]
    for i, j in itertools.combinations(range(len(label_set)), 2):
        if np.all(perms[i] != perms[j]):
            g.add_edge(i, j)
    clique, _ = nx.max_weight_clique(g, weight=None)
    return sorted(clique)


def label_set_p4_bounds(ctx: GF2m, label_set: Sequence[np.ndarray]) -> tuple[Fraction, Fraction, int, int]:
    """``(lower, upper, P, Q)`` bounds on the 4-cycle probability for a label set."""
    Q = len(label_set)
    P = len(largest_compatible_subset(label_set))
    if P == 1:
        return Fraction(1), Fraction(1), P, Q
    lower = Fraction(1, ctx.q - 1)
    upper = Fraction(1 + (Q - P) ** 2, P + (Q - P) ** 2)
    return lower, upper, P, Q


def degree_distributions(m: BitMatrix) -> tuple[dict[int, float], dict[int, float]]:
    """Edge-perspective ``(lambda, rho)`` as maps degree -> fraction of edges.

    The coefficient of ``x**(d-1)`` in the usual polynomial is the value at ``d``.
    """
    cw = m.col_weights()
    rw = m.row_weights()
    if np.any(cw == 0) or np.any(rw == 0):
        raise ValueError("matrix has an empty row or column")
    E = m.nnz
    lam = {int(d): float(d * c / E) for d, c in zip(*np.unique(cw, return_counts=True))}
    rho = {int(d): float(d * c / E) for d, c in zip(*np.unique(rw, return_counts=True))}
    return lam, rho


def degree_distributions_exact(m: BitMatrix) -> tuple[dict[int, Fraction], dict[int, Fraction]]:
    cw = m.col_weights()
    rw = m.row_weights()
    if np.any(cw == 0) or np.any(rw == 0):
        raise ValueError("matrix has an empty row or column")
    E = m.nnz
    lam = {int(d): Fraction(int(d * c), E) for d, c in zip(*np.unique(cw, return_counts=True))}
    rho = {int(d): Fraction(int(d * c), E) for d, c in zip(*np.unique(rw, return_counts=True))}
    return lam, rho


def active_submatrix(m: BitMatrix) -> BitMatrix:
    """Drop all-zero rows and columns (punctured/masked positions)."""
    rows = np.flatnonzero(m.row_weights())
    cols = np.flatnonzero(m.col_weights())
    return m.submatrix(rows, cols)
