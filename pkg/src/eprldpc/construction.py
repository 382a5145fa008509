"""Mother matrices, label optimization and EPR matrix construction."""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Iterator, Sequence

import numpy as np

from .bitmatrix import BitMatrix, BlockStructure, xor_basis_rank
from .gf import GF2m, field
from .graph import TannerGraph
from .representation import (
    BinaryImage,
    EPRMatrix,
    GeneratorSet,
    extended_row_functional,
    image_from_labels,
    NonBinaryMatrix,
    omega_perm,
)

log = logging.getLogger(__name__)


class ConstructionError(RuntimeError):
    pass


class GirthInfeasibleError(ConstructionError):
    """The target girth (or the generator weight floor) cannot be met at this p."""


class ExhaustionError(ConstructionError):
    """No admissible p remains."""


@dataclass(frozen=True)
class ConstructionConfig:
    """Parameters for :func:`optimize_code` and :func:`epr_construct`.

    ``psi=None`` means ``q // 2``, the smallest weight with guaranteed
    resolvability. ``max_ext_cols`` bounds ``N*(q-1)``; ``moore_screen``
    skips field sizes whose extended graph is too small for the girth
    under the mother's average degrees. Labels are optimized against
    cycles shorter than ``label_girth`` (4-cycles by default); longer
    cycles are left to row zeroing.
    """

    p: int = 3
    N: int = 120
    M: int | None = None
    g_s: int = 6
    dv: int = 3
    dc: int = 6
    var_degrees: tuple | None = None
    check_degrees: tuple | None = None
    psi: int | None = None
    phi: int = 1
    T_b: float | None = None
    seed: int = 0
    wide_blocks: bool = False
    fill_all: bool = True
    max_ext_cols: int = 1 << 16
    moore_screen: bool = True
    max_p: int = 16
    short_code_bits: int = 5000
    n_candidates: int = 1
    label_rounds: int | None = None
    label_girth: int = 6

    def __post_init__(self):
        if self.g_s % 2:
            raise ValueError("target girth must be even")
        if self.p < 2:
            raise ValueError("p must be >= 2")

    @property
    def q(self) -> int:
        return 1 << self.p

    def psi_for(self, p: int) -> int:
        return self.psi if self.psi is not None else (1 << p) // 2

    def degree_sequences(self) -> tuple[np.ndarray, np.ndarray]:
        if self.var_degrees is not None:
            vd = np.asarray(self.var_degrees, dtype=np.int64)
        else:
            vd = np.full(self.N, self.dv, dtype=np.int64)
        if self.check_degrees is not None:
            cd = np.asarray(self.check_degrees, dtype=np.int64)
        else:
            E = int(vd.sum())
            M = self.M if self.M is not None else E // self.dc
            if M < 1:
                raise ValueError("degree targets give no checks")
            cd = np.full(M, E // M, dtype=np.int64)
            cd[: E - cd.sum()] += 1
        if vd.sum() != cd.sum():
            raise ValueError(f"degree sums differ: {vd.sum()} vs {cd.sum()}")
        if vd.max() > cd.size or cd.max() > vd.size:
            raise ValueError("degree exceeds the number of nodes on the other side")
        return vd, cd


# ---------------------------------------------------------------- mothers

def peg(var_degrees: Sequence[int], check_degrees: Sequence[int], seed: int = 0) -> BitMatrix:
    """Progressive edge growth with per-check degree targets.

    Each new edge of a variable goes to a check outside (or, failing that,
    deepest in) its current BFS tree, preferring checks below their target
    degree, then lowest current degree, then a seeded random choice.
    """
    rng = np.random.default_rng(seed)
    vd = np.asarray(var_degrees, dtype=np.int64)
    target = np.asarray(check_degrees, dtype=np.int64)
    N, M = vd.size, target.size
    if vd.sum() != target.sum():
        raise ValueError("degree sums differ")
    if vd.max(initial=0) > M:
        raise ValueError("variable degree exceeds number of checks")
    chk_adj: list[list[int]] = [[] for _ in range(M)]
    var_adj: list[list[int]] = [[] for _ in range(N)]
    deg = np.zeros(M, dtype=np.int64)
    for j in np.argsort(vd, kind="stable"):
        for k in range(int(vd[j])):
            if k == 0:
                cand = np.arange(M)
            else:
                reached = set(var_adj[j])
                frontier = list(reached)
                seen_v = {int(j)}
                last = frontier
                while True:
                    nv = {v for c in frontier for v in chk_adj[c] if v not in seen_v}
                    seen_v |= nv
                    nc = {c for v in nv for c in var_adj[v] if c not in reached}
                    if not nc:
                        cand = np.array([c for c in range(M) if c not in reached], dtype=np.int64)
                        break
                    if len(reached) + len(nc) == M:
                        cand = np.array(sorted(nc), dtype=np.int64)
                        break
                    reached |= nc
                    frontier = list(nc)
                    last = frontier
                if cand.size == 0:
                    cand = np.array(sorted(last), dtype=np.int64)
            cand = np.array([c for c in cand if j not in chk_adj[c]], dtype=np.int64)
            if cand.size == 0:
                cand = np.array([c for c in range(M) if j not in chk_adj[c]], dtype=np.int64)
            room = cand[deg[cand] < target[cand]]
            if room.size:
                cand = room
            best = cand[deg[cand] == deg[cand].min()]
            c = int(best[rng.integers(best.size)]) if best.size > 1 else int(best[0])
            chk_adj[c].append(int(j))
            var_adj[j].append(c)
            deg[c] += 1
    return BitMatrix(M, N, chk_adj)


def peg_mother(cfg: ConstructionConfig) -> BitMatrix:
    vd, cd = cfg.degree_sequences()
    return peg(vd, cd, cfg.seed)


def random_mother(var_degrees: Sequence[int], check_degrees: Sequence[int], seed: int = 0,
                  max_tries: int = 100) -> BitMatrix:
    """Configuration-model mother without parallel edges (for long codes)."""
    rng = np.random.default_rng(seed)
    vd = np.asarray(var_degrees, dtype=np.int64)
    cd = np.asarray(check_degrees, dtype=np.int64)
    if vd.sum() != cd.sum():
        raise ValueError("degree sums differ")
    v_sock = np.repeat(np.arange(vd.size), vd)
    c_sock = np.repeat(np.arange(cd.size), cd)
    perm = rng.permutation(c_sock.size)
    c_sock = c_sock[perm]
    for _ in range(max_tries):
        key = c_sock * vd.size + v_sock
        order = np.argsort(key, kind="stable")
        dup = np.zeros(key.size, dtype=bool)
        dup[order[1:]] = key[order[1:]] == key[order[:-1]]
        bad = np.flatnonzero(dup)
        if bad.size == 0:
            break
        for b in bad:
            o = rng.integers(c_sock.size)
            c_sock[b], c_sock[o] = c_sock[o], c_sock[b]
    else:
        raise ConstructionError("could not remove parallel edges")
    rows: list[list[int]] = [[] for _ in range(cd.size)]
    for c, v in zip(c_sock, v_sock):
        rows[int(c)].append(int(v))
    return BitMatrix(cd.size, vd.size, rows)


# ---------------------------------------------------------------- Omega graphs

def _omega_from_perms(mother: BitMatrix, perms: np.ndarray) -> BitMatrix:
    """Omega from one 0-based permutation per mother edge (CSR edge order)."""
    n = perms.shape[1]
    M = mother.n_rows
    rw = mother.row_weights()
    indptr = np.zeros(M * n + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(np.repeat(rw, n))
    parts = []
    for i in range(M):
        s, e = mother.indptr[i], mother.indptr[i + 1]
        cols = mother.indices[s:e][:, None] * n + perms[s:e]  # (deg, n)
        parts.append(cols.T.ravel())
    idx = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
    return BitMatrix.from_csr(M * n, mother.n_cols * n, indptr, idx, check=False)


def _labels_from_values(mother: BitMatrix, ctx: GF2m, values: np.ndarray) -> dict:
    out = {}
    cache = {}
    for i in range(mother.n_rows):
        for k in range(mother.indptr[i], mother.indptr[i + 1]):
            u = int(values[k])
            if u not in cache:
                cache[u] = ctx.companion_label(u)
            out[(i, int(mother.indices[k]))] = cache[u]
    return out


def image_from_values(mother: BitMatrix, ctx: GF2m, values: np.ndarray) -> BinaryImage:
    """Binary image of the non-binary matrix with ``values`` on the mother's edges."""
    vals = {}
    for i in range(mother.n_rows):
        for k in range(mother.indptr[i], mother.indptr[i + 1]):
            vals[(i, int(mother.indices[k]))] = int(values[k])
    h = NonBinaryMatrix.from_mother(mother, ctx, vals)
    return image_from_labels(mother, _labels_from_values(mother, ctx, values), ctx.p, h)


def _short_edges_in_block(mother, perms, k, cap):
    n = perms.shape[1]
    om = _omega_from_perms(mother, perms)
    tg = TannerGraph(om)
    i = int(np.searchsorted(mother.indptr, k, side="right") - 1)
    j = int(mother.indices[k])
    rows = i * n + np.arange(n)
    cols = j * n + perms[k]
    lens, cnts = tg.edge_girth(cap, np.stack([rows, cols], axis=1))
    short = lens > 0
    return int(short.sum()), float(cnts[short].sum())


def optimize_labels(mother: BitMatrix, ctx: GF2m, seed: int = 0, target_girth: int = 6,
                    rounds: int | None = None) -> BinaryImage:
    """Assign F_q^* labels, re-drawing them greedily to break short bit cycles.

    Every pair of distinct field labels is collision-free, so the whole
    field is the compatible set. A position is re-labelled when that
    lowers the number of its block's edges on cycles shorter than
    ``target_girth``.
    """
    rng = np.random.default_rng([seed, ctx.p])
    n = ctx.q - 1
    values = rng.integers(1, ctx.q, size=mother.nnz)
    perm_tab = np.array([omega_perm(ctx.companion_label(u)) - 1 for u in range(1, ctx.q)])
    cap = target_girth - 2
    if cap >= 4 and mother.nnz:
        perms = perm_tab[values - 1]
        rounds = rounds if rounds is not None else 2 * mother.nnz
        tried: set[int] = set()
        for _ in range(rounds):
            tg = TannerGraph(_omega_from_perms(mother, perms))
            lens, _ = tg.edge_girth(cap)
            if not np.any(lens):
                break
            # short edges per mother edge: Omega edge order is row-major in
            # (check, local row, mother edge)
            short_rows = tg.edge_chk[lens > 0]
            short_cols = tg.chk_var[lens > 0]
            keys = _mother_edge_of(mother, short_rows // n, short_cols // n)
            counts = np.bincount(keys, minlength=mother.nnz)
            order = [int(k) for k in np.argsort(-counts, kind="stable") if counts[k] > 0 and k not in tried]
            if not order:
                break
            k = order[0]
            tried.add(k)
            best = _short_edges_in_block(mother, perms, k, cap)
            best_u = int(values[k])
            cand = np.arange(1, ctx.q)
            if cand.size > 64:
                cand = rng.choice(cand, size=64, replace=False)
            for u in cand:
                if u == best_u:
                    continue
                trial = perms.copy()
                trial[k] = perm_tab[u - 1]
                score = _short_edges_in_block(mother, trial, k, cap)
                if score < best:
                    best, best_u = score, int(u)
                    if score[0] == 0:
                        break
            if best_u != values[k]:
                values[k] = best_u
                perms[k] = perm_tab[best_u - 1]
                tried.clear()
                tried.add(k)
    return image_from_values(mother, ctx, values)


def _mother_edge_of(mother: BitMatrix, checks, syms) -> np.ndarray:
    """CSR edge index of mother positions ``(checks[t], syms[t])``."""
    checks = np.asarray(checks, dtype=np.int64)
    syms = np.asarray(syms, dtype=np.int64)
    out = np.empty(checks.size, dtype=np.int64)
    for t, (c, s) in enumerate(zip(checks, syms)):
        row = mother.indices[mother.indptr[c]:mother.indptr[c + 1]]
        out[t] = mother.indptr[c] + int(np.searchsorted(row, s))
    return out


# ---------------------------------------------------------------- block set

@dataclass(frozen=True)
class BlockSet:
    """Simplex parity rows of one symbol and the cycle-free 2-row blocks they form.

    ``rows`` are 1-based index sets whose XOR is zero. Blocks are generated
    lazily since their number grows as ``q**4``.
    """

    p: int
    rows: tuple
    wide: bool = False

    def identities(self, row) -> str:
        return " + ".join(f"v({a})" for a in sorted(row)) + " = 0"

    def __iter__(self) -> Iterator[tuple[frozenset, frozenset]]:
        for a, b in itertools.combinations(self.rows, 2):
            if len(a & b) <= 1:
                yield (a, b)

    def __len__(self) -> int:
        return sum(1 for _ in self)

    def is_valid_row(self, row) -> bool:
        acc = 0
        for x in row:
            acc ^= x
        return acc == 0 and all(1 <= x < (1 << self.p) for x in row)


def build_block_set(ctx: GF2m | int, wide: bool = False, with_quads: bool = False) -> BlockSet:
    """Triangles ``{a, b, a^b}`` (optionally XOR-zero 4-sets) over ``1..q-1``."""
    p = ctx if isinstance(ctx, int) else ctx.p
    if p < 2:
        raise ValueError("p must be >= 2")
    q = 1 << p
    tri = set()
    for a in range(1, q):
        for b in range(a + 1, q):
            c = a ^ b
            if c > b:
                tri.add(frozenset((a, b, c)))
    rows = sorted(tri, key=lambda r: sorted(r))
    if with_quads:
        quads = set()
        for a, b, c in itertools.combinations(range(1, q), 3):
            d = a ^ b ^ c
            if d > c:
                quads.add(frozenset((a, b, c, d)))
        rows += sorted(quads, key=lambda r: sorted(r))
    return BlockSet(p, tuple(rows), wide)


def block_is_cycle_free(block) -> bool:
    a, b = (set(r) for r in block)
    return len(a & b) <= 1


# ---------------------------------------------------------------- EPR construction

@dataclass
class ConstructionReport:
    p: int = 0
    girth: int = 0
    m_s: int = 0
    n_rows: int = 0
    zeroed_rows: int = 0
    row_additions: int = 0
    replacement_blocks: int = 0
    repair_swaps: int = 0
    attempts: list = dc_field(default_factory=list)
    log: list = dc_field(default_factory=list)
    t_b: float | None = None

    def text(self) -> str:
        head = [f"p: {self.p}", f"q: {1 << self.p}", f"girth: {self.girth if self.girth else '0 (cycle-free)'}",
                f"M_s: {self.m_s}", f"rows: {self.n_rows}", f"zeroed rows: {self.zeroed_rows}",
                f"row additions: {self.row_additions}", f"replacement blocks: {self.replacement_blocks}",
                f"repair swaps: {self.repair_swaps}"]
        if self.t_b is not None:
            head.append(f"T_b: {self.t_b:.4f}")
        return "\n".join(head + ["log:"] + [f"  {line}" for line in self.log]) + "\n"


class _Builder:
    """Mutable working state of an EPR construction."""

    def __init__(self, img: BinaryImage):
        self.img = img
        self.p = img.p
        self.n = img.q - 1
        self.n_cols = img.N * self.n
        om = _omega_from_perms(
            img.mother,
            np.array([omega_perm(img.labels[(i, int(j))]) - 1
                      for i in range(img.M) for j in img.mother.row(i)]).reshape(-1, self.n)
            if img.mother.nnz else np.zeros((0, self.n), dtype=np.int64))
        self.rows: list[np.ndarray] = [om.row(r).copy() for r in range(om.n_rows)]
        self.kind = ["omega_row"] * om.n_rows
        self.check = [int(x) for x in np.repeat(np.arange(img.M), self.n)]
        self.local = [int(x) for x in np.tile(np.arange(1, self.n + 1), img.M)]
        self.alive = [True] * om.n_rows
        self.hbar = img.matrix.packed_rows()
        self.rank_h = xor_basis_rank(self.hbar)
        self.log: list[str] = []

    # graph helpers
    def matrix(self) -> BitMatrix:
        empty = np.zeros(0, dtype=np.int64)
        return BitMatrix.from_sorted_rows(self.n_cols, [r if self.alive[t] else empty
                                                         for t, r in enumerate(self.rows)])

    def short_edges(self, cap: int, edges=None) -> tuple[np.ndarray, np.ndarray]:
        """(edges, counts) of edges on cycles of length <= cap."""
        tg = TannerGraph(self.matrix())
        if edges is None:
            e = np.stack([tg.edge_chk, tg.chk_var], axis=1)
        else:
            e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
            keep = np.array([self.alive[int(r)] for r in e[:, 0]], dtype=bool) if len(e) else np.zeros(0, bool)
            e = e[keep]
        if len(e) == 0:
            return e, np.zeros(0)
        lens, cnts = tg.edge_girth(cap, e)
        hit = lens > 0
        return e[hit], cnts[hit]

    def functionals(self, skip=()) -> list[int]:
        return [extended_row_functional(r, self.p) for t, r in enumerate(self.rows)
                if self.alive[t] and t not in skip and self.kind[t] != "replacement_block"]

    def complete_without(self, skip) -> bool:
        f = self.functionals(skip)
        return xor_basis_rank(f) == self.rank_h

    def check_rows(self, i: int, skip=()) -> list[int]:
        return [t for t in range(len(self.rows)) if self.kind[t] == "omega_row" and self.alive[t]
                and self.check[t] == i and t not in skip]

    def zeroable(self, t: int, phi: int, pending=()) -> bool:
        if not self.alive[t] or self.kind[t] == "replacement_block":
            return False
        skip = set(pending) | {t}
        if self.kind[t] == "omega_row":
            rest = self.check_rows(self.check[t], skip)
            if len(rest) < phi:
                return False
            if xor_basis_rank([self.local[r] for r in rest]) == self.p:
                return True
            if "row_addition" not in self.kind:
                # only this check's rows can carry its constraints
                return False
        return self.complete_without(skip)

    # Step 2: row additions on weight-3 rows in 4-cycles
    def row_addition(self) -> int:
        done = 0
        for t in range(len(self.rows)):
            if not self.alive[t] or len(self.rows[t]) != 3:
                continue
            e, _ = self.short_edges(4, [(t, int(c)) for c in self.rows[t]])
            if len(e) == 0:
                continue
            mine = set(int(c) for c in self.rows[t])
            partners = []
            for u in range(len(self.rows)):
                if u == t or not self.alive[u]:
                    continue
                shared = mine.intersection(int(c) for c in self.rows[u])
                if len(shared) >= 2 and len(self.rows[u]) >= 3:
                    new = np.setxor1d(self.rows[u], self.rows[t])
                    if len(new) != 1 and len(new) > 0:
                        partners.append((len(new), u, new))
            if not partners:
                continue
            partners.sort(key=lambda x: (x[0], x[1]))
            w, u, new = partners[0]
            self.rows[u] = np.asarray(new, dtype=np.int64)
            self.kind[u] = "row_addition"
            self.check[u] = -1
            self.local[u] = 0
            self.log.append(f"row addition: row {t} added to row {u} (new weight {w})")
            done += 1
        return done

    # Step 3: zero rows on short cycles
    def zero_short_cycles(self, g_s: int, phi: int) -> int:
        cap = g_s - 2
        if cap < 4:
            return 0
        zeroed = 0
        edges, cnts = self.short_edges(cap)
        while len(edges):
            score: dict[int, float] = {}
            for (r, _), c in zip(edges, cnts):
                score[int(r)] = score.get(int(r), 0.0) + 1.0
            order = sorted(score, key=lambda r: (-score[r], r))
            batch_max = max(1, len(order) // 16)
            batch: list[int] = []
            for r in order:
                if self.zeroable(r, phi, batch):
                    batch.append(r)
                    if len(batch) >= batch_max:
                        break
            if not batch:
                raise GirthInfeasibleError(
                    f"{len(order)} rows remain on cycles shorter than {g_s} and none can be removed")
            for r in batch:
                self.alive[r] = False
            zeroed += len(batch)
            edges, cnts = self.short_edges(cap, edges)
        self.log.append(f"zeroed {zeroed} rows crossing cycles shorter than {g_s}")
        return zeroed

    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_cols, dtype=bool)
        for t, r in enumerate(self.rows):
            if self.alive[t]:
                mask[r] = True
        return mask

    # incremental cycle test for candidate rows
    def _adjacency(self):
        var_adj: dict[int, list[int]] = {}
        for t, r in enumerate(self.rows):
            if self.alive[t]:
                for c in r:
                    var_adj.setdefault(int(c), []).append(t)
        return var_adj

    def creates_short_cycle(self, var_adj, new_rows: list[list[int]], g_s: int) -> bool:
        cap = g_s - 2
        if cap < 4:
            return False
        base = len(self.rows)
        row_cols = {base + k: [int(c) for c in r] for k, r in enumerate(new_rows)}
        for rid, cols in row_cols.items():
            for c in cols:
                var_adj.setdefault(c, []).append(rid)

        def nbrs_of_row(rid):
            return row_cols[rid] if rid >= base else self.rows[rid]

        try:
            for rid, cols in row_cols.items():
                for c in cols:
                    if _bfs_cycle(var_adj, nbrs_of_row, rid, c, cap):
                        return True
            return False
        finally:
            for rid, cols in row_cols.items():
                for c in cols:
                    var_adj[c].pop()
                    if not var_adj[c]:
                        del var_adj[c]

    def add_row(self, cols, var_adj=None):
        t = len(self.rows)
        self.rows.append(np.asarray(sorted(cols), dtype=np.int64))
        self.kind.append("replacement_block")
        self.check.append(-1)
        self.local.append(0)
        self.alive.append(True)
        if var_adj is not None:
            for c in cols:
                var_adj.setdefault(int(c), []).append(t)


def _bfs_cycle(var_adj, nbrs_of_row, rid, col, cap) -> bool:
    """Is there a path col -> rid of length <= cap-1 avoiding the edge itself?"""
    # nodes: ('v', c) or ('r', t)
    start = ("v", col)
    target = ("r", rid)
    dist = {start: 0}
    dq = deque([start])
    while dq:
        node = dq.popleft()
        d = dist[node]
        if d >= cap - 1:
            break
        if node[0] == "v":
            nxt = (("r", t) for t in var_adj.get(node[1], ()))
        else:
            nxt = (("v", int(c)) for c in nbrs_of_row(node[1]))
        for y in nxt:
            if (node == start and y == target) or (node == target and y == start):
                continue
            if y == target:
                return True
            if y not in dist:
                dist[y] = d + 1
                dq.append(y)
    return False


def _place_blocks(b: _Builder, blocks: BlockSet, g_s: int, psi: int, slots: int, fill_all: bool) -> int:
    n = b.n
    mask = b.active_mask().reshape(-1, n)
    weights = mask.sum(axis=1)
    order = sorted(range(b.img.N), key=lambda j: (int(weights[j]) - psi, j))
    if not fill_all:
        order = [j for j in order if weights[j] < psi]
    var_adj = b._adjacency()
    rows = list(blocks.rows)
    placed = 0
    pending_wide = None
    for j in order:
        if slots < 2:
            break
        act = mask[j]
        # rank candidate rows by how many inactive columns they switch on
        gain = [sum(1 for x in r if not act[x - 1]) for r in rows]
        ranked = sorted(range(len(rows)), key=lambda k: (-gain[k], sorted(rows[k])))[:24]
        pairs = []
        for a, c in itertools.combinations(ranked, 2):
            ra, rc = rows[a], rows[c]
            if len(ra & rc) <= 1:
                cover = len({x for x in ra | rc if not act[x - 1]})
                pairs.append((-cover, sorted(ra), sorted(rc), ra, rc))
        pairs.sort(key=lambda x: x[:3])
        for _, _, _, ra, rc in pairs[:40]:
            new = [[j * n + x - 1 for x in sorted(ra)], [j * n + x - 1 for x in sorted(rc)]]
            if blocks.wide:
                if pending_wide is None:
                    # hold the first half until a partner symbol is found
                    if not b.creates_short_cycle(var_adj, new, g_s):
                        pending_wide = (j, new)
                        break
                    continue
                new = [sorted(pending_wide[1][0] + new[0]), sorted(pending_wide[1][1] + new[1])]
            if b.creates_short_cycle(var_adj, new, g_s):
                continue
            for r in new:
                b.add_row(r, var_adj)
            for r in new:
                mask.reshape(-1)[r] = True
            slots -= 2
            placed += 1
            pending_wide = None
            break
    return placed


def epr_construct(img: BinaryImage, cfg: ConstructionConfig, blocks: BlockSet | None = None,
                  row_addition: bool = True) -> tuple[EPRMatrix, GeneratorSet, ConstructionReport]:
    """Build ``Omega^e`` with girth >= ``cfg.g_s`` from a binary image.

    Raises
    ------
    GirthInfeasibleError
        When short cycles cannot be removed without losing a parity check,
        or a symbol cannot reach the weight floor ``psi``.
    """
    p = img.p
    blocks = blocks if blocks is not None else build_block_set(p, wide=cfg.wide_blocks)
    psi = min(cfg.psi_for(p), img.q - 1)
    b = _Builder(img)
    rep = ConstructionReport(p=p)
    if row_addition:
        rep.row_additions = b.row_addition()
    rep.zeroed_rows = b.zero_short_cycles(cfg.g_s, cfg.phi)
    slots = rep.zeroed_rows
    rep.replacement_blocks = _place_blocks(b, blocks, cfg.g_s, psi, slots, cfg.fill_all)
    b.log.append(f"placed {rep.replacement_blocks} replacement blocks in {slots} free rows")
    return _finish(b, cfg, psi, rep)


def _finish(b: _Builder, cfg: ConstructionConfig, psi: int, rep: ConstructionReport):
    img = b.img
    n = b.n
    mask = b.active_mask()
    w = mask.reshape(-1, n).sum(axis=1)
    if np.any(w < psi):
        bad = int(np.argmin(w))
        raise GirthInfeasibleError(f"symbol {bad} has {int(w[bad])} active columns < psi={psi}")
    # drop unfilled zero rows: surviving rows first, then replacements
    keep = [t for t in range(len(b.rows)) if b.alive[t] and b.kind[t] != "replacement_block"]
    keep += [t for t in range(len(b.rows)) if b.alive[t] and b.kind[t] == "replacement_block"]
    m = BitMatrix.from_sorted_rows(b.n_cols, [b.rows[t] for t in keep])
    cap = cfg.g_s - 2
    g = 0
    tg = TannerGraph(m)
    if cap >= 4:
        lens, _ = tg.edge_girth(cap)
        if np.any(lens):
            raise GirthInfeasibleError(f"girth {int(lens[lens > 0].min())} < {cfg.g_s} after placement")
    lens, _ = tg.edge_girth(max(cfg.g_s + 6, 12))
    g = int(lens[lens > 0].min()) if np.any(lens) else 0
    f = [extended_row_functional(m.row(r), b.p) for r in range(m.n_rows)]
    if xor_basis_rank(f) != b.rank_h or xor_basis_rank(f + b.hbar) != b.rank_h:
        raise ConstructionError("constructed rows do not span the binary image's checks")
    omega_e = EPRMatrix(m, BlockStructure(1, img.N, m.n_rows, n), mask,
                        tuple(b.kind[t] for t in keep),
                        np.array([b.check[t] for t in keep], dtype=np.int64),
                        np.array([b.local[t] for t in keep], dtype=np.int64), b.p)
    selectors = {}
    for i in range(img.M):
        kept = frozenset(int(b.local[t]) for t in b.check_rows(i))
        for j in img.mother.row(i):
            selectors[(i, int(j))] = kept
    gens = GeneratorSet(b.p, mask.reshape(-1, n), selectors)
    rep.girth = g
    rep.m_s = int(mask.sum())
    rep.n_rows = m.n_rows
    rep.log.extend(b.log)
    return omega_e, gens, rep


def _row_cycles(m: BitMatrix, r: int, cap: int) -> tuple[int, float]:
    """Shortest cycle length through row ``r`` (0 if none <= cap) and their number."""
    cols = m.row(r)
    if cols.size == 0:
        return 0, 0.0
    tg = TannerGraph(m)
    lens, cnts = tg.edge_girth(cap, np.stack([np.full(cols.size, r), cols], axis=1))
    if not np.any(lens):
        return 0, 0.0
    g = int(lens[lens > 0].min())
    # every cycle through the row uses exactly two of its edges
    return g, float(cnts[lens == g].sum()) / 2.0


def repair_pass(img: BinaryImage, omega_e: EPRMatrix, gens: GeneratorSet, cfg: ConstructionConfig,
                rep: ConstructionReport, max_rows: int = 64):
    """Swap kept rows on shortest cycles for zeroed rows of the same check.

    A swap is kept when the replacement row lies on fewer shortest cycles
    than the row it replaces, creates no shorter cycle, and keeps the
    check's rank and the weight floor. Returns the (possibly unchanged)
    matrix and generator set.
    """
    n = img.q - 1
    psi = min(cfg.psi_for(img.p), n)
    m = omega_e.matrix
    cap = max(cfg.g_s + 4, 8)
    tg = TannerGraph(m)
    lens, cnts = tg.edge_girth(cap)
    if not np.any(lens):
        rep.log.append("repair pass: no cycles within cap, nothing to do")
        return omega_e, gens
    g0 = int(lens[lens > 0].min())
    per_row = np.bincount(tg.edge_chk[lens == g0], weights=cnts[lens == g0], minlength=m.n_rows) / 2.0
    before = float(per_row.sum()) / (g0 // 2)
    rows = [m.row(r).copy() for r in range(m.n_rows)]
    kind = list(omega_e.provenance)
    chk = [int(x) for x in omega_e.row_check]
    loc = [int(x) for x in omega_e.row_local]
    perms = {key: omega_perm(lab) - 1 for key, lab in img.labels.items()}
    colw = m.col_weights().copy()

    def omega_row(i, ip):
        return np.array(sorted(int(j) * n + int(perms[(i, int(j))][ip - 1]) for j in img.mother.row(i)),
                        dtype=np.int64)

    swaps = 0
    order = [int(r) for r in np.argsort(-per_row, kind="stable") if per_row[r] > 0][:max_rows]
    for r in order:
        if kind[r] != "omega_row":
            continue
        cur = BitMatrix.from_sorted_rows(m.n_cols, rows)
        g_r, c_r = _row_cycles(cur, r, g0)
        if g_r != g0:
            continue
        i = chk[r]
        kept = {loc[t] for t in range(len(rows)) if chk[t] == i and kind[t] == "omega_row"}
        for ip in range(1, n + 1):
            if ip in kept or xor_basis_rank(list((kept - {loc[r]}) | {ip})) < img.p:
                continue
            cand = omega_row(i, ip)
            w = colw.copy()
            w[rows[r]] -= 1
            w[cand] += 1
            if np.any((w.reshape(-1, n) > 0).sum(axis=1) < psi):
                continue
            trial = rows.copy()
            trial[r] = cand
            g_new, c_new = _row_cycles(BitMatrix.from_sorted_rows(m.n_cols, trial), r, g0)
            if g_new and g_new < g0:
                continue
            if g_new == 0 or c_new < c_r:
                rows, colw, loc[r] = trial, w, ip
                swaps += 1
                break
    nm = BitMatrix.from_sorted_rows(m.n_cols, rows)
    after_lens, after_cnts = TannerGraph(nm).edge_girth(g0)
    after = float(after_cnts[after_lens == g0].sum()) / g0 if np.any(after_lens == g0) else 0.0
    rep.repair_swaps = swaps
    rep.log.append(f"repair pass: {swaps} swaps, girth-{g0} cycles {before:.0f} -> {after:.0f}")
    if not swaps:
        return omega_e, gens
    mask = nm.col_weights() > 0
    new_e = EPRMatrix(nm, omega_e.blocks, mask, tuple(kind), np.asarray(chk), np.asarray(loc), img.p)
    selectors = {}
    for i in range(img.M):
        kept = frozenset(int(loc[t]) for t in range(len(rows)) if chk[t] == i and kind[t] == "omega_row")
        for j in img.mother.row(i):
            selectors[(i, int(j))] = kept
    new_g = GeneratorSet(img.p, mask.reshape(-1, n), selectors)
    lens, _ = TannerGraph(nm).edge_girth(max(cfg.g_s + 6, 12))
    rep.girth = int(lens[lens > 0].min()) if np.any(lens) else 0
    rep.m_s = int(mask.sum())
    return new_e, new_g


# ---------------------------------------------------------------- optimization loop

def moore_bound_vars(dv: float, dc: float, g: int) -> float:
    """Lower bound on variable nodes of a bipartite graph with girth >= g.

    Counts the distinct variables in the depth ``g/2 - 1`` tree below a
    check node, using the given (average) degrees.
    """
    r = g // 2
    a, b = max(dv - 1, 0), max(dc - 1, 0)
    from_check = dc * sum((a * b) ** t for t in range(max((r - 2) // 2 + 1, 0)))
    from_var = 1 + dv * b * sum((a * b) ** t for t in range(max((r - 1) // 2, 0)))
    return max(from_check, from_var)


def optimize_code(cfg: ConstructionConfig, mother: BitMatrix | None = None,
                  threshold_fn: Callable | None = None):
    """Search ``p = cfg.p, cfg.p + 1, ...`` until an EPR matrix reaches ``cfg.g_s``.

    Returns ``(omega_e, gens, img, report)``.
    """
    if mother is None:
        mother = peg_mother(cfg)
    dv = mother.nnz / mother.n_cols
    dc = mother.nnz / mother.n_rows
    need = moore_bound_vars(dv, dc, cfg.g_s)
    attempts = []
    p = cfg.p
    while p <= min(cfg.max_p, 16):
        q = 1 << p
        cols = mother.n_cols * (q - 1)
        if cols > cfg.max_ext_cols:
            attempts.append(f"p={p}: {cols} extended columns exceed the budget {cfg.max_ext_cols}")
            break
        if cfg.moore_screen and cols < need:
            attempts.append(f"p={p}: {cols} extended columns < Moore bound {need:.0f} for girth {cfg.g_s}")
            p += 1
            continue
        ctx = field(p)
        best = None
        for cand in range(cfg.n_candidates):
            seed = cfg.seed + cand
            img = optimize_labels(mother, ctx, seed, cfg.label_girth, cfg.label_rounds)
            try:
                omega_e, gens, rep = epr_construct(img, replace(cfg, p=p, seed=seed), build_block_set(ctx, cfg.wide_blocks))
            except GirthInfeasibleError as exc:
                attempts.append(f"p={p} seed={seed}: {exc}")
                continue
            omega_e, gens = repair_pass(img, omega_e, gens, cfg, rep)
            short = mother.n_cols * p < cfg.short_code_bits
            if cfg.T_b is not None and threshold_fn is not None and not short:
                rep.t_b = float(threshold_fn(omega_e, gens, img))
                if rep.t_b > cfg.T_b:
                    attempts.append(f"p={p} seed={seed}: T_b {rep.t_b:.3f} > {cfg.T_b}")
                    continue
            key = (-(rep.girth or 10 ** 6), rep.t_b if rep.t_b is not None else 0.0, cand)
            if best is None or key < best[0]:
                best = (key, omega_e, gens, img, rep)
        if best is not None:
            _, omega_e, gens, img, rep = best
            attempts.append(f"p={p}: success, girth {rep.girth or 'cycle-free'}, M_s={rep.m_s}")
            rep.attempts = attempts
            rep.log = attempts + rep.log
            return omega_e, gens, img, rep
        p += 1
    raise ExhaustionError("no admissible field size: " + "; ".join(attempts[-3:]))
