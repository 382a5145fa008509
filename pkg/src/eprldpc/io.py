"""Text code files ("qalist v1").

Layout::

    qalist v1
    p <p>
    prim_poly <hex mask>
    M <checks>
    N <symbols>
    g_s <target girth>
    mode <base|extended>
    [H]
    <row>: <col>:<exp> ...           exp = discrete log of the entry
    [GENERATORS]
    <symbol>: <hex active mask>     bit j'-1 set iff column j' is active
    [SELECTORS]
    <check> <symbol>: <row> ...
    [OMEGA_E]
    <row> <provenance> <check> <local>: <col> ...
    [END]

Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .bitmatrix import BitMatrix, BlockStructure
from .channel import CodeSpec
from .gf import GF2m
from .representation import PROVENANCE, EPRMatrix, GeneratorSet, NonBinaryMatrix, binary_image

MAGIC = "qalist v1"
SECTIONS = ("[H]", "[GENERATORS]", "[SELECTORS]", "[OMEGA_E]", "[END]")
HEADER_KEYS = ("p", "prim_poly", "M", "N", "g_s", "mode")


class ParseError(ValueError):
    """Malformed code file; carries the 1-based line number and section."""

    def __init__(self, msg: str, line: int, section: str):
        super().__init__(f"line {line} ({section}): {msg}")
        self.line = line
        self.section = section


def dumps(spec: CodeSpec) -> str:
    ctx = spec.h.field
    out = [MAGIC, f"p {ctx.p}", f"prim_poly {ctx.prim_poly:#x}", f"M {spec.h.M}", f"N {spec.h.N}",
           f"g_s {int(spec.meta.get('g_s', 0))}", f"mode {spec.meta.get('mode', 'base')}", "[H]"]
    log = ctx.log
    for i in range(spec.h.M):
        out.append(f"{i}: " + " ".join(f"{j}:{int(log[v])}" for j, v in spec.h.row_entries(i)))
    out.append("[GENERATORS]")
    for j in range(spec.gens.N):
        mask = sum(1 << k for k in np.flatnonzero(spec.gens.masks[j]))
        out.append(f"{j}: {mask:x}")
    out.append("[SELECTORS]")
    for (i, j) in sorted(spec.gens.selectors):
        rows = " ".join(str(r) for r in sorted(spec.gens.selectors[(i, j)]))
        out.append(f"{i} {j}: {rows}")
    out.append("[OMEGA_E]")
    e = spec.omega_e
    for r in range(e.matrix.n_rows):
        cols = " ".join(str(int(c)) for c in e.matrix.row(r))
        out.append(f"{r} {e.provenance[r]} {int(e.row_check[r])} {int(e.row_local[r])}: {cols}")
    out.append("[END]")
    return "\n".join(out) + "\n"


def write_code(spec: CodeSpec, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps(spec))


def _ints(tokens, ln, sec):
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise ParseError(f"expected integers, got {' '.join(tokens)!r}", ln, sec) from exc


def _split(line, ln, sec):
    head, sep, tail = line.partition(":")
    if not sep:
        raise ParseError("missing ':'", ln, sec)
    return head.split(), tail.split()


def loads(text: str) -> CodeSpec:
    lines = text.splitlines()
    items = [(k + 1, s.strip()) for k, s in enumerate(lines)]
    items = [(ln, s) for ln, s in items if s and not s.startswith("#")]
    if not items or items[0][1] != MAGIC:
        raise ParseError(f"first line must be {MAGIC!r}", items[0][0] if items else 1, "header")
    header: dict[str, str] = {}
    pos = 1
    while pos < len(items) and not items[pos][1].startswith("["):
        ln, s = items[pos]
        parts = s.split()
        if len(parts) != 2 or parts[0] not in HEADER_KEYS:
            raise ParseError(f"bad header entry {s!r}", ln, "header")
        header[parts[0]] = parts[1]
        pos += 1
    last = items[-1][0] if items else 1
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise ParseError(f"missing header keys {missing}", items[min(pos, len(items) - 1)][0], "header")
    try:
        p, M, N, g_s = (int(header[k]) for k in ("p", "M", "N", "g_s"))
        prim = int(header["prim_poly"], 16)
    except ValueError as exc:
        raise ParseError(str(exc), items[1][0], "header") from exc
    ctx = GF2m(p, prim)
    n = ctx.q - 1

    body: dict[str, list[tuple[int, str]]] = {}
    order = []
    sec = None
    for ln, s in items[pos:]:
        if s.startswith("["):
            if s not in SECTIONS:
                raise ParseError(f"unknown section {s}", ln, sec or "header")
            sec = s
            order.append(s)
            body[s] = []
            if s == "[END]":
                break
        else:
            body[sec].append((ln, s))
    for s in SECTIONS:
        if s not in body:
            raise ParseError(f"section {s} missing (truncated file?)", last, order[-1] if order else "header")
    if order != list(SECTIONS):
        raise ParseError(f"sections out of order: {order}", last, "structure")

    entries = np.zeros((M, N), dtype=np.int64)
    seen = set()
    for ln, s in body["[H]"]:
        head, tail = _split(s, ln, "[H]")
        (i,) = _ints(head, ln, "[H]")
        if not 0 <= i < M or i in seen:
            raise ParseError(f"row index {i} invalid or repeated", ln, "[H]")
        seen.add(i)
        for tok in tail:
            j, _, e = tok.partition(":")
            j, e = _ints([j, e], ln, "[H]")
            if not 0 <= j < N or not 0 <= e < n:
                raise ParseError(f"entry {tok} out of range", ln, "[H]")
            entries[i, j] = ctx.antilog[e]
    h = NonBinaryMatrix(ctx, entries)

    masks = np.zeros((N, n), dtype=bool)
    got = set()
    for ln, s in body["[GENERATORS]"]:
        head, tail = _split(s, ln, "[GENERATORS]")
        (j,) = _ints(head, ln, "[GENERATORS]")
        if len(tail) != 1 or not 0 <= j < N:
            raise ParseError("expected '<symbol>: <hex mask>'", ln, "[GENERATORS]")
        try:
            m = int(tail[0], 16)
        except ValueError as exc:
            raise ParseError(f"bad mask {tail[0]!r}", ln, "[GENERATORS]") from exc
        if m >> n:
            raise ParseError("mask wider than q-1", ln, "[GENERATORS]")
        masks[j] = [(m >> k) & 1 for k in range(n)]
        got.add(j)
    if len(got) != N:
        raise ParseError(f"{N - len(got)} symbols lack a generator mask", last, "[GENERATORS]")

    selectors = {}
    for ln, s in body["[SELECTORS]"]:
        head, tail = _split(s, ln, "[SELECTORS]")
        key = _ints(head, ln, "[SELECTORS]")
        if len(key) != 2:
            raise ParseError("expected '<check> <symbol>: rows'", ln, "[SELECTORS]")
        selectors[tuple(key)] = frozenset(_ints(tail, ln, "[SELECTORS]"))
    gens = GeneratorSet(p, masks, selectors)

    rows, prov, rc, rl = [], [], [], []
    for ln, s in body["[OMEGA_E]"]:
        head, tail = _split(s, ln, "[OMEGA_E]")
        if len(head) != 4 or head[1] not in PROVENANCE:
            raise ParseError("expected '<row> <provenance> <check> <local>: cols'", ln, "[OMEGA_E]")
        r, c, loc = _ints([head[0], head[2], head[3]], ln, "[OMEGA_E]")
        if r != len(rows):
            raise ParseError(f"row {r} out of sequence", ln, "[OMEGA_E]")
        cols = _ints(tail, ln, "[OMEGA_E]")
        if any(not 0 <= x < N * n for x in cols):
            raise ParseError("column out of range", ln, "[OMEGA_E]")
        rows.append(cols)
        prov.append(head[1])
        rc.append(c)
        rl.append(loc)
    try:
        mat = BitMatrix(len(rows), N * n, rows)
        omega_e = EPRMatrix(mat, BlockStructure(1, N, len(rows), n), gens.flat_mask.copy(), tuple(prov),
                            np.array(rc, dtype=np.int64), np.array(rl, dtype=np.int64), p)
        img = binary_image(h)
        spec = CodeSpec(h, img, omega_e, gens, {"g_s": g_s, "mode": header["mode"]})
    except ValueError as exc:
        raise ParseError(str(exc), last, "[OMEGA_E]") from exc
    return spec


def read_code(path: str | os.PathLike) -> CodeSpec:
    return loads(Path(path).read_text())


def specs_equal(a: CodeSpec, b: CodeSpec) -> bool:
    ea, eb = a.omega_e, b.omega_e
    return (a.h == b.h and a.gens == b.gens and ea.matrix == eb.matrix
            and tuple(ea.provenance) == tuple(eb.provenance)
            and np.array_equal(ea.row_check, eb.row_check) and np.array_equal(ea.row_local, eb.row_local)
            and np.array_equal(ea.column_mask, eb.column_mask) and a.img.matrix == b.img.matrix)
