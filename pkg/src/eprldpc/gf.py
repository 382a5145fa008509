"""GF(2^p) arithmetic with log/antilog tables and companion-matrix labels.

Elements are plain integers in ``[0, q)``; bit ``i`` of an element is the
coefficient of ``x**i`` (LSB first).
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

# Minimal-weight primitive polynomials, bit masks including the x**p term.
PRIMITIVE_POLYS = {
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0x83,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


class FieldError(ValueError):
    pass


class GF2m:
    """Finite field of size ``q = 2**p``.

    Parameters
    ----------
    p : int
        Extension degree, 1 <= p <= 16.
    prim_poly : int, optional
        Primitive polynomial as a bit mask (bit ``p`` set). Defaults to the
        entry in :data:`PRIMITIVE_POLYS`.
    """

    def __init__(self, p: int, prim_poly: int | None = None):
        if not 1 <= p <= 16:
            raise FieldError(f"unsupported extension degree p={p}")
        self.p = p
        self.q = 1 << p
        if prim_poly is None:
            prim_poly = PRIMITIVE_POLYS[p] if p >= 2 else 0b11
        if prim_poly >> p != 1:
            raise FieldError(f"polynomial {prim_poly:#x} is not of degree {p}")
        self.prim_poly = prim_poly

        n = self.q - 1
        antilog = np.zeros(2 * n, dtype=np.int64)
        log = np.full(self.q, -1, dtype=np.int64)
        x = 1
        for i in range(n):
            if log[x] != -1:
                raise FieldError(f"polynomial {prim_poly:#x} is not primitive")
            antilog[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= prim_poly
        if x != 1:
            raise FieldError(f"polynomial {prim_poly:#x} is not primitive")
        antilog[n:] = antilog[:n]
        self.antilog = antilog
        self.log = log
        self.antilog.setflags(write=False)
        self.log.setflags(write=False)

    def __repr__(self):
        return f"GF2m(p={self.p}, prim_poly={self.prim_poly:#x})"

    def __eq__(self, other):
        return isinstance(other, GF2m) and (self.p, self.prim_poly) == (other.p, other.prim_poly)

    def __hash__(self):
        return hash((self.p, self.prim_poly))

    def _check(self, *values):
        for v in values:
            if not 0 <= v < self.q:
                raise FieldError(f"{v} is not an element of GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        if a == 0 or b == 0:
            return 0
        return int(self.antilog[self.log[a] + self.log[b]])

    def div(self, a: int, b: int) -> int:
        self._check(a, b)
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^p)")
        if a == 0:
            return 0
        return int(self.antilog[(self.log[a] - self.log[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        return self.div(1, a)

    def pow_alpha(self, i: int) -> int:
        """Return ``alpha**i``."""
        return int(self.antilog[i % (self.q - 1)])

    def arith(self, a: int, b: int, op: str) -> int:
        if op == "add":
            return self.add(a, b)
        if op == "mul":
            return self.mul(a, b)
        if op == "inv-mul":
            return self.div(a, b)
        raise ValueError(f"unknown field operation {op!r}")

    @cached_property
    def mul_table(self) -> np.ndarray:
        """Full ``q x q`` multiplication table."""
        a = np.arange(self.q)
        la = self.log[a]
        t = self.antilog[(la[:, None] + la[None, :]) % (self.q - 1)]
        t[0, :] = 0
        t[:, 0] = 0
        t.setflags(write=False)
        return t

    @cached_property
    def inv_table(self) -> np.ndarray:
        t = np.zeros(self.q, dtype=np.int64)
        t[1:] = self.antilog[(-self.log[1:]) % (self.q - 1)]
        t.setflags(write=False)
        return t

    def bits(self, u: int) -> np.ndarray:
        """LSB-first bit vector of ``u``."""
        return int_to_bits(u, self.p)

    def companion_label(self, u: int) -> np.ndarray:
        """Binary ``p x p`` matrix of multiplication by ``u``.

        Column ``k`` holds the bits of ``u * x**k``, so
        ``label @ bits(w) % 2 == bits(u * w)``.
        """
        self._check(u)
        label = np.zeros((self.p, self.p), dtype=np.uint8)
        if u == 0:
            return label
        for k in range(self.p):
            label[:, k] = self.bits(self.mul(u, 1 << k))
        return label

    @cached_property
    def extender_basis(self) -> np.ndarray:
        """The ``p x (q-1)`` matrix whose column ``j-1`` is the bits of ``j``."""
        return extender_basis(self.p)


def int_to_bits(u: int, p: int) -> np.ndarray:
    return np.array([(u >> k) & 1 for k in range(p)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for k, b in enumerate(bits):
        if int(b) & 1:
            out |= 1 << k
    return out


def extender_basis(p: int) -> np.ndarray:
    if p < 2:
        raise FieldError("extender basis needs p >= 2")
    q = 1 << p
    j = np.arange(1, q)
    phi = ((j[None, :] >> np.arange(p)[:, None]) & 1).astype(np.uint8)
    phi.setflags(write=False)
    return phi


def field(p: int) -> GF2m:
    """Shared field context for degree ``p`` with the default polynomial."""
    return _field_cache(p)


_CACHE: dict[int, GF2m] = {}


def _field_cache(p: int) -> GF2m:
    ctx = _CACHE.get(p)
    if ctx is None:
        ctx = _CACHE[p] = GF2m(p)
    return ctx
