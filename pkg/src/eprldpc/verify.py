"""Self-checks of the core results: cycle probabilities, resolvability and f_omega structure."""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bitmatrix import precedes, rank_f2
from .gf import extender_basis, field
from .graph import estimate_p4
from .representation import exhaustive_resolvability, f_omega


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail} ({self.seconds:.2f}s)"


def random_full_rank(p: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        a = rng.integers(0, 2, size=(p, p), dtype=np.uint8)
        if rank_f2(a) == p:
            return a


def is_permutation(m: np.ndarray) -> bool:
    return bool(np.all(m.sum(axis=0) == 1) and np.all(m.sum(axis=1) == 1))


def check_p4(trials: int = 100_000, seed: int = 0) -> list[CheckResult]:
    """Monte-Carlo 4-cycle probability for q = 4, 8, 16 and the exhaustive q = 4 value."""
    out = []
    for p in (2, 3, 4):
        t0 = time.perf_counter()
        est = estimate_p4(field(p), trials, seed)
        target = 1 / (est.q - 1)
        ok = est.within(target, 3.0)
        out.append(CheckResult(f"p4 q={est.q}", ok,
                               f"{est.estimate:.4f} vs 1/{est.q - 1}={target:.4f} (SE {est.standard_error:.4f})",
                               time.perf_counter() - t0))
    t0 = time.perf_counter()
    ex = estimate_p4(field(2), exhaustive=True)
    ok = ex.exact == Fraction(1, 3) and ex.trials == 81 and ex.hits == 27
    out.append(CheckResult("p4 q=4 exhaustive", ok, f"{ex.hits}/{ex.trials} = {ex.exact}",
                           time.perf_counter() - t0))
    return out


def check_resolvability() -> list[CheckResult]:
    out = []
    for w, want in ((3, Fraction(28, 35)), (4, Fraction(1))):
        t0 = time.perf_counter()
        got = exhaustive_resolvability(3, w)
        out.append(CheckResult(f"resolvable q=8 w={w}", got == want, f"{got} (expected {want})",
                               time.perf_counter() - t0))
    return out


def check_f_omega(n: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Permutation structure and column-zeroing monotonicity of ``f_omega``."""
    rng = np.random.default_rng(seed)
    out = []
    for p in (2, 3, 4):
        t0 = time.perf_counter()
        phi = extender_basis(p)
        bad = sum(not is_permutation(f_omega(phi, random_full_rank(p, rng))) for _ in range(n))
        out.append(CheckResult(f"f_omega permutation p={p}", bad == 0, f"{n - bad}/{n} permutation matrices",
                               time.perf_counter() - t0))
    t0 = time.perf_counter()
    fwd = bwd = 0
    for _ in range(n):
        p = int(rng.integers(2, 5))
        phi = extender_basis(p)
        label = random_full_rank(p, rng)
        b = phi * rng.integers(0, 2, size=phi.shape[1], dtype=np.uint8)
        if rng.random() < 0.5:
            b2 = b * rng.integers(0, 2, size=phi.shape[1], dtype=np.uint8)  # a further zeroing of b
        else:
            b2 = phi * rng.integers(0, 2, size=phi.shape[1], dtype=np.uint8)  # unrelated pattern
        lhs = precedes(b2, b)
        rhs = precedes(f_omega(b2, label), f_omega(b, label))
        fwd += lhs and not rhs
        bwd += rhs and not lhs
    out.append(CheckResult("precedes monotonicity", fwd == 0 and bwd == 0,
                           f"{n} patterns, {fwd} forward and {bwd} backward violations",
                           time.perf_counter() - t0))
    return out


def run_all(trials: int = 100_000, seed: int = 0) -> list[CheckResult]:
    return check_p4(trials, seed) + check_resolvability() + check_f_omega(seed=seed)
