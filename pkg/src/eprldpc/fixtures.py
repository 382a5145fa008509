"""Reference values and reproducible test codes.

Degree distributions are edge-perspective maps ``degree -> coefficient``
(the coefficient of ``x**(degree-1)``). Thresholds marked ``"dB"`` are
Eb/N0 values on BI-AWGN.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple

from .channel import CodeSpec
from .construction import ConstructionConfig, optimize_code, optimize_labels, peg_mother, random_mother
from .gf import field


class ConstructionOutput(NamedTuple):
    q: int
    g_s: int
    m_s: int
    resolvable_bound: int  # q/2 - 1
    strict: bool  # v^e strictly below v (some columns zeroed)


CONSTRUCTION_OUTPUTS = (
    ConstructionOutput(8, 6, 734, 3, False),
    ConstructionOutput(16, 8, 1415, 7, False),
    ConstructionOutput(8, 6, 507, 3, True),
    ConstructionOutput(32, 10, 2132, 15, True),
)


def _poly(pairs):
    # pairs of (exponent, coefficient) -> degree map
    return {e + 1: c for e, c in pairs}


GF16_LAMBDA = _poly([(1, 0.303), (2, 0.337), (3, 0.04), (4, 0.113), (6, 0.122), (12, 0.085)])
GF16_RHO = _poly([(5, 0.85), (6, 0.15)])

LAMBDA_P1 = _poly([(1, .183), (2, .275), (3, .096), (4, .024), (5, .049), (6, .049), (7, .026), (8, .007),
                   (9, .001), (16, .002), (17, .008), (18, .019), (19, .032), (20, .041), (21, .039), (22, .030),
                   (23, .020), (24, .014), (25, .014), (26, .016), (27, .017), (28, .015), (29, .011), (30, .007),
                   (31, .004), (32, .002), (33, .001)])
RHO_P1 = _poly([(3, .047), (4, .186), (5, .308), (6, .277), (7, .140), (8, .038), (9, .004)])
LAMBDA_H = _poly([(1, .153), (2, .261), (3, .138), (4, .051), (5, .047), (6, .046), (7, .026), (8, .007), (9, .001),
                  (17, .001), (18, .004), (19, .012), (20, .021), (21, .029), (22, .031), (23, .026), (24, .019),
                  (25, .015), (26, .015), (27, .019), (28, .021), (29, .020), (30, .016), (31, .011), (32, .006),
                  (33, .003), (34, .001)])
RHO_H = _poly([(4, .010), (5, .029), (6, .074), (7, .178), (8, .272), (9, .248), (10, .136), (11, .044),
               (12, .008)])
LAMBDA_OMEGA_E = _poly([(1, .138), (2, .235), (3, .140), (4, .084), (5, .075), (6, .052), (7, .024), (8, .006),
                        (9, .001), (13, .001), (14, .003), (15, .005), (16, .008), (17, .010), (18, .013),
                        (19, .016), (20, .020), (21, .021), (22, .021), (23, .019), (24, .017), (25, .016),
                        (26, .016), (27, .016), (28, .014), (29, .011), (30, .008), (31, .005), (32, .002),
                        (33, .001)])
RHO_OMEGA_E = _poly([(3, .002), (4, .004), (5, .007), (6, .051), (7, .176), (8, .291), (9, .268), (10, .147),
                     (11, .048), (12, .006)])
LAMBDA_P2 = _poly([(1, .102), (2, .183), (3, .113), (4, .039), (5, .016), (6, .028), (7, .040), (8, .033),
                   (9, .026), (10, .032), (11, .038), (12, .030), (13, .016), (14, .006), (15, .001), (59, .001),
                   (60, .001), (61, .003), (62, .006), (63, .010), (64, .015), (65, .021), (66, .027), (67, .032),
                   (68, .035), (69, .034), (70, .031), (71, .026), (72, .020), (73, .014), (74, .009), (75, .006),
                   (76, .003), (77, .002), (78, .001)])
RHO_P2 = _poly([(7, .02), (8, .095), (9, .205), (10, .260), (11, .218), (12, .128), (13, .054), (14, .016),
                (15, .003)])


class Threshold(NamedTuple):
    value: float
    unit: str
    note: str = ""


THRESHOLDS = {
    "lambda_p1": Threshold(-0.18, "dB"),
    "H": Threshold(0.59, "dB"),
    "omega_e": Threshold(0.73, "dB"),
    "omega": Threshold(0.68, "dB"),
    # no unit is printed for this one; read as an erasure probability
    "lambda_p2_bec": Threshold(0.49, "dimensionless", "unit not stated; taken as erasure probability"),
}
CAPACITY_EBN0_DB = 0.30
FIG3_CODE = dict(q=8, bits=12000, rate=0.5311, rate_extended=0.5355)


@lru_cache(maxsize=None)
def ordering_codes(n: int = 400, seed: int = 1) -> tuple[CodeSpec, CodeSpec]:
    """GF(8) pair for decoder ordering: ``(EPR code, same code with full Omega)``.

    Random (3,6) mother and random labels, so the binary image has short
    cycles for row zeroing to remove. ``n`` symbols give ``3 n`` bits.
    """
    cfg = ConstructionConfig(p=3, N=n, g_s=6, label_rounds=0, max_p=3, seed=0)
    mother = random_mother([3] * n, [6] * (n // 2), seed=seed)
    omega_e, gens, img, _ = optimize_code(cfg, mother)
    return (CodeSpec.from_image(img, omega_e, gens, {"g_s": 6, "mode": "extended"}),
            CodeSpec.from_image(img, meta={"g_s": 0, "mode": "extended"}))


@lru_cache(maxsize=None)
def bec_code(p: int, n: int, seed: int = 0) -> CodeSpec:
    """(3,6) PEG mother with random labels and the full Omega, for erasure sweeps."""
    cfg = ConstructionConfig(p=p, N=n, label_rounds=0)
    img = optimize_labels(peg_mother(cfg), field(p), seed, 6, 0)
    return CodeSpec.from_image(img, meta={"g_s": 0, "mode": "extended"})


@lru_cache(maxsize=None)
def girth6_code(p: int = 3, n: int = 60, seed: int = 0) -> CodeSpec:
    """Small PEG-based EPR code whose extended matrix has girth >= 6."""
    cfg = ConstructionConfig(p=p, N=n, g_s=6, seed=seed, max_p=p)
    omega_e, gens, img, _ = optimize_code(cfg)
    return CodeSpec.from_image(img, omega_e, gens, {"g_s": 6, "mode": "extended"})
