"""Monte-Carlo sweeps, paired comparisons and threshold estimation."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .channel import (
    ChannelModel,
    CodeSpec,
    channel_llr,
    ebn0_to_sigma,
    encode,
    extended_llr_from_base,
    hard_extend,
    transmit,
)
from .decoders import (
    CONVERGED,
    BECDecoder,
    HardDecoder,
    HybridDecoder,
    HybridSchedule,
    base_to_extended_erasures,
    decode_binary_bp,
    decode_qspa,
    symbol_priors,
)
from .decoders.base import BPState, tanner
from .representation import extend_codeword

DECODERS = ("qspa", "seb", "hepr", "sepr", "ser", "bec")
DEFAULT_CHANNEL = {"qspa": "biawgn", "seb": "biawgn", "sepr": "biawgn", "ser": "biawgn",
                   "hepr": "bsc", "bec": "bec"}
CSV_FIELDS = ("channel_param", "frames", "bit_errors", "frame_errors", "undetected", "ber", "fer",
              "ci_low", "ci_high", "mean_iters", "seconds")


class PlanError(ValueError):
    pass


@dataclass
class ExperimentPlan:
    """What to simulate.

    ``grid`` holds Eb/N0 in dB (BI-AWGN), crossover probabilities (BSC) or
    erasure probabilities (BEC). ``mode`` says whether the base bits or the
    active extended bits go over the channel.
    """

    code: CodeSpec
    decoder: str
    grid: Sequence[float]
    min_errors: int = 100
    max_frames: int = 1_000_000
    sched: HybridSchedule = field(default_factory=HybridSchedule)
    seed: int = 0
    mode: str = "base"
    max_iter: int = 40
    channel: str | None = None
    workers: int = 1
    batch: int = 32

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise PlanError(f"unknown decoder {self.decoder!r}; choose from {', '.join(DECODERS)}")
        if not len(self.grid):
            raise PlanError("empty channel grid")
        if self.min_errors < 1 or self.max_frames < 1:
            raise PlanError("stop rule must be positive")
        if self.mode not in ("base", "extended"):
            raise PlanError(f"unknown mode {self.mode!r}")
        ch = self.channel_kind
        if self.decoder in ("qspa", "seb") and self.mode != "base":
            raise PlanError(f"{self.decoder} decodes base bits; use mode=base")
        if (self.decoder == "bec") != (ch == "bec"):
            raise PlanError("the bec decoder pairs with the erasure channel only")
        if ch not in ("bsc", "bec", "biawgn"):
            raise PlanError(f"unknown channel {ch!r}")

    @property
    def channel_kind(self) -> str:
        return self.channel or DEFAULT_CHANNEL[self.decoder]


class FrameRunner:
    """Runs single frames of a plan; deterministic per ``(seed, frame)``.

    Codeword and noise depend on the frame index only, so every grid point
    sees the same frames (common random numbers): erasure and flip
    patterns are nested as the channel parameter grows.
    """

    def __init__(self, plan: ExperimentPlan):
        self.plan = plan
        spec = plan.code
        self.spec = spec
        # SER decodes on the full Omega of the same code
        self.dspec = CodeSpec.from_image(spec.img) if plan.decoder == "ser" else spec

    @cached_property
    def decoder(self):
        d, s, plan = self.plan.decoder, self.dspec, self.plan
        if d in ("sepr", "ser"):
            return HybridDecoder(s.omega_e, s.gens, plan.sched)
        if d == "hepr":
            return HardDecoder(s.omega_e, s.gens, plan.sched.flip_threshold, plan.sched.k_max)
        if d == "bec":
            return BECDecoder(s.omega_e, s.gens, plan.sched.k_max)
        return None

    def rate(self) -> float:
        return self.dspec.rate_for(self.plan.mode)

    def channel(self, param: float) -> ChannelModel:
        kind = self.plan.channel_kind
        if kind == "biawgn":
            return ChannelModel("biawgn", ebn0_to_sigma(param, self.rate()), self.plan.seed)
        return ChannelModel(kind, float(param), self.plan.seed)

    def frame(self, param: float, f: int) -> tuple[int, int, int, int]:
        """``(bit errors, frame error, undetected, iterations)`` of one frame."""
        plan, spec = self.plan, self.spec
        x, xb = encode(spec, seed=None, info=np.random.default_rng([plan.seed, f, 0])
                       .integers(0, spec.q, size=spec.encoder.k))
        ch = self.channel(param)
        res = self.decode(ch, xb, f)
        wrong = res.xbar_hat != xb
        if plan.decoder == "bec":
            wrong = wrong | res.info["erased_bits"]
        be = int(wrong.sum())
        fe = int(be > 0)
        und = int(fe and res.status == CONVERGED)
        return be, fe, und, int(res.iterations)

    def decode(self, ch: ChannelModel, xb: np.ndarray, fid: int):
        plan, ds = self.plan, self.dspec
        d = plan.decoder
        if plan.mode == "extended":
            ve = extend_codeword(xb, ds.gens).bits
            rx = transmit(ch, ve, fid, 1)
            if d == "bec":
                return self.decoder.decode(rx[0], rx[1], plan.sched)
            if d == "hepr":
                hard = rx if ch.kind == "bsc" else (channel_llr(ch, rx) < 0).astype(np.uint8)
                return self._hard(hard)
            return self.decoder.decode(np.where(ds.gens.flat_mask, channel_llr(ch, rx), 0.0))
        rx = transmit(ch, xb, fid, 0)
        if d == "bec":
            v, er = base_to_extended_erasures(rx[0], rx[1], ds.gens)
            return self.decoder.decode(v, er, plan.sched)
        L = channel_llr(ch, rx)
        if d == "seb":
            return decode_binary_bp(ds.img.matrix, L, plan.max_iter, p=ds.p)
        if d == "qspa":
            return decode_qspa(ds.h, symbol_priors(L, ds.p), plan.max_iter)
        if d == "hepr":
            return self._hard(hard_extend((L < 0).astype(np.uint8), ds.gens))
        return self.decoder.decode(extended_llr_from_base(L, ds.gens))

    def _hard(self, v_init):
        dec = self.decoder
        v = np.asarray(v_init, dtype=np.uint8).reshape(self.dspec.gens.masks.shape).copy()
        trace = [int(dec.syndrome(v).sum())]
        ok, its, _ = dec.iterate(v, self.plan.max_iter, trace)
        return dec.finish(v, ok, its, trace)

    def batch(self, param: float, start: int, stop: int) -> list[tuple[int, int, int, int]]:
        return [self.frame(param, f) for f in range(start, stop)]


_WORKER: FrameRunner | None = None


def _init_worker(plan):
    global _WORKER
    _WORKER = FrameRunner(plan)


def _work(args):
    return _WORKER.batch(*args)


@dataclass
class PointResult:
    channel_param: float
    frames: int
    bit_errors: int
    frame_errors: int
    undetected: int
    iterations: int
    n_bits: int
    frame_bit_errors: list[int] = field(repr=False, default_factory=list)
    seconds: float | None = None

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.n_bits) if self.frames else float("nan")

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else float("nan")

    @property
    def mean_iters(self) -> float:
        return self.iterations / self.frames if self.frames else float("nan")

    @property
    def ci(self) -> tuple[float, float]:
        return ber_interval(self.frame_bit_errors, self.n_bits)


def ber_interval(frame_bit_errors: Sequence[int], n_bits: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson interval for the BER with the sample size deflated by the design effect.

    Bit errors cluster within frames, so the binomial variance is
    inflated by the observed between-frame variance ratio.
    """
    e = np.asarray(frame_bit_errors, dtype=float)
    F = e.size
    if F == 0:
        return 0.0, 1.0
    n = F * n_bits
    phat = e.sum() / n
    z = stats.norm.ppf(0.5 + level / 2)
    deff = 1.0
    if 0 < phat < 1 and F > 1:
        var_cluster = e.var(ddof=1) / n_bits
        var_binom = phat * (1 - phat)
        deff = max(1.0, var_cluster / var_binom)
    n_eff = n / deff
    denom = 1 + z * z / n_eff
    centre = (phat + z * z / (2 * n_eff)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n_eff + z * z / (4 * n_eff * n_eff)) / denom
    lo = 0.0 if phat == 0 else max(0.0, centre - half)
    hi = 1.0 if phat == 1 else min(1.0, centre + half)
    return lo, hi


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class SweepResult:
    plan: ExperimentPlan = field(repr=False)
    points: list[PointResult]

    def to_csv(self, timing: bool = False) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for pt in self.points:
            lo, hi = pt.ci
            w.writerow([_fmt(pt.channel_param), pt.frames, pt.bit_errors, pt.frame_errors, pt.undetected,
                        _fmt(pt.ber), _fmt(pt.fer), _fmt(lo), _fmt(hi), _fmt(pt.mean_iters),
                        _fmt(pt.seconds) if timing and pt.seconds is not None else ""])
        return buf.getvalue()

    def write_csv(self, path, timing: bool = False) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv(timing))

    def plot(self, path, title: str | None = None) -> None:
        """Self-contained SVG of BER and FER against the channel parameter."""
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        plt.rcParams["svg.hashsalt"] = "eprldpc"
        xs = [p.channel_param for p in self.points]
        fig, ax = plt.subplots(figsize=(6, 4))
        for attr, style in (("ber", "o-"), ("fer", "s--")):
            ys = [getattr(p, attr) for p in self.points]
            ys = [y if y > 0 else np.nan for y in ys]
            ax.semilogy(xs, ys, style, label=attr.upper())
        kind = self.plan.channel_kind
        ax.set_xlabel({"biawgn": "Eb/N0 (dB)", "bsc": "crossover probability",
                       "bec": "erasure probability"}[kind])
        ax.set_ylabel("error rate")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        ax.set_title(title or f"{self.plan.decoder} ({self.plan.mode} mode)")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def run_sweep(plan: ExperimentPlan, timing: bool = True) -> SweepResult:
    """Simulate every grid point until the stop rule fires.

    Frames are generated in fixed batches and consumed in frame order, so
    the counts do not depend on ``plan.workers``.
    """
    runner = FrameRunner(plan)
    runner.decoder  # build before any frame, surfacing configuration errors
    n_bits = plan.code.Np
    pool = None
    if plan.workers > 1:
        pool = ProcessPoolExecutor(plan.workers, initializer=_init_worker, initargs=(plan,))
    points = []
    try:
        for param in plan.grid:
            t0 = time.perf_counter()
            pt = PointResult(float(param), 0, 0, 0, 0, 0, n_bits)
            start = 0
            done = False
            while not done and start < plan.max_frames:
                width = plan.batch * max(1, plan.workers)
                spans = []
                for s in range(start, min(start + width, plan.max_frames), plan.batch):
                    spans.append((float(param), s, min(s + plan.batch, plan.max_frames)))
                if pool is None:
                    chunks = [runner.batch(*a) for a in spans]
                else:
                    chunks = list(pool.map(_work, spans))
                for rec in (r for c in chunks for r in c):
                    be, fe, und, its = rec
                    pt.frames += 1
                    pt.bit_errors += be
                    pt.frame_errors += fe
                    pt.undetected += und
                    pt.iterations += its
                    pt.frame_bit_errors.append(be)
                    if pt.frame_errors >= plan.min_errors or pt.frames >= plan.max_frames:
                        done = True
                        break
                start = spans[-1][2]
            pt.seconds = time.perf_counter() - t0 if timing else None
            points.append(pt)
    finally:
        if pool is not None:
            pool.shutdown()
    return SweepResult(plan, points)


@dataclass
class PairedComparison:
    """Frame outcomes of two decoders on identical frames."""

    errors_a: np.ndarray
    errors_b: np.ndarray

    @property
    def frames(self) -> int:
        return int(self.errors_a.size)

    @property
    def fer_a(self) -> float:
        return float(self.errors_a.mean())

    @property
    def fer_b(self) -> float:
        return float(self.errors_b.mean())

    @property
    def discordant(self) -> tuple[int, int]:
        """Frames only ``a`` fails, frames only ``b`` fails."""
        a, b = self.errors_a.astype(bool), self.errors_b.astype(bool)
        return int((a & ~b).sum()), int((~a & b).sum())

    def p_value_a_better(self) -> float:
        """One-sided exact McNemar p-value for ``FER(a) < FER(b)``."""
        n10, n01 = self.discordant
        n = n10 + n01
        if n == 0:
            return 1.0
        return float(stats.binomtest(n10, n, 0.5, alternative="less").pvalue)

    def p_value_a_worse(self) -> float:
        """One-sided exact McNemar p-value for ``FER(a) > FER(b)``."""
        n10, n01 = self.discordant
        n = n10 + n01
        if n == 0:
            return 1.0
        return float(stats.binomtest(n10, n, 0.5, alternative="greater").pvalue)


def run_paired(plans: Sequence[ExperimentPlan], point: int = 0, min_errors: int = 100,
               max_frames: int = 100_000, batch: int = 50) -> list[np.ndarray]:
    """Frame-error indicators of several plans on the same frames.

    All plans must share the master seed; frames run until every plan has
    ``min_errors`` frame errors.
    """
    if len({p.seed for p in plans}) != 1:
        raise PlanError("paired plans must share a seed")
    runners = [FrameRunner(p) for p in plans]
    outs: list[list[int]] = [[] for _ in plans]
    f = 0
    while f < max_frames:
        for r, out in zip(runners, outs):
            param = r.plan.grid[point]
            out.extend(r.frame(param, g)[1] for g in range(f, f + batch))
        f += batch
        if min(sum(o) for o in outs) >= min_errors:
            break
    return [np.array(o, dtype=np.int8) for o in outs]


# ---------------------------------------------------------------- thresholds

@dataclass
class ThresholdEstimate:
    """Bisection result; ``value`` is the midpoint of the final bracket."""

    value: float
    low: float
    high: float
    unit: str
    target: float
    trace: list[tuple[float, float]]

    @property
    def width(self) -> float:
        return self.high - self.low


def _h2(p):
    p = np.clip(p, 1e-15, 1 - 1e-15)
    return -(p * np.log2(p) + (1 - p) * np.log2(1 - p))


def syndrome_entropy(spec: CodeSpec, decoder: str, param: float, frames: int = 20, iterations: int = 200,
                     seed: int = 0, mode: str | None = None, sched: HybridSchedule | None = None) -> float:
    """Average syndrome-bit entropy after a fixed number of iterations.

    The all-zero codeword is sent (the channels are output-symmetric). Each
    syndrome bit's marginal is its empirical frequency over the frames; on
    the erasure channel a syndrome bit touching a residual erasure counts
    as one full bit.
    """
    if decoder not in ("seb", "sepr", "ser", "bec"):
        raise PlanError(f"threshold estimation is not defined for {decoder!r}")
    mode = mode or ("base" if decoder == "seb" else "extended")
    ds = CodeSpec.from_image(spec.img) if decoder == "ser" else spec
    kind = "bec" if decoder == "bec" else "biawgn"
    if kind == "biawgn":
        ch = ChannelModel("biawgn", ebn0_to_sigma(param, ds.rate_for(mode)), seed)
    else:
        ch = ChannelModel("bec", float(param), seed)
    m = ds.img.matrix if decoder == "seb" else ds.omega_e.matrix
    n_bits = m.n_cols
    zeros_base = np.zeros(ds.Np, dtype=np.uint8)
    ones = np.zeros(m.n_rows)
    sched = sched or HybridSchedule.from_max_iter(iterations)
    if decoder == "bec":
        dec = BECDecoder(ds.omega_e, ds.gens, sched.k_max)
        g = tanner(m)
        for f in range(frames):
            if mode == "extended":
                bits, er = transmit(ch, np.zeros(n_bits, dtype=np.uint8), f, 1)
                er = er & ds.gens.flat_mask
            else:
                b, e = transmit(ch, zeros_base, f, 0)
                bits, er = base_to_extended_erasures(b, e, ds.gens)
            er_left = dec.decode(bits, er, sched).info["extended_erased"]
            touch = np.bincount(g.edge_chk, weights=er_left[g.chk_var], minlength=m.n_rows) > 0
            ones += touch
        return float((ones / frames).mean())
    for f in range(frames):
        if decoder == "seb":
            L = channel_llr(ch, transmit(ch, zeros_base, f, 0))
            st = BPState(m, L)
            st.run(iterations, early_stop=True)
            hard = st.hard
        else:
            if mode == "extended":
                y = transmit(ch, np.zeros(n_bits, dtype=np.uint8), f, 1)
                L = np.where(ds.gens.flat_mask, channel_llr(ch, y), 0.0)
            else:
                L = extended_llr_from_base(channel_llr(ch, transmit(ch, zeros_base, f, 0)), ds.gens)
            res = HybridDecoder(ds.omega_e, ds.gens, sched).decode(L)
            hard = res.v_hat
        ones += m.matvec(hard)
    return float(_h2(ones / frames).mean())


def estimate_threshold(spec: CodeSpec, decoder: str, target: float = 1e-3, tolerance: float = 0.05,
                       low: float | None = None, high: float | None = None, frames: int = 20,
                       iterations: int = 200, seed: int = 0, mode: str | None = None,
                       metric: Callable[[float], float] | None = None) -> ThresholdEstimate:
    """Bisect for the channel parameter where the syndrome entropy meets ``target``.

    For BI-AWGN the parameter is Eb/N0 in dB and larger is better; for the
    erasure channel it is the erasure probability and smaller is better.
    """
    bec = decoder == "bec"
    if low is None:
        low = 0.3 if bec else -1.0
    if high is None:
        high = 0.6 if bec else 4.0
    if not low < high:
        raise PlanError("need low < high")
    f = metric or (lambda x: syndrome_entropy(spec, decoder, x, frames, iterations, seed, mode))
    good = (lambda x: x <= target)
    trace = []
    v_lo, v_hi = f(low), f(high)
    trace += [(low, v_lo), (high, v_hi)]
    # the good end is high for SNR and low for erasure probability
    good_end, bad_end = (low, high) if bec else (high, low)
    v_good, v_bad = (v_lo, v_hi) if bec else (v_hi, v_lo)
    if not good(v_good) or good(v_bad):
        raise PlanError(f"interval [{low}, {high}] does not bracket the target {target}: {trace}")
    while abs(good_end - bad_end) > tolerance:
        mid = 0.5 * (good_end + bad_end)
        val = f(mid)
        trace.append((mid, val))
        if good(val):
            good_end = mid
        else:
            bad_end = mid
    lo, hi = sorted((good_end, bad_end))
    return ThresholdEstimate(0.5 * (lo + hi), lo, hi, "erasure probability" if bec else "dB", target, trace)

