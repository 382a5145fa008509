import csv
import io

import numpy as np
import pytest

from eprldpc.decoders import CONVERGED, DecodeResult, HybridSchedule
from eprldpc.fixtures import bec_code, girth6_code
from eprldpc.sim import (
    CSV_FIELDS,
    ExperimentPlan,
    FrameRunner,
    PairedComparison,
    PlanError,
    ber_interval,
    estimate_threshold,
    run_paired,
    run_sweep,
    syndrome_entropy,
)


@pytest.fixture(scope="module")
def spec():
    return girth6_code()


@pytest.mark.parametrize("decoder, mode", [("hepr", "extended"), ("hepr", "base"), ("sepr", "extended"),
                                           ("ser", "extended"), ("seb", "base"), ("qspa", "base")])
def test_noiseless_channel_no_errors(spec, decoder, mode):
    plan = ExperimentPlan(spec, decoder, [0.0], min_errors=1, max_frames=8, mode=mode, channel="bsc",
                          sched=HybridSchedule(4, 2, 2), max_iter=8)
    pt = run_sweep(plan).points[0]
    assert pt.frames == 8
    assert pt.bit_errors == pt.frame_errors == pt.undetected == 0


def test_bec_no_erasures(spec):
    plan = ExperimentPlan(spec, "bec", [0.0], min_errors=1, max_frames=5, mode="extended")
    pt = run_sweep(plan).points[0]
    assert pt.ber == 0 and pt.fer == 0


@pytest.mark.parametrize("kw", [
    dict(decoder="nope"),
    dict(grid=[]),
    dict(min_errors=0),
    dict(mode="sideways"),
    dict(decoder="qspa", mode="extended"),
    dict(decoder="seb", mode="extended"),
    dict(decoder="bec", channel="biawgn"),
    dict(decoder="sepr", channel="bec"),
    dict(channel="rayleigh"),
])
def test_plan_errors(spec, kw):
    args = dict(code=spec, decoder="sepr", grid=[1.0])
    args.update(kw)
    with pytest.raises(PlanError):
        ExperimentPlan(**args)


def test_sweep_csv_shape(spec):
    plan = ExperimentPlan(spec, "seb", [1.0, 2.0], min_errors=3, max_frames=40, batch=8)
    res = run_sweep(plan)
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert tuple(rows[0]) == CSV_FIELDS
    assert len(rows) == 3
    assert all(r[-1] == "" for r in rows[1:])
    timed = list(csv.reader(io.StringIO(res.to_csv(timing=True))))
    assert all(float(r[-1]) >= 0 for r in timed[1:])
    for pt in res.points:
        assert pt.bit_errors <= pt.frame_errors * spec.Np
        assert pt.frame_errors <= pt.frames


def test_sweep_deterministic_across_workers(spec):
    kw = dict(code=spec, decoder="sepr", grid=[1.0, 1.5], min_errors=5, max_frames=60,
              sched=HybridSchedule(8, 2, 2), mode="extended", seed=3, batch=7)
    a = run_sweep(ExperimentPlan(workers=1, **kw), timing=False).to_csv()
    b = run_sweep(ExperimentPlan(workers=2, **kw), timing=False).to_csv()
    assert a == b


def test_frames_nested_across_grid(spec):
    # common random numbers: a larger crossover flips a superset of bits
    r = FrameRunner(ExperimentPlan(spec, "hepr", [0.0], mode="extended"))
    from eprldpc.channel import ChannelModel, transmit

    bits = np.zeros(spec.omega_e.matrix.n_cols, dtype=np.uint8)
    lo = transmit(ChannelModel("bsc", 0.02, 0), bits, 5, 1)
    hi = transmit(ChannelModel("bsc", 0.05, 0), bits, 5, 1)
    assert np.all(hi >= lo)
    assert r.channel(0.02).kind == "bsc"


def test_undetected_counted(spec, monkeypatch):
    runner = FrameRunner(ExperimentPlan(spec, "seb", [1.0]))

    def wrong(ch, xb, fid):
        bad = xb.copy()
        bad[0] ^= 1
        return DecodeResult(CONVERGED, None, bad, 1)

    monkeypatch.setattr(runner, "decode", wrong)
    be, fe, und, its = runner.frame(1.0, 0)
    assert (be, fe, und) == (1, 1, 1)


def test_ber_interval_basics():
    lo, hi = ber_interval([0, 0, 0], 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = ber_interval([5, 5, 5, 5], 100)
    assert lo < 0.05 < hi
    # clustered errors widen the interval
    lo2, hi2 = ber_interval([20, 0, 0, 0], 100)
    assert hi2 - lo2 > hi - lo


def test_ci_calibration(spec):
    # the CI of each short run should cover a long reference run at another seed
    ref = run_sweep(ExperimentPlan(spec, "seb", [1.5], min_errors=400, max_frames=4000, seed=999)).points[0]
    covered = 0
    for s in range(20):
        pt = run_sweep(ExperimentPlan(spec, "seb", [1.5], min_errors=15, max_frames=4000, seed=s)).points[0]
        lo, hi = pt.ci
        covered += lo <= ref.ber <= hi
    assert covered >= 18


def test_paired_comparison_pvalues():
    a = np.array([0] * 40 + [1] * 10, dtype=np.int8)
    b = np.array([1] * 30 + [0] * 10 + [1] * 10, dtype=np.int8)
    pc = PairedComparison(a, b)
    assert pc.discordant == (0, 30)
    assert pc.p_value_a_better() < 1e-6
    assert pc.p_value_a_worse() == 1.0
    assert PairedComparison(a, a).p_value_a_better() == 1.0


def test_run_paired_requires_shared_seed(spec):
    plans = [ExperimentPlan(spec, "seb", [1.0], seed=0), ExperimentPlan(spec, "seb", [1.0], seed=1)]
    with pytest.raises(PlanError):
        run_paired(plans)


def test_run_paired_same_decoder_identical(spec):
    plans = [ExperimentPlan(spec, "seb", [1.0]), ExperimentPlan(spec, "seb", [1.0])]
    a, b = run_paired(plans, min_errors=3, max_frames=30, batch=10)
    assert np.array_equal(a, b)


def test_threshold_bisection_synthetic():
    est = estimate_threshold(None, "sepr", 1e-3, 0.01, 0.0, 5.0, metric=lambda x: 10.0 ** -x)
    assert est.low <= 3.0 <= est.high
    assert est.width <= 0.01 and est.unit == "dB"
    est = estimate_threshold(None, "bec", 0.45, 0.001, 0.3, 0.6, metric=lambda x: x)
    assert est.low <= 0.45 <= est.high and est.unit == "erasure probability"


def test_threshold_not_bracketed():
    with pytest.raises(PlanError):
        estimate_threshold(None, "sepr", 1e-3, 0.1, 0.0, 1.0, metric=lambda x: 0.5)
    with pytest.raises(PlanError):
        estimate_threshold(None, "sepr", 1e-3, 0.1, 2.0, 1.0, metric=lambda x: 0.5)


def test_syndrome_entropy_monotone_ends(spec):
    good = syndrome_entropy(spec, "sepr", 6.0, frames=5, iterations=20)
    bad = syndrome_entropy(spec, "sepr", -3.0, frames=5, iterations=20)
    assert good == pytest.approx(0.0, abs=1e-9)
    assert bad > 0.1
    bec = bec_code(2, 60)
    assert syndrome_entropy(bec, "bec", 0.0, frames=3) == 0.0
    assert syndrome_entropy(bec, "bec", 0.95, frames=3) > 0.5
    with pytest.raises(PlanError):
        syndrome_entropy(spec, "qspa", 1.0)
