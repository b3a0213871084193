import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from memsync import analysis as an
from memsync.analysis import (InsufficientSpikesError, SpikeTrain, cycle_closure_gap, cycle_segment,
                              detect_spikes, estimate_frequency, is_locked, lock_onset,
                              phase_difference, synthetic_pulse_trace)


class Columns:
    def __init__(self, t, **cols):
        self.t = np.asarray(t)
        self.cols = cols

    def __getitem__(self, name):
        return self.cols[name]


def periodic(f, t_end, phase=0.0):
    return SpikeTrain(phase / f + np.arange(0, t_end * f) / f)


def sine_trace(f1, f2, t_end, dt, shift=0.0, lag=0.0):
    t = np.arange(0, t_end, dt)
    return Columns(t + shift, a=np.sin(2 * np.pi * f1 * t), b=np.sin(2 * np.pi * f2 * (t - lag)))


# --- detect_spikes ------------------------------------------------------------------


def test_flat_channel_has_no_spikes():
    tr = Columns(np.arange(100) * 0.1, a=np.zeros(100))
    assert len(detect_spikes(tr, "a", 0.5, 0.1)) == 0


def test_empty_trace_gives_empty_train():
    assert len(detect_spikes(Columns([], a=np.empty(0)), "a", 0.0, 1.0)) == 0


def test_interpolated_crossing():
    tr = Columns([0.0, 1.0, 2.0], a=np.array([0.0, 1.0, 1.0]))
    assert detect_spikes(tr, "a", 0.25, 0.5).times.tolist() == [0.25]


def test_refractory_suppresses_chatter():
    tr = Columns(np.arange(6.0), a=np.array([0, 1, 0, 1, 0, 1.0]))
    assert len(detect_spikes(tr, "a", 0.5, 0.1)) == 3
    assert len(detect_spikes(tr, "a", 0.5, 2.5)) == 2


def test_refractory_must_be_positive():
    with pytest.raises(ValueError):
        detect_spikes(Columns([0.0], a=np.zeros(1)), "a", 0.0, 0.0)


def test_synthetic_540hz():
    dt = 2e-6
    trace = synthetic_pulse_trace(periodic(540.0, 0.05).times, 0.05, dt, width=6.4e-6)
    train = detect_spikes(trace, "v", 0.5, 1e-4)
    np.testing.assert_array_less(np.abs(np.diff(train.times) - 1 / 540.0), dt + 1e-12)


@settings(max_examples=50)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=30, unique=True))
def test_pulse_round_trip(raw):
    times = np.sort(np.array(raw)) * 90.0 + 1.0
    assume(np.all(np.diff(times) > 1.5))
    dt = 0.01
    trace = synthetic_pulse_trace(times, 100.0, dt, width=0.5)
    got = detect_spikes(trace, "v", 0.5, 1.0).times
    assert got.size == times.size
    assert np.all(np.abs(got - times) <= dt + 1e-9)


def test_spike_train_must_increase():
    with pytest.raises(ValueError):
        SpikeTrain([0.0, 1.0, 1.0])


# --- frequency and phase --------------------------------------------------------------------


def test_frequency_examples():
    assert estimate_frequency(SpikeTrain([0, 1, 2, 3])) == 1.0
    assert estimate_frequency(SpikeTrain([0, 1, 2, 10])) == 1.0


def test_frequency_needs_three_spikes():
    with pytest.raises(InsufficientSpikesError):
        estimate_frequency(SpikeTrain([0.0, 1.0]))
    with pytest.raises(InsufficientSpikesError):
        estimate_frequency(SpikeTrain([0, 1, 2, 3]), window=(1.5, 10))


def test_phase_examples():
    ref = periodic(10.0, 2.0)
    assert np.all(phase_difference(ref, ref) == 0.0)
    half = phase_difference(ref, periodic(10.0, 2.0, phase=0.5))
    np.testing.assert_allclose(half, np.pi, atol=1e-9)


def test_phase_skips_empty_periods():
    ref = SpikeTrain([0.0, 1.0, 2.0, 3.0])
    other = SpikeTrain([0.25, 2.5])
    np.testing.assert_allclose(phase_difference(ref, other), [np.pi / 2, np.pi])


def test_phase_needs_two_spikes():
    with pytest.raises(InsufficientSpikesError):
        phase_difference(SpikeTrain([0.0]), SpikeTrain([0.0, 1.0]))


@given(st.floats(0.5, 50), st.floats(0.5, 50), st.floats(0, 1))
def test_phases_in_range(f1, f2, frac):
    ph = phase_difference(periodic(f1, 5.0), periodic(f2, 5.0, phase=frac))
    assert np.all((ph >= 0) & (ph < 2 * np.pi))


def test_lock_examples():
    ref = periodic(540.0, 0.1)
    rep = is_locked(ref, ref)
    assert rep.locked and rep.delta_f_rel == 0.0
    rep = is_locked(periodic(540.0, 0.1), periodic(410.0, 0.1))
    assert not rep.locked
    assert rep.delta_f_rel == pytest.approx(130 / 540, rel=1e-6)


def test_frequency_locked_but_phase_drifting():
    # equal median ISI, but a slow phase slip
    ref = periodic(1.0, 40)
    other = SpikeTrain(ref.times + 0.3 + 0.02 * np.arange(len(ref)))
    rep = is_locked(ref, other, freq_tol=0.05)
    assert rep.delta_f_rel < 0.05 and rep.phase_range > an.PHASE_TOL and not rep.locked


@given(st.floats(0.5, 5), st.floats(0.5, 5), st.floats(0, 1))
def test_locked_implies_tolerances(f1, f2, frac):
    rep = is_locked(periodic(f1, 30.0), periodic(f2, 30.0, phase=frac))
    if rep.locked:
        assert rep.delta_f_rel < an.FREQ_TOL and rep.phase_range < an.PHASE_TOL


@settings(max_examples=25, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(0.02, 0.3), st.floats(0.8, 1.25))
def test_time_shift_invariance(shift, lag, ratio):
    a = sine_trace(1.0, ratio, 40.0, 0.01, lag=lag)
    b = sine_trace(1.0, ratio, 40.0, 0.01, shift=shift, lag=lag)
    sa = [detect_spikes(a, c, 0.0, 0.3) for c in "ab"]
    sb = [detect_spikes(b, c, 0.0, 0.3) for c in "ab"]
    for x, y in zip(sa, sb):
        np.testing.assert_allclose(y.times, x.times + shift, atol=1e-8)
    ra, rb = is_locked(*sa), is_locked(*sb)
    assert ra.f1 == pytest.approx(rb.f1, rel=1e-7) and ra.f2 == pytest.approx(rb.f2, rel=1e-7)
    np.testing.assert_allclose(ra.phase_diffs, rb.phase_diffs, atol=1e-6)
    assert ra.locked == rb.locked


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([0.001, 0.5, 2.0, 1000.0]), st.floats(0.8, 1.25), st.floats(0, 1))
def test_time_scale_covariance(scale, ratio, frac):
    r1, o1 = periodic(1.0, 30.0), periodic(ratio, 30.0, phase=frac)
    r2, o2 = SpikeTrain(r1.times * scale), SpikeTrain(o1.times * scale)
    a, b = is_locked(r1, o1), is_locked(r2, o2)
    assert b.f1 == pytest.approx(a.f1 / scale, rel=1e-9)
    assert b.f2 == pytest.approx(a.f2 / scale, rel=1e-9)
    np.testing.assert_allclose(b.phase_diffs, a.phase_diffs, atol=1e-9)
    assert a.locked == b.locked


def test_lock_onset_detects_tail():
    ref = periodic(1.0, 40)
    drifting = np.arange(0.05, 20.0, 0.73)
    other = SpikeTrain(np.concatenate([drifting, ref.times[20:] + 0.3]))
    assert lock_onset(ref, other) == pytest.approx(20.0)


def test_lock_onset_none_without_lock():
    ref = periodic(1.0, 30)
    assert lock_onset(ref, periodic(1.37, 30)) is None


def test_steady_window():
    assert an.steady_window(100.0, 200.0) == (120.0, 200.0)


# --- cycles ----------------------------------------------------------------------------


def wave(t_end):
    # upward zero crossings at t = 0, 1, 2, ...
    t = np.arange(-0.25, t_end, 0.01)
    return Columns(t, a=np.sin(2 * np.pi * t))


@pytest.mark.parametrize("t_end,n_spikes", [(1.5, 2), (2.2, 3), (6.5, 7)])
def test_cycle_counts(t_end, n_spikes):
    tr = wave(t_end)
    assert len(detect_spikes(tr, "a", 0.0, 0.3)) == n_spikes
    cycles = cycle_segment(tr, "a", 0.0, 0.3)
    assert len(cycles) == n_spikes - 1
    assert all(b > a for a, b in cycles)


def test_cycle_segment_needs_two_spikes():
    with pytest.raises(InsufficientSpikesError):
        cycle_segment(wave(0.9), "a", 0.0, 0.3)


def test_closure_gap_closed_vs_open():
    t = np.linspace(0, 1, 201)
    loop = Columns(t, x1=np.cos(2 * np.pi * t), x2=np.sin(2 * np.pi * t))
    assert cycle_closure_gap(loop, (0, 201)) < 1e-12
    ell = Columns(t, x1=np.minimum(t, 0.5), x2=np.maximum(t - 0.5, 0.0))
    assert cycle_closure_gap(ell, (0, 201)) > 0.5
