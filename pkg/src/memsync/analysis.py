"""Spike extraction, frequency and phase estimates, lock verdicts.

Works on anything that exposes ``.t`` and column access by name
(``trace["x1"]``), i.e. both model and circuit traces.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

FREQ_TOL = 0.005
PHASE_TOL = 0.2 * TWO_PI
TRANSIENT_FRACTION = 0.2


class InsufficientSpikesError(ValueError):
    pass


@dataclass
class SpikeTrain:
    times: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("spike times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    def within(self, window=None) -> np.ndarray:
        if window is None:
            return self.times
        lo, hi = window
        return self.times[(self.times >= lo) & (self.times <= hi)]

    def shifted(self, delta: float) -> "SpikeTrain":
        return SpikeTrain(self.times + delta, self.source)


@dataclass
class LockReport:
    f1: float
    f2: float
    delta_f_rel: float
    phase_diffs: np.ndarray = field(default_factory=lambda: np.empty(0))
    phase_range: float = float("nan")
    locked: bool = False

    def as_dict(self) -> dict:
        return {
            "f1": self.f1,
            "f2": self.f2,
            "delta_f_rel": self.delta_f_rel,
            "phase_diffs": [float(p) for p in self.phase_diffs],
            "phase_range": self.phase_range,
            "locked": bool(self.locked),
        }


def detect_spikes(trace, channel: str, threshold: float, refractory: float) -> SpikeTrain:
    """Upward threshold crossings of ``trace[channel]``, linearly interpolated.

    A crossing closer than ``refractory`` to the previously accepted one is
    dropped.
    """
    if not refractory > 0:
        raise ValueError("refractory must be positive")
    t = np.asarray(trace.t, dtype=float)
    x = np.asarray(trace[channel], dtype=float)
    if t.size < 2:
        return SpikeTrain(np.empty(0), channel)
    idx = np.flatnonzero((x[:-1] < threshold) & (x[1:] >= threshold))
    frac = (threshold - x[idx]) / (x[idx + 1] - x[idx])
    crossings = t[idx] + frac * (t[idx + 1] - t[idx])
    accepted = []
    last = -np.inf
    for tc in crossings:
        if tc - last >= refractory:
            accepted.append(tc)
            last = tc
    return SpikeTrain(np.array(accepted), channel)


def estimate_frequency(train: SpikeTrain, window=None) -> float:
    """Inverse of the median inter-spike interval inside ``window``."""
    times = train.within(window)
    if times.size < 3:
        raise InsufficientSpikesError(
            f"need >= 3 spikes to estimate a frequency, got {times.size} ({train.source or 'train'})"
        )
    return 1.0 / float(np.median(np.diff(times)))


def phase_difference(ref: SpikeTrain, other: SpikeTrain, window=None) -> np.ndarray:
    """Phase of ``other`` inside each period of ``ref``, in [0, 2pi).

    Periods of ``ref`` without an ``other`` spike are skipped.
    """
    r = ref.within(window)
    o = other.within(window)
    if r.size < 2 or o.size < 2:
        raise InsufficientSpikesError("phase_difference needs >= 2 spikes in each train")
    starts, stops = r[:-1], r[1:]
    first = np.searchsorted(o, starts, side="left")
    has = first < o.size
    has[has] &= o[first[has]] < stops[has]
    phases = TWO_PI * (o[first[has]] - starts[has]) / (stops[has] - starts[has])
    # guards the closed/open interval at float level
    return np.mod(phases, TWO_PI)


def unwrap_phases(phases: np.ndarray) -> np.ndarray:
    return np.unwrap(np.asarray(phases, dtype=float))


def is_locked(
    ref: SpikeTrain,
    other: SpikeTrain,
    window=None,
    freq_tol: float = FREQ_TOL,
    phase_tol: float = PHASE_TOL,
) -> LockReport:
    """Frequency and phase locking verdict for two spike trains."""
    f1 = estimate_frequency(ref, window)
    f2 = estimate_frequency(other, window)
    delta = abs(f1 - f2) / max(f1, f2)
    phases = phase_difference(ref, other, window)
    if phases.size:
        unwrapped = unwrap_phases(phases)
        prange = float(unwrapped.max() - unwrapped.min())
    else:
        prange = float("nan")
    locked = bool(delta < freq_tol and phases.size > 0 and prange < phase_tol)
    return LockReport(f1, f2, delta, phases, prange, locked)


def steady_window(t_start: float, t_stop: float, transient: float = TRANSIENT_FRACTION):
    """Window that skips the first ``transient`` fraction after a change."""
    return (t_start + transient * (t_stop - t_start), t_stop)


def lock_onset(
    ref: SpikeTrain,
    other: SpikeTrain,
    phase_tol: float = PHASE_TOL,
    min_cycles: int = 5,
):
    """Earliest ref-spike time from which every ref period holds exactly one
    ``other`` spike and the unwrapped phase stays within ``phase_tol``.

    Returns ``None`` if that never holds for at least ``min_cycles`` periods.
    """
    r, o = ref.times, other.times
    if r.size < min_cycles + 1:
        return None
    counts = np.searchsorted(o, r[1:], side="left") - np.searchsorted(o, r[:-1], side="left")
    phases = np.full(r.size - 1, np.nan)
    one = counts == 1
    first = np.searchsorted(o, r[:-1], side="left")
    phases[one] = TWO_PI * (o[first[one]] - r[:-1][one]) / np.diff(r)[one]
    # walk backwards while the tail stays one-to-one and phase-bounded
    start = None
    lo, hi = np.inf, -np.inf
    prev = None
    for k in range(r.size - 2, -1, -1):
        if not one[k]:
            break
        p = phases[k]
        if prev is not None:
            p = prev + (np.mod(p - prev + np.pi, TWO_PI) - np.pi)
        lo, hi = min(lo, p), max(hi, p)
        if hi - lo >= phase_tol:
            break
        prev = p
        start = k
    if start is None or (r.size - 1 - start) < min_cycles:
        return None
    return float(r[start])


def cycle_segment(trace, channel: str, threshold: float, refractory: float) -> list:
    """Sample index ranges ``(start, stop)`` between consecutive spikes.

    ``start`` is the first sample at or after a spike and ``stop`` is
    exclusive, so ``trace.data[start:stop]`` is one cycle.
    """
    train = detect_spikes(trace, channel, threshold, refractory)
    if len(train) < 2:
        raise InsufficientSpikesError("cycle_segment needs >= 2 spikes")
    idx = np.searchsorted(np.asarray(trace.t), train.times, side="left")
    return [(int(a), int(b) + 1) for a, b in zip(idx[:-1], idx[1:])]


def cycle_closure_gap(trace, cycle, channels=("x1", "x2")) -> float:
    """Endpoint gap of one cycle relative to its diameter in a 2-D projection."""
    a, b = cycle
    pts = np.column_stack([np.asarray(trace[c])[a:b] for c in channels])
    if pts.shape[0] < 2:
        return float("inf")
    gap = np.linalg.norm(pts[-1] - pts[0])
    span = pts.max(axis=0) - pts.min(axis=0)
    diameter = float(np.linalg.norm(span))
    if diameter == 0:
        return 0.0 if gap == 0 else float("inf")
    return float(gap / diameter)


def synthetic_pulse_trace(times, t_end: float, dt: float, width: float, amplitude: float = 1.0,
                          channel: str = "v"):
    """Rectangular pulses starting at ``times``, sampled on a uniform grid."""
    t = np.arange(int(round(t_end / dt)) + 1) * dt
    x = np.zeros_like(t)
    for t0 in np.asarray(times, dtype=float):
        x[(t >= t0) & (t < t0 + width)] = amplitude
    return _ColumnTrace(t, {channel: x})


class _ColumnTrace:
    def __init__(self, t, cols):
        self.t = t
        self._cols = cols

    def __getitem__(self, name):
        return self._cols[name]
