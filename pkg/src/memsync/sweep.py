"""Detuning sweeps: hold oscillator 1, detune oscillator 2, and compare the
mismatch of the uncoupled pair against the coupled one at several coupling
strengths.

Model mode detunes ``alpha2`` and couples with constant ``m``. Circuit mode
detunes ``r2`` and couples through the RC network with the device forced
into LRS at a given ``r_k1``; ``r_k1 = inf`` leaves only the R_K2 path.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .analysis import (FREQ_TOL, PHASE_TOL, TRANSIENT_FRACTION, InsufficientSpikesError,
                       detect_spikes, estimate_frequency, is_locked, steady_window)
from .circuit import CircuitConfig, CircuitState, forced_lrs_state, simulate_circuit
from .dynamics import DivergenceError, OscPairState, VdpParams, simulate

SWEEP_COLUMNS = ("swept_value", "f1", "f2", "delta_f_norm", "F1", "F2", "delta_F_norm", "locked")

# r_k1 stand-in for an open memristor branch
OPEN_BRANCH = 1e15


@dataclass(frozen=True)
class ModelRun:
    """Integration and spike-detection settings for one model sweep point."""

    t_end: float = 6000.0
    dt: float = 1e-2
    record_stride: int = 5
    threshold: float = 0.0
    refractory: float = 20.0
    init: OscPairState = field(default_factory=OscPairState)


@dataclass(frozen=True)
class CircuitRun:
    t_end: float = 0.06
    dt: float = 0.5e-6
    record_stride: int = 20


@dataclass(frozen=True)
class SweepSpec:
    mode: str = "model"
    swept_values: tuple = tuple(np.linspace(2.0, 8.0, 41))
    couplings: tuple = (0.01, 0.05, 0.1)
    model: VdpParams = field(default_factory=VdpParams)
    circuit: CircuitConfig = field(default_factory=CircuitConfig)
    model_run: ModelRun = field(default_factory=ModelRun)
    circuit_run: CircuitRun = field(default_factory=CircuitRun)
    transient: float = TRANSIENT_FRACTION
    freq_tol: float = FREQ_TOL
    phase_tol: float = PHASE_TOL
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("model", "circuit"):
            raise ValueError(f"mode must be 'model' or 'circuit', got {self.mode!r}")
        object.__setattr__(self, "swept_values", tuple(float(v) for v in self.swept_values))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        if len(self.swept_values) < 2:
            raise ValueError("need at least 2 sweep points")
        if not self.couplings:
            raise ValueError("couplings must not be empty")
        if any(c < 0 for c in self.couplings):
            raise ValueError("couplings must be >= 0")
        if self.mode == "circuit" and any(c <= 0 for c in self.couplings):
            raise ValueError("circuit couplings are r_k1 values and must be > 0 (inf = open)")
        if np.any(np.diff(self.swept_values) <= 0):
            raise ValueError("swept_values must be strictly increasing")

    @property
    def sweep_points(self) -> int:
        return len(self.swept_values)


@dataclass
class SweepRow:
    coupling: float
    swept_value: float
    f1: float
    f2: float
    delta_f_norm: float
    F1: float
    F2: float
    delta_F_norm: float
    locked: bool
    error: Optional[str] = None

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


@dataclass
class SweepResult:
    spec: SweepSpec
    f0: float
    rows: list

    def for_coupling(self, index: int) -> list:
        c = self.spec.couplings[index]
        return [r for r in self.rows if r.coupling == c]


@dataclass(frozen=True)
class LockingRange:
    lo: float
    hi: float

    @property
    def empty(self) -> bool:
        return math.isnan(self.lo)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    @property
    def asymmetry(self) -> float:
        return 0.0 if self.empty else abs(self.hi) - abs(self.lo)


def _model_params(spec: SweepSpec, value: float) -> VdpParams:
    return replace(spec.model, alpha2=value)


def _circuit_setup(spec: SweepSpec, value: float, coupling: Optional[float]):
    cfg = replace(spec.circuit, r2=value)
    if coupling is None:
        return replace(cfg, coupled=False), CircuitState()
    if math.isinf(coupling):
        return replace(cfg, r_k1=OPEN_BRANCH), CircuitState()
    return replace(cfg, r_k1=coupling), forced_lrs_state()


def _trains(spec: SweepSpec, value: float, coupling: Optional[float]):
    """Spike trains of both oscillators and the analysis window."""
    if spec.mode == "model":
        run = spec.model_run
        tr = simulate(_model_params(spec, value), coupling or 0.0, init=run.init,
                      t_end=run.t_end, dt=run.dt, record_stride=run.record_stride)
        s1 = detect_spikes(tr, "x1", run.threshold, run.refractory)
        s2 = detect_spikes(tr, "x2", run.threshold, run.refractory)
        return s1, s2, steady_window(run.init.t, run.t_end, spec.transient)
    run = spec.circuit_run
    cfg, init = _circuit_setup(spec, value, coupling)
    tr = simulate_circuit(cfg, init, t_end=run.t_end, dt=run.dt, record_stride=run.record_stride)
    return tr.fire_train(1), tr.fire_train(2), steady_window(0.0, run.t_end, spec.transient)


def measure_uncoupled(spec: SweepSpec, value: float) -> tuple:
    """Frequencies ``(f1, f2)`` with the coupling switched off."""
    s1, s2, window = _trains(spec, value, None)
    return estimate_frequency(s1, window), estimate_frequency(s2, window)


def measure_coupled(spec: SweepSpec, value: float, coupling: float):
    s1, s2, window = _trains(spec, value, coupling)
    return is_locked(s1, s2, window, spec.freq_tol, spec.phase_tol)


def _uncoupled_task(args):
    spec, value = args
    try:
        return measure_uncoupled(spec, value), None
    except (InsufficientSpikesError, DivergenceError) as exc:
        return (math.nan, math.nan), f"{type(exc).__name__}: {exc}"


def _coupled_task(args):
    spec, value, coupling = args
    try:
        return measure_coupled(spec, value, coupling), None
    except (InsufficientSpikesError, DivergenceError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map(fn, tasks, workers: int):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order
        return list(pool.map(fn, tasks))


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Uncoupled and coupled frequencies at every (coupling, sweep point)."""
    values = spec.swept_values
    uncoupled = _map(_uncoupled_task, [(spec, v) for v in values], spec.workers)
    f0 = next((f[0] for f, err in uncoupled if err is None), math.nan)
    tasks = [(spec, v, c) for c in spec.couplings for v in values]
    coupled = _map(_coupled_task, tasks, spec.workers)

    rows = []
    for (_, value, c), (report, err) in zip(tasks, coupled):
        (f1, f2), u_err = uncoupled[values.index(value)]
        dfn = (f1 - f2) / f0
        if report is None or u_err is not None:
            rows.append(SweepRow(c, value, f1, f2, dfn, math.nan, math.nan, math.nan, False,
                                 err or u_err))
            continue
        rows.append(SweepRow(c, value, f1, f2, dfn, report.f1, report.f2,
                             (report.f1 - report.f2) / f0, report.locked))
    return SweepResult(spec, f0, rows)


def locking_range(result: SweepResult, coupling_index: int) -> LockingRange:
    locked = [r.delta_f_norm for r in result.for_coupling(coupling_index) if r.locked]
    if not locked:
        return LockingRange(math.nan, math.nan)
    return LockingRange(min(locked), max(locked))


def locked_toward_faster(rows: Sequence[SweepRow]) -> float:
    """Fraction of locked rows whose common frequency sits nearer max(f1, f2)."""
    locked = [r for r in rows if r.locked]
    if not locked:
        return math.nan
    hits = 0
    for r in locked:
        common = 0.5 * (r.F1 + r.F2)
        fast, slow = max(r.f1, r.f2), min(r.f1, r.f2)
        hits += abs(common - fast) < abs(common - slow)
    return hits / len(locked)


def circuit_sweep_values(config: CircuitConfig, f_lo: float, f_hi: float, points: int) -> tuple:
    """Increasing ``r2`` values that detune oscillator 2 across ``[f_lo, f_hi]`` Hz."""
    freqs = np.linspace(f_hi, f_lo, points)
    return tuple(config.with_frequency(2, f).r2 for f in freqs)
