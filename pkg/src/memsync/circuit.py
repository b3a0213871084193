"""Event-driven simulation of two PUT relaxation oscillators coupled through
an RC network that contains the memristive device.

Topology per oscillator: V_BB charges the anode capacitor C through R. The
gate sits on the R_B / R_G divider, modelled as its Thevenin source V0 with
resistance R_B || R_G. While the PUT conducts, the anode capacitor dumps
through ``put_r_on`` and the gate source is pulled to ``v_gate_on``.

Coupling loop (gate 1 to gate 2):

    G1 -- C_K1 -- [ (R_K1 + R_M) || R_K2 ] -- C_K2 -- G2

With R_M in HRS the loop resistance is essentially R_K2, which sets the
high-pass corner. A firing oscillator pulls its own gate low, the loop
current then drags the partner's gate (and its firing threshold) down.

Between events every node is linear with constant coefficients, so each
step uses the exact exponential update. PUT on/off events are located by
linear interpolation of the event function inside the step, and the step
is split there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .analysis import SpikeTrain
from .dynamics import DivergenceError
from .memristor import MemristorDevice, ResistanceState, apply_voltage, device_resistance

CIRCUIT_COLUMNS = ("t", "v_a1", "v_a2", "v_g1", "v_g2", "v_m", "r_m")

DEFAULT_F1 = 540.0
DEFAULT_F2 = 410.0
MEASURED_V01 = 2.66
MEASURED_V02 = 2.76


def gate_offset(v_bb: float, r_b: float, r_g: float) -> float:
    """Unloaded gate-divider voltage across R_G."""
    if not r_b + r_g > 0:
        raise ValueError("r_b + r_g must be positive")
    return v_bb * r_g / (r_g + r_b)


def cutoff_frequency(m_total: float, c_k1: float, c_k2: float) -> float:
    """High-pass corner of the coupling loop, series capacitances."""
    if not (m_total > 0 and c_k1 > 0 and c_k2 > 0):
        raise ValueError("cutoff_frequency needs positive inputs")
    c_series = c_k1 * c_k2 / (c_k1 + c_k2)
    return 1.0 / (2.0 * math.pi * m_total * c_series)


def charging_period(v_bb: float, v_valley: float, v_threshold: float, r: float, c: float) -> float:
    """RC charge time from ``v_valley`` to ``v_threshold`` toward ``v_bb``."""
    if not (v_bb > v_threshold >= v_valley >= 0):
        raise ValueError(
            f"need v_bb > v_threshold >= v_valley >= 0, got {v_bb}, {v_threshold}, {v_valley}"
        )
    return r * c * math.log((v_bb - v_valley) / (v_bb - v_threshold))


def rc_for_frequency(f: float, v_bb: float, v_valley: float, v_threshold: float) -> float:
    """The R*C product whose charging period is ``1/f``."""
    return 1.0 / (f * charging_period(v_bb, v_valley, v_threshold, 1.0, 1.0))


def _default_r(f: float, v0: float, c: float = 100e-9) -> float:
    return rc_for_frequency(f, 20.0, 0.7, v0 + 0.5) / c


@dataclass(frozen=True)
class CircuitConfig:
    v_bb: float = 20.0
    r1: float = field(default_factory=lambda: _default_r(DEFAULT_F1, MEASURED_V01))
    c1: float = 100e-9
    r2: float = field(default_factory=lambda: _default_r(DEFAULT_F2, MEASURED_V02))
    c2: float = 100e-9
    r_b1: float = 20.8e3
    r_b2: float = 40.5e3
    r_g1: float = 2.37e3
    r_g2: float = 2.37e3
    # additive gate calibration: measured V0 minus the ideal divider value
    gate_cal1: float = MEASURED_V01 - gate_offset(20.0, 20.8e3, 2.37e3)
    gate_cal2: float = MEASURED_V02 - gate_offset(20.0, 40.5e3, 2.37e3)
    r_k1: float = 1e3
    r_k2: float = 47e3
    c_k1: float = 33e-9
    c_k2: float = 33e-9
    put_offset: float = 0.5
    put_r_on: float = 50.0
    v_valley: float = 0.7
    v_gate_on: float = 0.0
    coupled: bool = True

    def __post_init__(self):
        positive = ("v_bb", "r1", "c1", "r2", "c2", "r_b1", "r_b2", "r_g1", "r_g2",
                    "r_k1", "r_k2", "c_k1", "c_k2", "put_r_on")
        for name in positive:
            value = getattr(self, name)
            if not (value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if not 0 <= self.v_valley < self.v_bb:
            raise ValueError("v_valley must lie in [0, v_bb)")

    @property
    def v01(self) -> float:
        return gate_offset(self.v_bb, self.r_b1, self.r_g1) + self.gate_cal1

    @property
    def v02(self) -> float:
        return gate_offset(self.v_bb, self.r_b2, self.r_g2) + self.gate_cal2

    @property
    def r_th1(self) -> float:
        return self.r_b1 * self.r_g1 / (self.r_b1 + self.r_g1)

    @property
    def r_th2(self) -> float:
        return self.r_b2 * self.r_g2 / (self.r_b2 + self.r_g2)

    @property
    def threshold1(self) -> float:
        return self.v01 + self.put_offset

    @property
    def threshold2(self) -> float:
        return self.v02 + self.put_offset

    def network_resistance(self, r_m: float) -> float:
        branch = self.r_k1 + r_m
        return branch * self.r_k2 / (branch + self.r_k2)

    def uncoupled_frequencies(self) -> tuple:
        p1 = charging_period(self.v_bb, self.v_valley, self.threshold1, self.r1, self.c1)
        p2 = charging_period(self.v_bb, self.v_valley, self.threshold2, self.r2, self.c2)
        return 1.0 / p1, 1.0 / p2

    def with_frequency(self, osc: int, f: float) -> "CircuitConfig":
        """Copy with ``r1`` or ``r2`` re-solved so that oscillator ``osc`` runs at ``f``."""
        if osc == 1:
            rc = rc_for_frequency(f, self.v_bb, self.v_valley, self.threshold1)
            return replace(self, r1=rc / self.c1)
        rc = rc_for_frequency(f, self.v_bb, self.v_valley, self.threshold2)
        return replace(self, r2=rc / self.c2)


@dataclass
class CircuitState:
    t: float = 0.0
    v_c1: float = 0.0
    v_c2: float = 0.0
    q_k1: float = 0.0
    q_k2: float = 0.0
    put1_on: bool = False
    put2_on: bool = False
    memristor: MemristorDevice = field(default_factory=MemristorDevice)


@dataclass(frozen=True)
class CircuitEvent:
    t: float
    kind: str  # "fire", "off", "SET", "RESET"
    osc: int = 0  # 1 or 2 for PUT events, 0 for device events


@dataclass
class CircuitTrace:
    dt_record: float
    data: np.ndarray
    events: list
    columns: tuple = CIRCUIT_COLUMNS
    final_state: Optional[CircuitState] = None

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    def fire_train(self, osc: int) -> SpikeTrain:
        times = [e.t for e in self.events if e.kind == "fire" and e.osc == osc]
        return SpikeTrain(np.array(times), f"put{osc}")

    def switch_times(self, kind: str = "SET") -> list:
        return [e.t for e in self.events if e.kind == kind]

    def pulse_windows(self, osc: int) -> list:
        """``(t_fire, t_off)`` for every completed conduction interval."""
        out, start = [], None
        for e in self.events:
            if e.osc != osc:
                continue
            if e.kind == "fire":
                start = e.t
            elif e.kind == "off" and start is not None:
                out.append((start, e.t))
                start = None
        return out


class _Net:
    """Frozen per-step coefficients; rebuilt whenever a switch state changes."""

    __slots__ = ("e1", "e2", "r_tot", "m_eff", "tau_k", "c_s", "r_m", "branch",
                 "a1", "vinf1", "a2", "vinf2", "coupled", "rth1", "rth2")

    def __init__(self, cfg: CircuitConfig, st: CircuitState):
        self.coupled = cfg.coupled
        self.rth1, self.rth2 = cfg.r_th1, cfg.r_th2
        self.e1 = cfg.v_gate_on if st.put1_on else cfg.v01
        self.e2 = cfg.v_gate_on if st.put2_on else cfg.v02
        self.r_m = device_resistance(st.memristor)
        self.branch = cfg.r_k1 + self.r_m
        self.m_eff = cfg.network_resistance(self.r_m)
        self.r_tot = self.rth1 + self.rth2 + self.m_eff
        self.c_s = cfg.c_k1 * cfg.c_k2 / (cfg.c_k1 + cfg.c_k2)
        self.tau_k = self.r_tot * self.c_s
        g1 = 1.0 / (cfg.r1 * cfg.c1)
        self.a1 = g1 + (1.0 / (cfg.put_r_on * cfg.c1) if st.put1_on else 0.0)
        self.vinf1 = cfg.v_bb * g1 / self.a1
        g2 = 1.0 / (cfg.r2 * cfg.c2)
        self.a2 = g2 + (1.0 / (cfg.put_r_on * cfg.c2) if st.put2_on else 0.0)
        self.vinf2 = cfg.v_bb * g2 / self.a2

    def current(self, u: float) -> float:
        if not self.coupled:
            return 0.0
        return (self.e1 - self.e2 - u) / self.r_tot

    def gates(self, u: float) -> tuple:
        i = self.current(u)
        return self.e1 - i * self.rth1, self.e2 + i * self.rth2

    def device_voltage(self, u: float) -> float:
        # same sign as V_G1 - V_G2 across the network
        i = self.current(u)
        return i * self.m_eff * self.r_m / self.branch

    def advance(self, v1: float, v2: float, u: float, h: float) -> tuple:
        v1 = self.vinf1 + (v1 - self.vinf1) * math.exp(-self.a1 * h)
        v2 = self.vinf2 + (v2 - self.vinf2) * math.exp(-self.a2 * h)
        if self.coupled:
            u_inf = self.e1 - self.e2
            u = u_inf + (u - u_inf) * math.exp(-h / self.tau_k)
        return v1, v2, u


def _event_values(net: _Net, cfg: CircuitConfig, st: CircuitState, v1, v2, u) -> tuple:
    # positive value means "event condition reached"
    g1, g2 = net.gates(u)
    f1 = (cfg.v_valley - v1) if st.put1_on else (v1 - (g1 + cfg.put_offset))
    f2 = (cfg.v_valley - v2) if st.put2_on else (v2 - (g2 + cfg.put_offset))
    return f1, f2


def simulate_circuit(
    config: CircuitConfig,
    init: CircuitState | None = None,
    t_end: float = 0.1,
    dt: float = 0.5e-6,
    record_stride: int = 1,
) -> CircuitTrace:
    """Run the two-oscillator circuit from ``init`` up to ``t_end`` seconds.

    The memristor inside ``init`` is copied, so the caller's state is not
    mutated.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    cfg = config
    st = replace(init) if init is not None else CircuitState()
    st.memristor = st.memristor.copy()
    if not t_end > st.t:
        raise ValueError("t_end must exceed the initial time")
    n_steps = int(round((t_end - st.t) / dt))
    t0 = st.t
    lo, hi = -cfg.v_bb, 2.0 * cfg.v_bb

    events: list = []
    rows = []
    dev = st.memristor
    u = st.q_k1 + st.q_k2
    c_s = cfg.c_k1 * cfg.c_k2 / (cfg.c_k1 + cfg.c_k2)
    net = _Net(cfg, st)

    def record(t):
        g1, g2 = net.gates(u)
        rows.append((t, st.v_c1, st.v_c2, g1, g2, net.device_voltage(u), net.r_m))

    def settle(t):
        # apply any event whose condition already holds at time t
        nonlocal net
        for _ in range(4):
            f1, f2 = _event_values(net, cfg, st, st.v_c1, st.v_c2, u)
            if f1 < 0 and f2 < 0:
                return
            if f1 >= 0:
                st.put1_on = not st.put1_on
                events.append(CircuitEvent(t, "fire" if st.put1_on else "off", 1))
            if f2 >= 0:
                st.put2_on = not st.put2_on
                events.append(CircuitEvent(t, "fire" if st.put2_on else "off", 2))
            net = _Net(cfg, st)

    settle(t0)
    for i in range(n_steps):
        t_step = t0 + i * dt
        if i % record_stride == 0:
            record(t_step)
        remaining = dt
        t_cur = t_step
        for k in range(16):
            f_start = _event_values(net, cfg, st, st.v_c1, st.v_c2, u)
            v_dev = net.device_voltage(u)
            v1n, v2n, un = net.advance(st.v_c1, st.v_c2, u, remaining)
            f_end = _event_values(net, cfg, st, v1n, v2n, un)
            theta = 1.0
            for fs, fe in zip(f_start, f_end):
                if fs < 0 <= fe and k < 15:
                    theta = min(theta, fs / (fs - fe))
            h = remaining * theta
            if theta < 1.0:
                v1n, v2n, un = net.advance(st.v_c1, st.v_c2, u, h)
            st.v_c1, st.v_c2 = v1n, v2n
            u = un
            t_cur += h
            remaining -= h
            if h > 0:
                ev = apply_voltage(dev, v_dev, h)
                if ev is not None:
                    events.append(CircuitEvent(t_cur, ev.kind, 0))
                    net = _Net(cfg, st)
            settle(t_cur)
            if remaining <= 1e-15 * dt or theta >= 1.0:
                break
        for v in (st.v_c1, st.v_c2, *net.gates(u)):
            if not (lo <= v <= hi):
                raise DivergenceError(t_cur, hi, detail="node voltage left [-v_bb, 2 v_bb]")
    st.t = t0 + n_steps * dt
    if n_steps % record_stride == 0:
        record(st.t)
    # split the series voltage by charge conservation
    st.q_k1 = u * c_s / cfg.c_k1
    st.q_k2 = u * c_s / cfg.c_k2
    data = np.array(rows, dtype=float).reshape(-1, len(CIRCUIT_COLUMNS))
    return CircuitTrace(dt * record_stride, data, events, final_state=st)


def gate_pulse_amplitudes(trace: CircuitTrace, osc: int, t_start: float = 0.0,
                          t_stop: float = math.inf) -> np.ndarray:
    """Peak ``|V_G1 - V_G2|`` inside each conduction interval of ``osc``.

    Only samples within ``[t_start, t_stop)`` count; intervals with no
    sample there are dropped.
    """
    t = trace.t
    diff = np.abs(trace["v_g1"] - trace["v_g2"])
    amps = []
    for a, b in trace.pulse_windows(osc):
        keep = (t >= max(a, t_start)) & (t <= b) & (t < t_stop)
        if np.any(keep):
            amps.append(diff[keep].max())
    return np.array(amps)


def forced_lrs_state(r_lrs: float | None = None, **device_kw) -> CircuitState:
    """Initial state with the device already in LRS (detuning measurements)."""
    dev = MemristorDevice(**device_kw)
    dev.state = ResistanceState.LRS
    if r_lrs is not None:
        dev.r_lrs = r_lrs
    return CircuitState(memristor=dev)


def anode_spike_trains(trace: CircuitTrace, level: float | None = None, refractory: float = 1e-4,
                       v_valley: float = 0.7):
    """Fire times recovered from sampled anode voltages alone.

    A fire is a downward crossing of ``level`` (default ``v_valley + 1 V``);
    useful when only a trace file, not the event log, is available.
    """
    from .analysis import _ColumnTrace, detect_spikes

    level = v_valley + 1.0 if level is None else level
    neg = _ColumnTrace(trace.t, {"a1": -trace["v_a1"], "a2": -trace["v_a2"]})
    s1 = detect_spikes(neg, "a1", -level, refractory)
    s2 = detect_spikes(neg, "a2", -level, refractory)
    return SpikeTrain(s1.times, "v_a1"), SpikeTrain(s2.times, "v_a2")
