"""Binary behavioral model of an Ag-doped TiO2-x memristive device.

The device sits in HRS (about 1 MOhm) or LRS. A SET needs the applied
voltage to stay at or above ``v_set`` for ``tau_dwell`` without interruption;
RESET mirrors this at or below ``v_reset``. The LRS value follows the
compliance law ``R_LRS = k_lrs / i_cc``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

# relative slack when comparing accumulated dwell against tau_dwell
_DWELL_RTOL = 1e-9


class ResistanceState(str, enum.Enum):
    HRS = "HRS"
    LRS = "LRS"


@dataclass(frozen=True)
class SwitchEvent:
    kind: str  # "SET" or "RESET"
    resistance: float


def lrs_from_compliance(i_cc: float, k_lrs: float = 0.5) -> float:
    if not i_cc > 0:
        raise ValueError(f"compliance current must be positive, got {i_cc!r}")
    return k_lrs / i_cc


@dataclass
class MemristorDevice:
    state: ResistanceState = ResistanceState.HRS
    r_hrs: float = 1e6
    r_lrs: Optional[float] = None
    v_set: float = 0.6
    v_reset: float = -0.3
    i_cc: float = 1e-3
    k_lrs: float = 0.5
    tau_dwell: float = 1e-6
    dwell_accum: float = 0.0

    def __post_init__(self):
        self.state = ResistanceState(self.state)
        if not self.v_set > 0 > self.v_reset:
            raise ValueError("thresholds must satisfy v_set > 0 > v_reset")
        if not self.r_hrs > 0:
            raise ValueError("r_hrs must be positive")
        if not self.tau_dwell > 0:
            raise ValueError("tau_dwell must be positive")
        if self.r_lrs is None:
            self.r_lrs = lrs_from_compliance(self.i_cc, self.k_lrs)
        if not self.r_hrs > self.r_lrs > 0:
            raise ValueError("need r_hrs > r_lrs > 0")

    @property
    def resistance(self) -> float:
        return device_resistance(self)

    def copy(self) -> "MemristorDevice":
        return MemristorDevice(**self.__dict__)


def device_resistance(dev: MemristorDevice) -> float:
    return dev.r_hrs if dev.state is ResistanceState.HRS else dev.r_lrs


def apply_voltage(dev: MemristorDevice, v: float, dt: float) -> Optional[SwitchEvent]:
    """Hold ``v`` across the device for ``dt`` seconds; return a switch event if one fires."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dev.state is ResistanceState.HRS:
        active = v >= dev.v_set
    else:
        active = v <= dev.v_reset
    if not active:
        dev.dwell_accum = 0.0
        return None
    dev.dwell_accum = min(dev.dwell_accum + dt, dev.tau_dwell)
    if dev.dwell_accum < dev.tau_dwell * (1.0 - _DWELL_RTOL):
        return None
    dev.dwell_accum = 0.0
    if dev.state is ResistanceState.HRS:
        dev.r_lrs = lrs_from_compliance(dev.i_cc, dev.k_lrs)
        dev.state = ResistanceState.LRS
        return SwitchEvent("SET", dev.r_lrs)
    dev.state = ResistanceState.HRS
    return SwitchEvent("RESET", dev.r_hrs)


def iv_sweep(dev: MemristorDevice, waveform: Iterable[tuple]) -> np.ndarray:
    """Drive ``dev`` through ``(v, dt)`` segments; rows of ``(v, i, R)``.

    Current is reported after the segment is applied and clamped to the
    compliance level.
    """
    rows = []
    for v, dt in waveform:
        apply_voltage(dev, v, dt)
        i = v / device_resistance(dev)
        i = max(-dev.i_cc, min(dev.i_cc, i))
        rows.append((v, i, device_resistance(dev)))
    if not rows:
        raise ValueError("waveform must not be empty")
    return np.array(rows, dtype=float)


def sweep_events(dev: MemristorDevice, waveform: Iterable[tuple]) -> list:
    """Switch events, as ``(segment_index, kind)``, produced along ``waveform``."""
    events = []
    for k, (v, dt) in enumerate(waveform):
        ev = apply_voltage(dev, v, dt)
        if ev is not None:
            events.append((k, ev.kind))
    return events


def triangular_waveform(v_max: float = 1.0, v_min: float = -1.0, step: float = 0.01,
                        dt: float = 1e-3, positive_only: bool = False) -> list:
    """0 -> v_max -> v_min -> 0 (or 0 -> v_max -> 0) as ``(v, dt)`` segments."""
    up = np.arange(0.0, v_max + step / 2, step)
    if positive_only:
        volts = np.concatenate([up, up[-2::-1]])
    else:
        down = np.arange(v_max - step, v_min - step / 2, -step)
        back = np.arange(v_min + step, step / 2, step)
        volts = np.concatenate([up, down, back, [0.0]])
    volts = np.round(volts / step) * step
    return [(float(v), dt) for v in volts]
