"""Two modified van der Pol oscillators with a switched mutual coupling.

Each oscillator obeys

    x'' = alpha (1 - x^2) x' + sign * beta * x (x - gamma)^2 / gamma^2 + m(t) (x_other - x)

The cubic term shapes the spike line; with ``cubic_sign = -1`` it acts as a
weak nonlinear restoring force and the pair relaxes into self-sustained
spiking. ``+1`` is kept as an option (it drifts away without spiking, see
``calibrate_cubic_sign``).

The coupling is a binary schedule, m0 before the switching time t_s and m1
after it (or the reverse), mimicking an HRS -> LRS memristor transition.

Integration is classical fixed-step RK4. A numba kernel handles the common
case of a ``CouplingSchedule``; callable coupling providers go through the
pure-Python ``rk4_step``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numba
import numpy as np


class DivergenceError(RuntimeError):
    """State magnitude exceeded the configured bound."""

    def __init__(self, t: float, bound: float, detail: str | None = None):
        detail = detail or f"state magnitude exceeded {bound:g}"
        super().__init__(f"{detail} at t = {t:g}")
        self.t = t
        self.bound = bound


class StepFailure(ArithmeticError):
    """An integration step produced a non-finite state."""


@dataclass(frozen=True)
class VdpParams:
    alpha1: float = 3.5
    alpha2: float = 4.8
    beta1: float = 0.1
    beta2: float = 0.1
    gamma1: float = 3.0
    gamma2: float = 3.0
    cubic_sign: int = -1

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "beta1", "beta2", "gamma1", "gamma2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.cubic_sign not in (1, -1):
            raise ValueError(f"cubic_sign must be +1 or -1, got {self.cubic_sign!r}")

    def swapped(self) -> "VdpParams":
        return replace(
            self,
            alpha1=self.alpha2, alpha2=self.alpha1,
            beta1=self.beta2, beta2=self.beta1,
            gamma1=self.gamma2, gamma2=self.gamma1,
        )


class Orientation(str, enum.Enum):
    WEAK_THEN_STRONG = "weak-then-strong"
    STRONG_THEN_WEAK = "strong-then-weak"


@dataclass(frozen=True)
class CouplingSchedule:
    """Heaviside coupling: ``m0`` before ``t_s``, ``m1`` from ``t_s`` on.

    ``Orientation.STRONG_THEN_WEAK`` reproduces the formula with the step
    arguments as literally printed (m1 first).
    """

    m0: float = 0.01
    m1: float = 0.1
    t_s: float = 500.0
    orientation: Orientation = Orientation.WEAK_THEN_STRONG

    def __post_init__(self):
        object.__setattr__(self, "orientation", Orientation(self.orientation))
        for name in ("m0", "m1", "t_s"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be >= 0, got {value!r}")

    @classmethod
    def constant(cls, m: float) -> "CouplingSchedule":
        return cls(m0=m, m1=m, t_s=0.0)

    @property
    def before(self) -> float:
        return self.m0 if self.orientation is Orientation.WEAK_THEN_STRONG else self.m1

    @property
    def after(self) -> float:
        return self.m1 if self.orientation is Orientation.WEAK_THEN_STRONG else self.m0


CouplingProvider = Callable[[float, "OscPairState"], float]


@dataclass(frozen=True)
class OscPairState:
    t: float = 0.0
    x1: float = 0.1
    v1: float = 0.0
    x2: float = 0.2
    v2: float = 0.0

    @classmethod
    def from_array(cls, t: float, y) -> "OscPairState":
        return cls(float(t), float(y[0]), float(y[1]), float(y[2]), float(y[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.v1, self.x2, self.v2], dtype=float)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.t, self.x1, self.v1, self.x2, self.v2))


TRACE_COLUMNS = ("t", "x1", "v1", "x2", "v2", "m")


@dataclass
class Trace:
    """Uniformly sampled trajectory; ``data`` has one row per sample."""

    dt_record: float
    data: np.ndarray = field(default_factory=lambda: np.empty((0, len(TRACE_COLUMNS))))
    columns: tuple = TRACE_COLUMNS

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def t(self) -> np.ndarray:
        return self["t"]

    @property
    def samples(self):
        return [tuple(row) for row in self.data]

    def window(self, t_start: float, t_stop: float) -> "Trace":
        t = self.t
        keep = (t >= t_start) & (t <= t_stop)
        return Trace(self.dt_record, self.data[keep], self.columns)


def coupling_at(schedule: CouplingSchedule, t: float) -> float:
    """Coupling strength in effect at time ``t`` (right-continuous at ``t_s``)."""
    return schedule.after if t >= schedule.t_s else schedule.before


def vdp_rhs(state: OscPairState, params: VdpParams, m: float) -> np.ndarray:
    """Time derivative ``(x1', v1', x2', v2')`` of the coupled pair."""
    assert state.is_finite(), "non-finite state passed to vdp_rhs"
    x1, v1, x2, v2 = state.x1, state.v1, state.x2, state.v2
    s = params.cubic_sign
    g1, g2 = params.gamma1, params.gamma2
    a1 = params.alpha1 * (1.0 - x1 * x1) * v1 + s * params.beta1 * x1 * (x1 - g1) ** 2 / (g1 * g1)
    a2 = params.alpha2 * (1.0 - x2 * x2) * v2 + s * params.beta2 * x2 * (x2 - g2) ** 2 / (g2 * g2)
    c = m * (x2 - x1)
    return np.array([v1, a1 + c, v2, a2 - c])


def rk4_step(rhs: Callable[[OscPairState], np.ndarray], state: OscPairState, dt: float) -> OscPairState:
    """One classical Runge-Kutta step; ``rhs`` maps a state to its derivative."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = state.as_array()
    t = state.t
    k1 = rhs(state)
    k2 = rhs(OscPairState.from_array(t + 0.5 * dt, y + 0.5 * dt * k1))
    k3 = rhs(OscPairState.from_array(t + 0.5 * dt, y + 0.5 * dt * k2))
    k4 = rhs(OscPairState.from_array(t + dt, y + dt * k3))
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise StepFailure(f"non-finite state after step at t = {t:g}")
    return OscPairState.from_array(t + dt, y_new)


@numba.njit(cache=True)
def _accel(x, v, alpha, beta, gamma, sign):
    return alpha * (1.0 - x * x) * v + sign * beta * x * (x - gamma) ** 2 / (gamma * gamma)


@numba.njit(cache=True)
def _schedule_kernel(y0, t0, n_steps, dt, stride, p, m_before, m_after, t_s, bound):
    # p = (alpha1, alpha2, beta1, beta2, gamma1, gamma2, sign)
    n_rec = n_steps // stride + 1
    out = np.empty((n_rec, 6))
    x1, v1, x2, v2 = y0[0], y0[1], y0[2], y0[3]
    a1, a2, b1, b2, g1, g2, s = p[0], p[1], p[2], p[3], p[4], p[5], p[6]
    h = 0.5 * dt
    rec = 0
    for i in range(n_steps + 1):
        t = t0 + i * dt
        m = m_after if t >= t_s else m_before
        if i % stride == 0:
            out[rec, 0] = t
            out[rec, 1] = x1
            out[rec, 2] = v1
            out[rec, 3] = x2
            out[rec, 4] = v2
            out[rec, 5] = m
            rec += 1
        if i == n_steps:
            break
        k1x1 = v1
        k1v1 = _accel(x1, v1, a1, b1, g1, s) + m * (x2 - x1)
        k1x2 = v2
        k1v2 = _accel(x2, v2, a2, b2, g2, s) - m * (x2 - x1)
        y1, w1, y2, w2 = x1 + h * k1x1, v1 + h * k1v1, x2 + h * k1x2, v2 + h * k1v2
        k2x1 = w1
        k2v1 = _accel(y1, w1, a1, b1, g1, s) + m * (y2 - y1)
        k2x2 = w2
        k2v2 = _accel(y2, w2, a2, b2, g2, s) - m * (y2 - y1)
        y1, w1, y2, w2 = x1 + h * k2x1, v1 + h * k2v1, x2 + h * k2x2, v2 + h * k2v2
        k3x1 = w1
        k3v1 = _accel(y1, w1, a1, b1, g1, s) + m * (y2 - y1)
        k3x2 = w2
        k3v2 = _accel(y2, w2, a2, b2, g2, s) - m * (y2 - y1)
        y1, w1, y2, w2 = x1 + dt * k3x1, v1 + dt * k3v1, x2 + dt * k3x2, v2 + dt * k3v2
        k4x1 = w1
        k4v1 = _accel(y1, w1, a1, b1, g1, s) + m * (y2 - y1)
        k4x2 = w2
        k4v2 = _accel(y2, w2, a2, b2, g2, s) - m * (y2 - y1)
        c = dt / 6.0
        x1 = x1 + c * (k1x1 + 2.0 * k2x1 + 2.0 * k3x1 + k4x1)
        v1 = v1 + c * (k1v1 + 2.0 * k2v1 + 2.0 * k3v1 + k4v1)
        x2 = x2 + c * (k1x2 + 2.0 * k2x2 + 2.0 * k3x2 + k4x2)
        v2 = v2 + c * (k1v2 + 2.0 * k2v2 + 2.0 * k3v2 + k4v2)
        if not (abs(x1) <= bound and abs(v1) <= bound and abs(x2) <= bound and abs(v2) <= bound):
            # NaN also lands here
            return out[:rec], t + dt
    return out[:rec], -1.0


def _param_vector(params: VdpParams) -> np.ndarray:
    return np.array([
        params.alpha1, params.alpha2, params.beta1, params.beta2,
        params.gamma1, params.gamma2, float(params.cubic_sign),
    ])


def simulate(
    params: VdpParams,
    coupling: Union[CouplingSchedule, CouplingProvider, float],
    init: OscPairState | None = None,
    t_end: float = 1000.0,
    dt: float = 1e-3,
    record_stride: int = 1,
    bound: float = 1e6,
) -> Trace:
    """Integrate the pair from ``init`` to ``t_end`` with fixed step ``dt``.

    ``coupling`` is a schedule, a constant, or a callable ``(t, state) -> m``
    evaluated at the start of every step. Each recorded row carries the
    coupling value used for the step that starts there.
    """
    if init is None:
        init = OscPairState()
    if not t_end > init.t:
        raise ValueError("t_end must exceed the initial time")
    if not dt > 0:
        raise ValueError("dt must be positive")
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if isinstance(coupling, (int, float)):
        coupling = CouplingSchedule.constant(float(coupling))

    n_steps = int(round((t_end - init.t) / dt))
    if isinstance(coupling, CouplingSchedule):
        data, t_fail = _schedule_kernel(
            init.as_array(), init.t, n_steps, dt, record_stride, _param_vector(params),
            coupling.before, coupling.after, coupling.t_s, bound,
        )
        if t_fail >= 0:
            raise DivergenceError(t_fail, bound)
        return Trace(dt * record_stride, data)

    rows = []
    state = init
    for i in range(n_steps + 1):
        m = float(coupling(state.t, state))
        if m < 0:
            raise ValueError(f"coupling provider returned negative m = {m} at t = {state.t}")
        if i % record_stride == 0:
            rows.append((state.t, state.x1, state.v1, state.x2, state.v2, m))
        if i == n_steps:
            break
        state = rk4_step(lambda s: vdp_rhs(s, params, m), state, dt)
        # fixed-grid time, avoids accumulated round-off in t
        state = replace(state, t=init.t + (i + 1) * dt)
        if not all(abs(v) <= bound for v in (state.x1, state.v1, state.x2, state.v2)):
            raise DivergenceError(state.t, bound)
    return Trace(dt * record_stride, np.array(rows, dtype=float).reshape(-1, 6))


def calibrate_cubic_sign(
    params: VdpParams | None = None,
    t_end: float = 3000.0,
    dt: float = 1e-2,
    min_spikes: int = 5,
) -> dict:
    """Run both cubic-term signs uncoupled and report which ones spike.

    Returns ``{sign: (spikes1, spikes2, diverged)}`` plus ``"chosen"``: the
    unique sign for which both oscillators keep spiking, else ``None``.
    """
    from .analysis import detect_spikes

    params = params or VdpParams()
    report: dict = {}
    spiking = []
    for sign in (-1, 1):
        p = replace(params, cubic_sign=sign)
        try:
            tr = simulate(p, 0.0, t_end=t_end, dt=dt, record_stride=10)
            diverged = False
        except DivergenceError:
            report[sign] = (0, 0, True)
            continue
        late = tr.window(0.2 * t_end, t_end)
        n1 = len(detect_spikes(late, "x1", threshold=0.0, refractory=1.0))
        n2 = len(detect_spikes(late, "x2", threshold=0.0, refractory=1.0))
        report[sign] = (n1, n2, diverged)
        if n1 >= min_spikes and n2 >= min_spikes:
            spiking.append(sign)
    report["chosen"] = spiking[0] if len(spiking) == 1 else None
    return report
