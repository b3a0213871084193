"""Memristively coupled van der Pol oscillators: model, circuit and analysis."""

from .analysis import (LockReport, SpikeTrain, cycle_segment, detect_spikes, estimate_frequency,
                       is_locked, phase_difference)
from .circuit import (CircuitConfig, CircuitState, CircuitTrace, charging_period, cutoff_frequency,
                      gate_offset, simulate_circuit)
from .dynamics import (CouplingSchedule, DivergenceError, OscPairState, Orientation, StepFailure,
                       Trace, VdpParams, coupling_at, rk4_step, simulate, vdp_rhs)
from .memristor import (MemristorDevice, ResistanceState, SwitchEvent, apply_voltage,
                        device_resistance, iv_sweep, lrs_from_compliance)
from .sweep import SweepResult, SweepSpec, locking_range, measure_uncoupled, run_sweep

__version__ = "0.1.0"
