"""Shared, session-scoped simulation runs (the expensive ones are computed once)."""
import numpy as np
import pytest

from memsync.circuit import CircuitConfig, CircuitState, simulate_circuit
from memsync.dynamics import CouplingSchedule, VdpParams, simulate
from memsync.sweep import SweepSpec, run_sweep

# Two-phase model run: weak coupling then strong coupling from mid-run on.
MODEL_T_END = 6000.0
MODEL_T_S = 3000.0


@pytest.fixture(scope="session")
def two_phase_trace():
    sched = CouplingSchedule(m0=0.01, m1=0.1, t_s=MODEL_T_S)
    return simulate(VdpParams(), sched, t_end=MODEL_T_END, dt=1e-3, record_stride=10)


@pytest.fixture(scope="session")
def circuit_trace():
    return simulate_circuit(CircuitConfig(), CircuitState(), t_end=0.1, dt=0.5e-6)


@pytest.fixture(scope="session")
def uncoupled_circuit_trace():
    return simulate_circuit(CircuitConfig(coupled=False), CircuitState(), t_end=0.05, dt=0.5e-6)


@pytest.fixture(scope="session")
def model_sweep():
    """Default alpha2 grid at m = 0 plus the three detuning couplings."""
    spec = SweepSpec(mode="model", swept_values=tuple(np.linspace(2.0, 8.0, 41)),
                     couplings=(0.0, 0.01, 0.05, 0.1))
    return run_sweep(spec)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
