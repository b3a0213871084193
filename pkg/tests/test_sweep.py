import math

import numpy as np
import pytest

from memsync.analysis import FREQ_TOL
from memsync.circuit import CircuitConfig
from memsync.dynamics import VdpParams
from memsync.sweep import (CircuitRun, ModelRun, SweepResult, SweepRow, SweepSpec,
                           circuit_sweep_values, locked_toward_faster, locking_range,
                           measure_uncoupled, run_sweep)

# Frozen oracle: uncoupled frequency of oscillator 1 with the default run settings.
F0 = 0.0052776


def rows_by_coupling(result, m):
    return [r for r in result.rows if r.coupling == m]


def test_f0(model_sweep):
    assert model_sweep.f0 == pytest.approx(F0, rel=1e-4)


def test_rows_ordered_and_complete(model_sweep):
    spec = model_sweep.spec
    assert len(model_sweep.rows) == spec.sweep_points * len(spec.couplings)
    for k in range(len(spec.couplings)):
        vals = [r.swept_value for r in model_sweep.for_coupling(k)]
        assert vals == list(spec.swept_values)
    for r in model_sweep.rows:
        assert r.error is None
        assert all(math.isfinite(v) for v in (r.f1, r.f2, r.F1, r.F2))


def test_zero_coupling_identity(model_sweep):
    for r in rows_by_coupling(model_sweep, 0.0):
        assert r.delta_F_norm == r.delta_f_norm


def test_f1_fixed_f2_monotone(model_sweep):
    rows = rows_by_coupling(model_sweep, 0.0)
    f1 = np.array([r.f1 for r in rows])
    f2 = np.array([r.f2 for r in rows])
    assert np.all(f1 == f1[0])
    assert np.all(np.diff(f2) < 0)


def test_identical_oscillators_have_zero_mismatch():
    spec = SweepSpec(swept_values=(3.5, 4.0), couplings=(0.0,))
    f1, f2 = measure_uncoupled(spec, 3.5)
    assert f1 == pytest.approx(f2, rel=1e-5)


def locked_set(result, m):
    return {r.swept_value for r in rows_by_coupling(result, m) if r.locked}


def test_nestedness(model_sweep):
    grid = list(model_sweep.spec.swept_values)
    couplings = model_sweep.spec.couplings
    for small, large in zip(couplings, couplings[1:]):
        extra = locked_set(model_sweep, small) - locked_set(model_sweep, large)
        big = sorted(grid.index(v) for v in locked_set(model_sweep, large))
        for v in extra:
            # one grid point of slack at the plateau edges
            i = grid.index(v)
            assert big and (i == big[0] - 1 or i == big[-1] + 1)


def test_widths_increase(model_sweep):
    widths = [locking_range(model_sweep, k).width for k in (1, 2, 3)]
    assert widths[0] < widths[1] < widths[2]


def test_plateau_is_flat(model_sweep):
    for r in model_sweep.rows:
        if r.locked and r.coupling > 0:
            assert abs(r.delta_F_norm) < 2 * FREQ_TOL
            rel = abs(r.F1 - r.F2) / max(r.F1, r.F2)
            assert rel < FREQ_TOL


def test_lock_toward_faster(model_sweep):
    rows = rows_by_coupling(model_sweep, 0.05)
    assert locked_toward_faster(rows) >= 0.8
    assert locking_range(model_sweep, 2).asymmetry != 0.0


def test_locking_range_empty():
    spec = SweepSpec(swept_values=(1.0, 2.0), couplings=(0.1,))
    rows = [SweepRow(0.1, v, 1, 1, 0, 1, 1, 0, False) for v in (1.0, 2.0)]
    lr = locking_range(SweepResult(spec, 1.0, rows), 0)
    assert lr.empty and lr.width == 0.0 and lr.asymmetry == 0.0
    assert math.isnan(locked_toward_faster(rows))


def test_determinism():
    spec = SweepSpec(swept_values=(3.0, 4.0, 5.5), couplings=(0.05,),
                     model_run=ModelRun(t_end=1500.0))
    a, b = run_sweep(spec), run_sweep(spec)
    assert [r.as_tuple() for r in a.rows] == [r.as_tuple() for r in b.rows]


def test_parallel_matches_serial():
    spec = SweepSpec(swept_values=(3.0, 4.0, 5.5), couplings=(0.0, 0.05),
                     model_run=ModelRun(t_end=1500.0))
    serial = run_sweep(spec)
    par = run_sweep(SweepSpec(**{**spec.__dict__, "workers": 2}))
    assert [r.as_tuple() for r in serial.rows] == [r.as_tuple() for r in par.rows]


def test_failed_points_are_recorded():
    # too short a run for three spikes: every point fails but the sweep completes
    spec = SweepSpec(swept_values=(3.0, 4.0), couplings=(0.05,), model_run=ModelRun(t_end=100.0))
    res = run_sweep(spec)
    assert len(res.rows) == 2
    assert all(r.error and not r.locked and math.isnan(r.F1) for r in res.rows)


@pytest.mark.parametrize("kw", [dict(mode="spice"), dict(swept_values=(1.0,)), dict(couplings=()),
                                dict(couplings=(-0.1,)), dict(swept_values=(2.0, 1.0)),
                                dict(mode="circuit", couplings=(0.0,))])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        SweepSpec(**kw)


def test_circuit_sweep_values_hit_frequencies():
    cfg = CircuitConfig()
    values = circuit_sweep_values(cfg, 310.0, 640.0, 5)
    assert all(np.diff(values) > 0)
    from dataclasses import replace
    f2 = [replace(cfg, r2=v).uncoupled_frequencies()[1] for v in values]
    np.testing.assert_allclose(f2, np.linspace(640.0, 310.0, 5), rtol=1e-9)


def test_small_circuit_sweep():
    cfg = CircuitConfig()
    spec = SweepSpec(mode="circuit", swept_values=circuit_sweep_values(cfg, 380.0, 470.0, 2),
                     couplings=(math.inf, 1e3), circuit=cfg, circuit_run=CircuitRun(t_end=0.02))
    res = run_sweep(spec)
    open_rows, strong = res.for_coupling(0), res.for_coupling(1)
    assert res.f0 == pytest.approx(540.0, rel=0.01)
    assert not any(r.locked for r in open_rows)
    assert all(r.locked for r in strong)
    for r in open_rows:
        assert r.delta_F_norm == pytest.approx(r.delta_f_norm, abs=0.01)
