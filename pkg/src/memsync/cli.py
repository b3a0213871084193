"""Command-line front end.

    memsync simulate-model   --config model.json   --out runs/model
    memsync simulate-circuit --config circuit.json --out runs/circuit
    memsync sweep            --config sweep.json   --out runs/sweep
    memsync iv-sweep         --config iv.json      --out runs/iv
    memsync analyze          --trace runs/model/trace.csv [--config model.json]

Exit codes: 0 success, 1 config error, 2 numerical divergence, 3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis as an
from .circuit import CircuitState, anode_spike_trains, gate_pulse_amplitudes, simulate_circuit
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dynamics import DivergenceError, StepFailure, Trace, simulate
from .export import (ExportError, export_cycles, export_events, export_spikes, export_summary,
                     export_sweep, export_trace, import_trace, write_csv, write_json)
from .memristor import iv_sweep, sweep_events, triangular_waveform
from .sweep import (CircuitRun, ModelRun, SweepSpec, circuit_sweep_values, locked_toward_faster,
                    locking_range, run_sweep)

log = logging.getLogger("memsync")

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGED, EXIT_IO = 0, 1, 2, 3

MODEL_THRESHOLD = 0.0
MODEL_REFRACTORY = 20.0


def _report(ref, other, window, analysis_block) -> dict:
    try:
        rep = an.is_locked(ref, other, window, analysis_block["freq_tol"], analysis_block["phase_tol"])
    except an.InsufficientSpikesError as exc:
        return {"window": list(window), "error": str(exc)}
    return {"window": list(window), **rep.as_dict()}


def _finish(out: Path, cfg: ExperimentConfig, results: dict, outputs: list) -> list:
    prefix = cfg.blocks["output"]["prefix"]
    cfg_path = write_json(out / f"{prefix}config.resolved.json", cfg.resolved())
    outputs = [*outputs, cfg_path]
    summary = export_summary(results, out / f"{prefix}summary.json", cfg.resolved(), outputs)
    return [*outputs, summary]


def run_model(cfg: ExperimentConfig, out: Path, fmt: str = "csv") -> dict:
    run = cfg.blocks["run"]
    ana = cfg.blocks["analysis"]
    prefix = cfg.blocks["output"]["prefix"]
    schedule = cfg.schedule()
    init = cfg.init_state()
    log.info("integrating model to t=%g with dt=%g", run["t_end"], run["dt"])
    trace = simulate(cfg.vdp_params(), schedule, init=init, t_end=run["t_end"], dt=run["dt"],
                     record_stride=run["record_stride"])
    thr = MODEL_THRESHOLD if ana["threshold"] is None else ana["threshold"]
    refr = MODEL_REFRACTORY if ana["refractory"] is None else ana["refractory"]
    s1 = an.detect_spikes(trace, "x1", thr, refr)
    s2 = an.detect_spikes(trace, "x2", thr, refr)
    t_s = min(schedule.t_s, run["t_end"])
    pre = an.steady_window(0.0, t_s, ana["transient"])
    post = an.steady_window(t_s, run["t_end"], ana["transient"])
    results = {
        "pre_switch": _report(s1, s2, pre, ana),
        "post_switch": _report(s1, s2, post, ana),
        "spike_counts": {"x1": len(s1), "x2": len(s2)},
    }
    picked = {}
    try:
        cycles = an.cycle_segment(trace, "x1", thr, refr)
    except an.InsufficientSpikesError:
        cycles = []
    gaps = []
    for c in cycles:
        t0 = trace.t[c[0]]
        gaps.append({"t_start": t0, "gap": an.cycle_closure_gap(trace, c)})
        if pre[0] <= t0 and trace.t[c[1] - 1] <= pre[1]:
            picked["pre"] = c  # keeps the last one in the window
        if post[0] <= t0 and "post" not in picked:
            picked["post"] = c
    results["cycle_gaps"] = gaps
    ext = "json" if fmt == "json" else "csv"
    outputs = [
        export_trace(trace, out / f"{prefix}trace.{ext}", fmt),
        export_spikes([s1, s2], out / f"{prefix}spikes.csv"),
        export_cycles(trace, picked, ("x1", "x2"), out / f"{prefix}cycles.csv"),
    ]
    _finish(out, cfg, results, outputs)
    return results


def run_circuit(cfg: ExperimentConfig, out: Path, fmt: str = "csv") -> dict:
    run = cfg.blocks["circuit_run"]
    ana = cfg.blocks["analysis"]
    prefix = cfg.blocks["output"]["prefix"]
    ccfg = cfg.circuit_config()
    log.info("simulating circuit to t=%g s with dt=%g s", run["t_end"], run["dt"])
    trace = simulate_circuit(ccfg, CircuitState(memristor=cfg.device()), t_end=run["t_end"],
                             dt=run["dt"], record_stride=run["record_stride"])
    s1, s2 = trace.fire_train(1), trace.fire_train(2)
    sets = trace.switch_times("SET")
    t_end = run["t_end"]
    results = {
        "uncoupled_prediction_hz": list(ccfg.uncoupled_frequencies()),
        "set_times": sets,
        "reset_times": trace.switch_times("RESET"),
        "lock_onset": an.lock_onset(s1, s2, ana["phase_tol"]),
    }
    if sets:
        t_set = sets[0]
        results["pre_set"] = _report(s1, s2, (0.0, t_set), ana)
        results["post_set"] = _report(s1, s2, an.steady_window(t_set, t_end, ana["transient"]), ana)
        amp_pre = np.concatenate([gate_pulse_amplitudes(trace, k, 0.0, t_set) for k in (1, 2)])
        amp_post = np.concatenate([gate_pulse_amplitudes(trace, k, t_set) for k in (1, 2)])
        results["gate_pulse_amplitude"] = {
            "pre_set_max": float(amp_pre.max()) if amp_pre.size else None,
            "post_set_max": float(amp_post.max()) if amp_post.size else None,
        }
    else:
        results["whole_run"] = _report(s1, s2, an.steady_window(0.0, t_end, ana["transient"]), ana)
    ext = "json" if fmt == "json" else "csv"
    outputs = [
        export_trace(trace, out / f"{prefix}circuit_trace.{ext}", fmt),
        export_events(trace.events, out / f"{prefix}events.csv"),
        export_spikes([s1, s2], out / f"{prefix}spikes.csv"),
    ]
    _finish(out, cfg, results, outputs)
    return results


def _coupling_value(v):
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    raise ConfigError(f"sweep.couplings: expected numbers or 'inf', got {v!r}")


def build_sweep_spec(cfg: ExperimentConfig) -> SweepSpec:
    sw = cfg.blocks["sweep"]
    ana = cfg.blocks["analysis"]
    common = dict(transient=ana["transient"], freq_tol=ana["freq_tol"], phase_tol=ana["phase_tol"],
                  workers=sw["workers"])
    overrides = {k: sw[k] for k in ("t_end", "dt", "record_stride") if sw[k] is not None}
    if sw["mode"] == "model":
        values = sw["values"]
        if values is None:
            values = np.linspace(sw["start"] if sw["start"] is not None else 2.0,
                                 sw["stop"] if sw["stop"] is not None else 8.0, sw["points"])
        couplings = [_coupling_value(c) for c in (sw["couplings"] or [0.01, 0.05, 0.1])]
        mr = ModelRun(**overrides)
        if ana["threshold"] is not None:
            mr = replace(mr, threshold=ana["threshold"])
        if ana["refractory"] is not None:
            mr = replace(mr, refractory=ana["refractory"])
        return SweepSpec(mode="model", swept_values=tuple(values), couplings=tuple(couplings),
                         model=cfg.vdp_params(), model_run=mr, **common)
    ccfg = cfg.circuit_config()
    if sw["f1_hz"] is not None:
        ccfg = ccfg.with_frequency(1, sw["f1_hz"])
    values = sw["values"]
    if values is None:
        lo, hi = sw["f_range_hz"]
        values = circuit_sweep_values(ccfg, lo, hi, sw["points"])
    couplings = [_coupling_value(c) for c in (sw["couplings"] or ["inf", 10e3, 1e3])]
    return SweepSpec(mode="circuit", swept_values=tuple(values), couplings=tuple(couplings),
                     circuit=ccfg, circuit_run=CircuitRun(**overrides), **common)


def run_sweep_cmd(cfg: ExperimentConfig, out: Path, fmt: str = "csv") -> dict:
    prefix = cfg.blocks["output"]["prefix"]
    try:
        spec = build_sweep_spec(cfg)
    except ValueError as exc:
        raise ConfigError(f"sweep: {exc}") from exc
    log.info("sweep: %d points x %d couplings (%s)", spec.sweep_points, len(spec.couplings), spec.mode)
    result = run_sweep(spec)
    ranges = {}
    for k, c in enumerate(spec.couplings):
        lr = locking_range(result, k)
        ranges[str(c)] = {"lo": lr.lo, "hi": lr.hi, "width": lr.width, "asymmetry": lr.asymmetry,
                          "toward_faster": locked_toward_faster(result.for_coupling(k))}
    results = {"f0": result.f0, "locking_ranges": ranges,
               "failures": [r.swept_value for r in result.rows if r.error]}
    outputs = [export_sweep(result, out / f"{prefix}sweep.csv")]
    _finish(out, cfg, results, outputs)
    return results


def run_iv(cfg: ExperimentConfig, out: Path, fmt: str = "csv") -> dict:
    prefix = cfg.blocks["output"]["prefix"]
    iv = cfg.blocks["iv"]
    wave = triangular_waveform(iv["v_max"], iv["v_min"], iv["step"], iv["dt"], iv["positive_only"])
    rows = iv_sweep(cfg.device(), wave)
    events = sweep_events(cfg.device(), wave)
    results = {"events": [{"segment": k, "v": wave[k][0], "kind": kind} for k, kind in events],
               "final_resistance": float(rows[-1, 2])}
    outputs = [write_csv(out / f"{prefix}iv.csv", ("v", "i", "r"), rows.tolist())]
    _finish(out, cfg, results, outputs)
    return results


def run_analyze(trace_path: Path, cfg: ExperimentConfig | None, out: Path) -> dict:
    trace = import_trace(trace_path)
    ana = (cfg.blocks.get("analysis") if cfg else None) or parse_config({"kind": "model-sim"}).blocks["analysis"]
    t = trace.t
    if len(t) < 2:
        raise ValueError(f"{trace_path}: trace has fewer than 2 samples")
    if isinstance(trace, Trace):
        thr = MODEL_THRESHOLD if ana["threshold"] is None else ana["threshold"]
        refr = MODEL_REFRACTORY if ana["refractory"] is None else ana["refractory"]
        s1 = an.detect_spikes(trace, "x1", thr, refr)
        s2 = an.detect_spikes(trace, "x2", thr, refr)
    else:
        s1, s2 = anode_spike_trains(trace, ana["threshold"],
                                    ana["refractory"] if ana["refractory"] is not None else 1e-4)
    window = an.steady_window(float(t[0]), float(t[-1]), ana["transient"])
    results = {"trace": trace_path.name, "steady": _report(s1, s2, window, ana),
               "spike_counts": {s1.source: len(s1), s2.source: len(s2)}}
    stem = trace_path.stem
    outputs = [export_spikes([s1, s2], out / f"{stem}.spikes.csv")]
    export_summary(results, out / f"{stem}.analysis.json", cfg.resolved() if cfg else None, outputs)
    return results


COMMANDS = {
    "simulate-model": ("model-sim", run_model),
    "simulate-circuit": ("circuit-sim", run_circuit),
    "sweep": ("detuning-sweep", run_sweep_cmd),
    "iv-sweep": ("iv-sweep", run_iv),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memsync", description=__doc__.split("\n", 1)[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*COMMANDS, "analyze"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, required=name != "analyze")
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--verbose", action="store_true")
        if name == "analyze":
            p.add_argument("--trace", type=Path, required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else None
        if args.command == "analyze":
            out = args.out or args.trace.parent
            run_analyze(args.trace, cfg, out)
            return EXIT_OK
        kind, fn = COMMANDS[args.command]
        if cfg.kind != kind:
            raise ConfigError(f"{args.config}: command {args.command!r} needs kind {kind!r}, got {cfg.kind!r}")
        out = args.out or Path(cfg.blocks["output"]["dir"] or "out")
        fn(cfg, out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, StepFailure) as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ExportError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
