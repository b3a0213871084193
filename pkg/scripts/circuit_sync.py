"""Circuit run with the memristive device in the coupling loop.

Reports the uncoupled prediction, the SET time, lock onset, the post-SET
lock report and gate-pulse amplitudes; CSVs go to ``--out``.
"""
import argparse
from pathlib import Path

from memsync import cli
from memsync.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("runs/circuit_sync"))
    ap.add_argument("--t-end", type=float, default=0.1, help="simulated seconds")
    ap.add_argument("--dt", type=float, default=0.5e-6)
    ap.add_argument("--stride", type=int, default=4)
    args = ap.parse_args()

    cfg = parse_config({"kind": "circuit-sim",
                        "circuit_run": {"t_end": args.t_end, "dt": args.dt, "record_stride": args.stride}})
    res = cli.run_circuit(cfg, args.out)
    f1, f2 = res["uncoupled_prediction_hz"]
    print(f"uncoupled prediction: f1={f1:.1f} Hz, f2={f2:.1f} Hz")
    print(f"SET events at {[round(t * 1e3, 4) for t in res['set_times']]} ms, "
          f"RESET events at {[round(t * 1e3, 4) for t in res['reset_times']]} ms")
    onset = res["lock_onset"]
    print("lock onset:", "none" if onset is None else f"{onset * 1e3:.2f} ms")
    if "post_set" in res:
        r = res["post_set"]
        print(f"post-SET: f1={r['f1']:.2f} Hz f2={r['f2']:.2f} Hz locked={r['locked']}")
        a = res["gate_pulse_amplitude"]
        print(f"gate pulse amplitude: {a['pre_set_max']:.2f} V before SET, {a['post_set_max']:.2f} V after")
    print(f"outputs in {args.out}")


if __name__ == "__main__":
    main()
