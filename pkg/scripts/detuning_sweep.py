"""Detuning sweep at several coupling strengths (model or circuit).

Prints the locking interval of each coupling and writes ``sweep.csv``.
"""
import argparse
import time
from pathlib import Path

from memsync import cli
from memsync.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--mode", choices=("model", "circuit"), default="model")
    ap.add_argument("--points", type=int, default=41)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    sweep = {"mode": args.mode, "points": args.points, "workers": args.workers}
    if args.mode == "model":
        sweep["couplings"] = [0.0, 0.01, 0.05, 0.1]
    else:
        sweep.update(f1_hz=414.0, couplings=["inf", 10e3, 1e3])
    cfg = parse_config({"kind": "detuning-sweep", "sweep": sweep})
    out = args.out or Path(f"runs/sweep_{args.mode}")
    t0 = time.perf_counter()
    res = cli.run_sweep_cmd(cfg, out)
    print(f"f0 = {res['f0']:.6g}   ({time.perf_counter() - t0:.1f} s)")
    print(f"{'coupling':>10s} {'lo':>8s} {'hi':>8s} {'width':>8s} {'asym':>8s} {'->fast':>7s}")
    for c, r in res["locking_ranges"].items():
        print(f"{c:>10s} {r['lo']:8.3f} {r['hi']:8.3f} {r['width']:8.3f} {r['asymmetry']:8.3f} "
              f"{r['toward_faster']:7.2f}")
    if res["failures"]:
        print("failed points:", res["failures"])
    print(f"table in {out / 'sweep.csv'}")


if __name__ == "__main__":
    main()
