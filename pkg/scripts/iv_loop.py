"""Triangular I-V sweep of the memristive device; writes ``iv.csv``."""
import argparse
from pathlib import Path

from memsync import cli
from memsync.config import parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--i-cc", type=float, default=1e-3, help="compliance current (A)")
    ap.add_argument("--positive-only", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("runs/iv"))
    args = ap.parse_args()

    cfg = parse_config({"kind": "iv-sweep", "device": {"i_cc": args.i_cc},
                        "iv": {"positive_only": args.positive_only}})
    res = cli.run_iv(cfg, args.out)
    for e in res["events"]:
        print(f"{e['kind']:5s} at {e['v']:+.2f} V (segment {e['segment']})")
    print(f"final resistance {res['final_resistance']:.4g} Ohm; table in {args.out / 'iv.csv'}")


if __name__ == "__main__":
    main()
