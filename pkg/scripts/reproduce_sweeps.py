"""Run every shipped sweep config and print the detected transition fields.

    python3 scripts/reproduce_sweeps.py [--only default high_field ...] [--output-dir results]
"""
import argparse
import json
import logging
import time
from pathlib import Path

from mcavqe.config import load_config
from mcavqe.runner import run

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--only", nargs="*", help="config stems to run (default: all)")
    ap.add_argument("--output-dir", default="results")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    for path in sorted(CONFIGS.glob("*.ini")):
        if args.only and path.stem not in args.only:
            continue
        cfg = load_config(path)
        cfg = cfg.replace(output_dir=Path(args.output_dir) / path.stem)
        t0 = time.perf_counter()
        status = run(cfg)
        report = json.loads((cfg.output_dir / f"{cfg.sweep.kind}_phases.json").read_text())
        print(f"{path.stem:<16} status {status}  h_flop {report['h_flop_T']}  h1 {report['h1_T']}  "
              f"h2 {report['h2_T']}  {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
