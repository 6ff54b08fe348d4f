"""Solver vs grid-oracle agreement over random coupling perturbations (the oracle-check matrix).

    python3 scripts/oracle_matrix.py [--perturbations 20] [--seed 7]
"""
import argparse
import time

import numpy as np

from mcavqe.cli import ORACLE_FIELDS, perturbed_params
from mcavqe.model import ModelParams
from mcavqe.oracle import grid_minimize
from mcavqe.solver import optimize_ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--perturbations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    t0 = time.perf_counter()
    for k in range(args.perturbations):
        params = perturbed_params(ModelParams(), rng)
        gaps = []
        for field in ORACLE_FIELDS:
            gaps.append(abs(grid_minimize(params, field).best_energy
                            - optimize_ground_state(params, field).best_energy))
        worst = max(worst, max(gaps))
        print(f"{k:3d}  " + "  ".join(f"{g:.1e}" for g in gaps), flush=True)
    print(f"worst {worst:.3e} meV in {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
