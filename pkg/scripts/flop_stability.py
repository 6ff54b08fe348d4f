"""Where does the flopped state stop being the ground state as the field turns toward c?

For each field magnitude, scans alpha_H and prints the energy of the best
a-flopped optimum against the best optimum overall, plus the resulting torque.
The flopped branch has zero torque; once another branch wins, torque appears.

    python3 scripts/flop_stability.py [--fields 1.3 1.5 2.0] [--step 0.5]
"""
import argparse
import math

import numpy as np

from mcavqe.ansatz import AnsatzParams
from mcavqe.model import FieldSpec, ModelParams
from mcavqe.observables import magnetization, torque
from mcavqe.solver import OptimizerConfig, optimize_ground_state


def scan(params, magnitude, alphas, cfg):
    flop = AnsatzParams((math.pi / 2,) * 4, (0.0, 0.0, math.pi, math.pi))
    last_zero = None
    for a in alphas:
        field = FieldSpec(magnitude, math.radians(a))
        best = optimize_ground_state(params, field, cfg)
        tau = torque(magnetization(best, params, field)).tau_a
        if abs(tau) <= 1e-6:
            last_zero = a
        print(f"  H {magnitude:5.2f} T  alpha {a:6.2f} deg  E {best.best_energy:.9f}  tau {tau:+.3e}"
              f"  start {best.start_label}")
    return last_zero


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--fields", type=float, nargs="*", default=[1.3, 1.5, 2.0])
    ap.add_argument("--step", type=float, default=1.0)
    args = ap.parse_args()
    params = ModelParams()
    cfg = OptimizerConfig(n_restarts=4)
    for h in args.fields:
        last = scan(params, h, np.arange(0.0, 45.0 + 1e-9, args.step), cfg)
        rule = math.degrees(math.acos(min(1.0, 1.2 / h)))
        print(f"H = {h} T: |tau| <= 1e-6 up to {last} deg; arccos(1.2/H) = {rule:.2f} deg")


if __name__ == "__main__":
    main()
