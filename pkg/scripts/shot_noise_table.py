"""Finite-shot estimates of the exchange and MCA subtotals at the zero-field ground state,
for several shot counts.

    python3 scripts/shot_noise_table.py [--shots 100 10000 1000000] [--repetitions 100]
"""
import argparse

from mcavqe.model import FieldSpec, ModelParams
from mcavqe.shots import shot_study
from mcavqe.solver import optimize_ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--shots", type=int, nargs="*", default=[100, 10_000, 1_000_000])
    ap.add_argument("--repetitions", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    params, field = ModelParams(), FieldSpec(0.0)
    angles = optimize_ground_state(params, field).best_params
    print(f"{'shots':>9} {'group':<9}{'exact':>14}{'mean':>14}{'sigma':>12}{'std':>12}{'in 3 sigma':>12}")
    for shots in args.shots:
        stats = shot_study(params, field, angles, shots, args.repetitions, args.seed)
        for s in stats.values():
            print(f"{shots:>9} {s.name:<9}{s.exact:>14.6f}{s.mean:>14.6f}{s.sigma:>12.3e}{s.spread:>12.3e}"
                  f"{s.fraction_within(s.exact):>12.0%}")


if __name__ == "__main__":
    main()
