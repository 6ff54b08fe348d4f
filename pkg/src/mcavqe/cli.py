"""Command-line front end.

    mcavqe sweep CONFIG [--seed N] [--threads N] [--output-dir DIR]
    mcavqe ground-state [--field T] [--alpha DEG] [--plane P] [--config CONFIG]
    mcavqe oracle-check [--perturbations N] [--seed N]
    mcavqe shot-demo [--shots N] [--repetitions N] [--seed N]

Exit codes: 0 ok, 1 oracle invariant breached, 2 bad config or arguments,
3 a sweep point did not converge.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigurationError, UsageError
from .model import FieldSpec, ModelParams, build_hamiltonian, energy_breakdown
from .oracle import GridSpec, analytic_saturation_field, dense_crosscheck, grid_minimize
from .runner import EXIT_BREACH, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_OK, run
from .shots import shot_study
from .solver import OptimizerConfig, optimize_ground_state

log = logging.getLogger("mcavqe")

ORACLE_FIELDS = (
    FieldSpec(0.0), FieldSpec(1.0, 0.0, "fixed_b"), FieldSpec(3.5, 0.0, "fixed_b"),
    FieldSpec(1.0, math.radians(45.0), "bc"), FieldSpec(150.0, 0.0, "fixed_b"),
)
ORACLE_TOL = 1e-5  # meV
DENSE_TOL = 1e-10


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = cfg.replace(optimizer=cfg.optimizer.replace(seed=args.seed))
    if args.output_dir is not None:
        cfg = cfg.replace(output_dir=Path(args.output_dir))
    return cfg


def cmd_sweep(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    t0 = time.perf_counter()
    status = run(cfg, workers=args.threads)
    log.info("sweep finished in %.1f s with status %d", time.perf_counter() - t0, status)
    return status


def format_breakdown(breakdown, title: str) -> str:
    rows = [("e_j1", breakdown.e_j1), ("e_j1p", breakdown.e_j1p), ("e_j2", breakdown.e_j2),
            ("e_j2p", breakdown.e_j2p), ("exchange", breakdown.exchange), ("e_zeeman", breakdown.e_zeeman),
            ("e_mca", breakdown.e_mca), ("total", breakdown.total)]
    width = max(len(k) for k, _ in rows)
    return "\n".join([title] + [f"  {k:<{width}}  {v:>+18.9f} meV" for k, v in rows])


def cmd_ground_state(args) -> int:
    params = load_config(args.config).model if args.config else ModelParams()
    optimizer = OptimizerConfig(seed=args.seed if args.seed is not None else 0)
    field = FieldSpec(args.field, math.radians(args.alpha), args.plane)
    t0 = time.perf_counter()
    result = optimize_ground_state(params, field, optimizer, verify=True)
    elapsed = time.perf_counter() - t0
    e = energy_breakdown(params, field, result.best_params)
    print(f"field {field.magnitude:g} T, alpha_H {args.alpha:g} deg, plane {field.plane}")
    print(format_breakdown(e, "4-site totals:"))
    print(format_breakdown(e.per_site(), "per site:"))
    a = result.best_params
    for n, (t, p) in enumerate(zip(a.theta, a.phi), start=1):
        print(f"  site {n}: theta {math.degrees(t):10.5f} deg  phi {math.degrees(p):10.5f} deg")
    print(f"converged {result.converged}  evals {result.evals_used}  best start {result.start_label}"
          f"  time {elapsed:.2f} s")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


COUPLINGS = ("j1", "j1p", "j2", "j2p", "ka", "kb", "kc")


def perturbed_params(base: ModelParams, rng, spread: float = 0.1) -> ModelParams:
    """Every exchange and anisotropy constant scaled by an independent factor in 1 +- spread."""
    scale = rng.uniform(1.0 - spread, 1.0 + spread, size=len(COUPLINGS))
    return base.replace(**{k: getattr(base, k) * f for k, f in zip(COUPLINGS, scale)})


def oracle_suite(perturbations: int, seed: int, fields=ORACLE_FIELDS, echo=print) -> bool:
    """Oracle agreement, dense cross-checks and saturation field; True when all hold."""
    ok = True
    rng = np.random.default_rng(seed)
    base = ModelParams()

    h2 = analytic_saturation_field(base)
    echo(f"analytic saturation field {h2.field:.4f} T (barrier {h2.has_barrier})")

    worst_dense = 0.0
    for _ in range(10):
        field = FieldSpec(float(rng.uniform(0, 400)), float(rng.uniform(0, 2 * math.pi)), "bc")
        worst_dense = max(worst_dense, dense_crosscheck(build_hamiltonian(base, field), 10, int(rng.integers(2**31))))
    good = worst_dense <= DENSE_TOL
    ok &= good
    echo(f"dense cross-check worst relative deviation {worst_dense:.3e}  {'ok' if good else 'BREACH'}")

    worst = 0.0
    for k in range(perturbations):
        params = perturbed_params(base, rng)
        for field in fields:
            gap = abs(grid_minimize(params, field, GridSpec()).best_energy
                      - optimize_ground_state(params, field).best_energy)
            worst = max(worst, gap)
            if gap > ORACLE_TOL:
                ok = False
                echo(f"  perturbation {k} field {field}: |grid - solver| = {gap:.3e} meV  BREACH")
    echo(f"oracle agreement over {perturbations} x {len(fields)}: worst {worst:.3e} meV  "
         f"{'ok' if worst <= ORACLE_TOL else 'BREACH'}")
    return ok


def cmd_oracle_check(args) -> int:
    return EXIT_OK if oracle_suite(args.perturbations, args.seed if args.seed is not None else 0) else EXIT_BREACH


def cmd_shot_demo(args) -> int:
    params = ModelParams()
    field = FieldSpec(0.0)
    result = optimize_ground_state(params, field, OptimizerConfig())
    seed = args.seed if args.seed is not None else 0
    stats = shot_study(params, field, result.best_params, args.shots, args.repetitions, seed)
    print(f"{args.shots} shots per term, {args.repetitions} repetitions, zero-field ground state")
    print(f"{'group':<10}{'exact':>16}{'mean est':>16}{'sigma':>14}{'std(est)':>14}{'|exact|/sigma':>16}")
    for s in stats.values():
        print(f"{s.name:<10}{s.exact:>16.8f}{s.mean:>16.8f}{s.sigma:>14.3e}{s.spread:>14.3e}"
              f"{s.signal_to_noise:>16.3g}")
    ex, mca = stats["exchange"], stats["mca"]
    print(f"exchange noise sigma / |MCA signal| = {ex.sigma / abs(mca.exact):.3g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcavqe", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the optimizer / sampling seed")
    common.add_argument("--threads", type=int, default=1, help="worker processes for cold-start sweeps")
    common.add_argument("--output-dir", default=None, help="override sweep.output_dir")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="run a configured field or angle sweep")
    p.add_argument("config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ground-state", parents=[common], help="optimize one field point")
    p.add_argument("--field", type=float, default=0.0, help="tesla")
    p.add_argument("--alpha", type=float, default=0.0, help="field angle from b toward c, degrees")
    p.add_argument("--plane", default="bc", choices=("bc", "fixed_b", "fixed_a", "fixed_c", "ac"))
    p.add_argument("--config", default=None, help="take [model] from this config")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("oracle-check", parents=[common], help="solver vs grid oracle, dense cross-checks")
    p.add_argument("--perturbations", type=int, default=20)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("shot-demo", parents=[common], help="finite-shot exchange vs MCA estimates")
    p.add_argument("--shots", type=int, default=10_000)
    p.add_argument("--repetitions", type=int, default=100)
    p.set_defaults(func=cmd_shot_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        log.error("--threads must be >= 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigurationError, UsageError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
