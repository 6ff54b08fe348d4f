"""Ground-state search: Nelder-Mead simplex with physical seeds and warm-started sweeps."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .ansatz import AnsatzParams, prepare_state
from .engine import expectation
from .errors import InvariantError, UsageError
from .model import FieldSpec, ModelParams, build_hamiltonian, energy_function

log = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class OptimizerConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    f_tol: float = 1e-12
    x_tol: float = 1e-8
    max_evals: int = 50_000
    n_restarts: int = 8
    seed: int = 0
    initial_step: float = 0.1
    # fresh-simplex restarts from a converged vertex, to escape NM stagnation
    polish_rounds: int = 2

    def __post_init__(self):
        if not (self.f_tol > 0 and self.x_tol > 0):
            raise UsageError("f_tol and x_tol must be positive")
        if self.max_evals < 1:
            raise UsageError("max_evals must be >= 1")
        if self.n_restarts < 0 or self.polish_rounds < 0:
            raise UsageError("restart counts must be >= 0")
        if not (self.reflection > 0 and self.expansion > max(1.0, self.reflection)
                and 0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise UsageError("simplex coefficients out of range")
        if self.initial_step <= 0:
            raise UsageError("initial_step must be positive")

    def replace(self, **changes) -> "OptimizerConfig":
        return replace(self, **changes)


@dataclass
class OptimizationResult:
    best_x: np.ndarray
    best_energy: float
    evals_used: int
    converged: bool
    start_label: str = ""

    @property
    def best_params(self) -> AnsatzParams:
        return AnsatzParams.from_vector(self.best_x).canonical()


class _BudgetSpent(Exception):
    pass


def _simplex_search(f, x0: np.ndarray, f0: float, step: np.ndarray, cfg: OptimizerConfig, budget: int):
    """One Nelder-Mead descent. Returns (x, fx, evals, converged); never exceeds ``budget`` calls."""
    k = x0.size
    calls = 0
    best = [f0, x0]

    def fb(x):
        nonlocal calls
        if calls >= budget:
            raise _BudgetSpent
        calls += 1
        v = f(x)
        if v < best[0]:
            best[0], best[1] = v, np.array(x)
        return v

    try:
        return _descend(fb, x0, f0, step, cfg, k)
    except _BudgetSpent:
        return best[1], best[0], calls, False


def _descend(f, x0, f0, step, cfg: OptimizerConfig, k: int):
    simplex = np.empty((k + 1, k))
    simplex[0] = x0
    fvals = np.empty(k + 1)
    fvals[0] = f0
    evals = 0
    for i in range(k):
        simplex[i + 1] = x0
        simplex[i + 1, i] += step[i]
        fvals[i + 1] = f(simplex[i + 1])
        evals += 1

    rho, chi, gamma, sigma = cfg.reflection, cfg.expansion, cfg.contraction, cfg.shrink
    total = simplex.sum(axis=0)
    iteration = 0
    while True:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if (fvals[-1] - fvals[0] <= cfg.f_tol
                and np.abs(simplex[1:] - simplex[0]).max() <= cfg.x_tol):
            return simplex[0], fvals[0], evals, True
        iteration += 1
        if iteration % 64 == 0:
            total = simplex.sum(axis=0)

        worst = simplex[-1].copy()
        centroid = (total - worst) / k
        xr = centroid + rho * (centroid - worst)
        fr = f(xr)
        evals += 1
        if fr < fvals[0]:
            xe = centroid + chi * (xr - centroid)
            fe = f(xe)
            evals += 1
            new, fnew = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fvals[-2]:
            new, fnew = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + gamma * (xr - centroid)
                fc = f(xc)
                evals += 1
                accept = fc <= fr
            else:
                xc = centroid + gamma * (worst - centroid)
                fc = f(xc)
                evals += 1
                accept = fc < fvals[-1]
            if not accept:
                simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
                for i in range(1, k + 1):
                    fvals[i] = f(simplex[i])
                evals += k
                total = simplex.sum(axis=0)
                continue
            new, fnew = xc, fc
        simplex[-1], fvals[-1] = new, fnew
        total += new - worst


def nelder_mead(objective: Callable[[np.ndarray], float], start: Sequence[float],
                config: OptimizerConfig | None = None, label: str = "") -> OptimizationResult:
    """Minimize ``objective`` from ``start``.

    Stops once the simplex spread is below ``f_tol`` in value and ``x_tol`` in
    every coordinate, or when ``max_evals`` is spent. A converged simplex is
    rebuilt around its best vertex up to ``polish_rounds`` times (step
    directions signed by the seeded generator); the search ends as soon as a
    rebuild yields no improvement beyond ``f_tol``.
    """
    cfg = config or OptimizerConfig()
    x0 = np.array(start, dtype=float).ravel()
    if x0.size < 1:
        raise UsageError("start point must have at least one coordinate")

    def f(x):
        v = objective(x)
        if not math.isfinite(v):
            raise FloatingPointError(f"objective returned {v!r} at x = {np.array2string(np.asarray(x), precision=17)}")
        return v

    rng = np.random.default_rng(cfg.seed)
    fx = f(x0)
    evals = 1
    step = np.full(x0.size, cfg.initial_step)
    x, converged = x0, False
    for round_ in range(cfg.polish_rounds + 1):
        budget = cfg.max_evals - evals
        if budget <= 0:
            converged = False
            break
        if round_:
            step = cfg.initial_step * 1e-2 * rng.choice((-1.0, 1.0), size=x.size)
        x_new, f_new, used, converged = _simplex_search(f, x, fx, step, cfg, budget)
        evals += used
        improved = fx - f_new > cfg.f_tol
        x, fx = x_new, f_new
        if not converged or (round_ and not improved):
            break
    return OptimizationResult(np.array(x), float(fx), evals, bool(converged), label)


def named_seeds(field: FieldSpec) -> dict[str, AnsatzParams]:
    """Physically motivated starts: easy-axis chains, flopped chains, field-aligned."""
    seeds = {
        "b_chain": AnsatzParams((HALF_PI,) * 4, (HALF_PI, HALF_PI, -HALF_PI, -HALF_PI)),
        "a_flop": AnsatzParams((HALF_PI,) * 4, (0.0, 0.0, math.pi, math.pi)),
    }
    direction = field.direction() if field.magnitude > 0 else np.array([0.0, 1.0, 0.0])
    seeds["field_aligned"] = AnsatzParams.from_directions([direction] * 4)
    return seeds


def random_seeds(count: int, seed: int) -> list[AnsatzParams]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        theta = np.arccos(rng.uniform(-1.0, 1.0, 4))
        phi = rng.uniform(-math.pi, math.pi, 4)
        out.append(AnsatzParams(tuple(theta), tuple(phi)))
    return out


def verify_with_statevector(params: ModelParams, field: FieldSpec, result: OptimizationResult) -> float:
    """Re-evaluate an optimum through the 8-qubit circuit; returns the circuit energy."""
    angles = AnsatzParams.from_vector(result.best_x)
    quantum = expectation(prepare_state(angles), build_hamiltonian(params, field))
    if abs(quantum - result.best_energy) > 1e-10 * max(1.0, abs(quantum)):
        raise InvariantError(
            f"statevector energy {quantum!r} disagrees with closed form {result.best_energy!r}"
        )
    return quantum


def optimize_ground_state(params: ModelParams, field: FieldSpec,
                          config: OptimizerConfig | None = None,
                          seeds: Sequence[AnsatzParams] | None = None,
                          verify: bool = False) -> OptimizationResult:
    cfg = config or OptimizerConfig()
    scalar_energy = energy_function(params, field)

    def energy(x):
        return scalar_energy(x.tolist())

    starts: list[tuple[str, AnsatzParams]] = list(named_seeds(field).items())
    starts += [(f"restart_{i}", a) for i, a in enumerate(random_seeds(cfg.n_restarts, cfg.seed))]
    starts += [(f"seed_{i}", a) for i, a in enumerate(seeds or ())]

    best, any_converged, total_evals = None, False, 0
    for label, start in starts:
        res = nelder_mead(energy, start.as_vector(), cfg, label)
        total_evals += res.evals_used
        any_converged |= res.converged
        if best is None or res.best_energy < best.best_energy:
            best = res
    best = OptimizationResult(best.best_x, best.best_energy, total_evals, any_converged, best.start_label)
    if not any_converged:
        log.warning("no start converged at %s", field)
    if verify:
        verify_with_statevector(params, field, best)
    return best


def warm_start_sweep(params: ModelParams, fields: Sequence[FieldSpec],
                     config: OptimizerConfig | None = None,
                     verify: bool = False) -> list[OptimizationResult]:
    """Sequential sweep; each point restarts from the previous optimum plus the named seeds."""
    cfg = config or OptimizerConfig()
    fields = list(fields)
    if not fields:
        raise UsageError("sweep needs at least one field point")
    results = [optimize_ground_state(params, fields[0], cfg, verify=verify)]
    warm_cfg = cfg.replace(n_restarts=0)
    for field in fields[1:]:
        prev = AnsatzParams.from_vector(results[-1].best_x)
        results.append(optimize_ground_state(params, field, warm_cfg, seeds=[prev], verify=verify))
    return results


def _cold_point(args):
    params, field, cfg, verify = args
    return optimize_ground_state(params, field, cfg, verify=verify)


def cold_start_sweep(params: ModelParams, fields: Sequence[FieldSpec],
                     config: OptimizerConfig | None = None,
                     workers: int = 1, verify: bool = False) -> list[OptimizationResult]:
    """Every point gets the full multi-start search; points are independent."""
    cfg = config or OptimizerConfig()
    fields = list(fields)
    if not fields:
        raise UsageError("sweep needs at least one field point")
    jobs = [(params, f, cfg, verify) for f in fields]
    if workers <= 1:
        return [_cold_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_cold_point, jobs))
