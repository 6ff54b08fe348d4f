"""Independent checks: exhaustive grid minimization, dense-matrix expectations,
and the closed-form saturation field.

Nothing here calls the Nelder-Mead solver or the fast scalar objective; grid
energies come from a vectorized pair decomposition written separately.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ansatz import N_SITES, AnsatzParams
from .engine import WeightedPauliSum, StateVector, expectation, pauli_matrix
from .errors import ConfigurationError
from .model import BONDS, MU_B, FieldSpec, ModelParams, classical_gradient
from .solver import OptimizationResult

DEFAULT_BUDGET = 5 * 10**8
DENSE_MAX_QUBITS = 12


@dataclass(frozen=True)
class GridSpec:
    theta_steps: int = 12
    phi_steps: int = 12
    refine_iters: int = 20
    refine_shrink: float = 0.5
    candidates: int = 16
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.theta_steps < 4 or self.phi_steps < 4:
            raise ConfigurationError("grid needs at least 4 steps per angle")
        if not 0.0 < self.refine_shrink < 1.0:
            raise ConfigurationError("refine_shrink must lie in (0, 1)")
        if self.refine_iters < 0 or self.candidates < 1:
            raise ConfigurationError("refine_iters >= 0 and candidates >= 1 required")


def _directions(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _pair_couplings(params: ModelParams) -> np.ndarray:
    """Symmetric 4x4 matrix C with E_exchange = sum_{i<j} C_ij m_i . m_j."""
    c = np.zeros((N_SITES, N_SITES))
    for name, i, j, pref in BONDS:
        c[i, j] += params.coupling(name) * params.s ** 2 * pref
    return c + c.T


def _site_energy(params: ModelParams, field: FieldSpec, m: np.ndarray) -> np.ndarray:
    zeeman = -params.g * MU_B * params.s * (m @ field.vector())
    return zeeman + m ** 2 @ np.array([-params.ka, -params.kb, params.kc])


def batch_energy(params: ModelParams, field: FieldSpec, angles: np.ndarray) -> np.ndarray:
    """Energies of many configurations; ``angles`` has shape (..., 8)."""
    m = _directions(angles[..., :N_SITES], angles[..., N_SITES:])  # (..., 4, 3)
    c = _pair_couplings(params)
    e = _site_energy(params, field, m).sum(axis=-1)
    for i, j in itertools.combinations(range(N_SITES), 2):
        if c[i, j]:
            e = e + c[i, j] * np.einsum("...k,...k->...", m[..., i, :], m[..., j, :])
    return e


def _coarse_grid(grid: GridSpec):
    thetas = np.arange(1, grid.theta_steps) * math.pi / grid.theta_steps
    phis = np.arange(grid.phi_steps) * 2 * math.pi / grid.phi_steps
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    theta = np.concatenate([[0.0], tt.ravel(), [math.pi]])
    phi = np.concatenate([[0.0], pp.ravel(), [0.0]])
    return theta, phi


def grid_minimize(params: ModelParams, field: FieldSpec, grid: GridSpec | None = None) -> OptimizationResult:
    """Exhaustive coarse grid over all four spins, then local grid refinement.

    When the field lies along b (or vanishes) the exchange and Zeeman energy
    is invariant under rotations about b, so site 1 is restricted to the ab
    great circle (both signs of a are kept).
    """
    grid = grid or GridSpec()
    theta, phi = _coarse_grid(grid)
    n = theta.size
    m = _directions(theta, phi)
    along_b = field.magnitude == 0.0 or np.allclose(field.direction(), (0.0, 1.0, 0.0))
    if along_b:
        first = np.nonzero(np.isclose(theta, math.pi / 2))[0]
        if first.size == 0:
            first = np.arange(n)
    else:
        first = np.arange(n)
    size = first.size * n ** 3
    if size > grid.budget:
        raise ConfigurationError(
            f"grid of {size:.3e} configurations ({first.size} x {n}^3) exceeds budget {grid.budget:.3e}"
        )

    c = _pair_couplings(params)
    u = _site_energy(params, field, m)
    dot = m @ m.T
    pair = lambda i, j: c[i, j] * dot  # noqa: E731
    # sites 2,3,4 for a fixed site 1: tensor over (b, c, d)
    base = (u[:, None, None] + u[None, :, None] + u[None, None, :]
            + pair(1, 2)[:, :, None] + pair(1, 3)[:, None, :] + pair(2, 3)[None, :, :])
    # one candidate per site-1 orientation keeps every branch (chain, flop, ...)
    # in play; coarse energies cannot resolve the canting that decides between them
    candidates = []
    for a in first:
        e = base + u[a] + (c[0, 1] * dot[a])[:, None, None] + (c[0, 2] * dot[a])[None, :, None] \
            + (c[0, 3] * dot[a])[None, None, :]
        idx = (a, *np.unravel_index(int(np.argmin(e)), e.shape))
        candidates.append(np.concatenate([theta[list(idx)], phi[list(idx)]]))

    evals = size
    polished = []
    for x0 in candidates:
        x, e, used = _newton_descent(params, field, x0)
        evals += used
        polished.append((e, x))
    polished.sort(key=lambda t: t[0])
    best_x, best_e = None, math.inf
    for _, x0 in polished[:grid.candidates]:
        x, e, used = _grid_rounds(params, field, x0, grid)
        evals += used
        if e < best_e:
            best_x, best_e = x, e
    return OptimizationResult(best_x, float(best_e), int(evals), True, "grid")


def _energy(params, field, x) -> float:
    return float(batch_energy(params, field, x[None, :])[0])


def _newton_descent(params, field, x0, max_iter: int = 200, fd_step: float = 1e-5):
    """Damped Newton with |eigenvalue| Hessian modification and backtracking.

    Stays inside the basin of its start point, which the coarse grid cannot
    resolve on its own.
    """
    x = x0.copy()
    fx = _energy(params, field, x)
    evals = 1
    grad = lambda y: classical_gradient(params, field, AnsatzParams.from_vector(y))  # noqa: E731
    eye = np.eye(x.size)
    for _ in range(max_iter):
        g = grad(x)
        if np.max(np.abs(g)) < 1e-12:
            break
        hess = np.array([(grad(x + fd_step * e) - grad(x - fd_step * e)) / (2 * fd_step) for e in eye])
        w, v = np.linalg.eigh(0.5 * (hess + hess.T))
        p = -v @ ((v.T @ g) / np.maximum(np.abs(w), 1e-6))
        norm = np.linalg.norm(p)
        if norm > 0.3:
            p *= 0.3 / norm
        slope = float(g @ p)
        t = 1.0
        while t > 1e-10:
            trial = x + t * p
            f_trial = _energy(params, field, trial)
            evals += 1
            if f_trial <= fx + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        if fx - f_trial <= 0.0:
            break
        x, fx = trial, f_trial
    return x, fx, evals


_OFFSETS = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=2 * N_SITES)))


def _grid_rounds(params, field, x0, grid: GridSpec, half_width: float = 1e-3):
    """``refine_iters`` rounds of a 3^8 local grid around the incumbent, shrinking each round."""
    x = x0.copy()
    fx = _energy(params, field, x)
    evals = 1
    width = half_width
    for _ in range(grid.refine_iters):
        trial = x + _OFFSETS * width
        e = batch_energy(params, field, trial)
        evals += e.size
        j = int(np.argmin(e))
        if e[j] < fx:
            x, fx = trial[j], float(e[j])
        width *= grid.refine_shrink
    return x, fx, evals


def dense_crosscheck(op: WeightedPauliSum, trials: int, seed: int) -> float:
    """Max relative deviation between dense-matrix and engine expectations on random states."""
    n = op.n_qubits
    if n is None:
        return 0.0
    if n > DENSE_MAX_QUBITS:
        raise ConfigurationError(f"dense cross-check limited to {DENSE_MAX_QUBITS} qubits, got {n}")
    matrix = sum(coef * pauli_matrix(p) for coef, p in op)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
        psi /= np.linalg.norm(psi)
        dense = np.vdot(psi, matrix @ psi).real
        engine = expectation(StateVector(psi.copy(), n), op)
        worst = max(worst, abs(dense - engine) / max(1.0, abs(dense)))
    return worst


class SaturationField(NamedTuple):
    field: float  # tesla
    has_barrier: bool


def analytic_saturation_field(params: ModelParams) -> SaturationField:
    """Field above which the fully b-polarized state is stable against a
    symmetric tilt of sites 1 and 3 (sites 2 and 4 held along b).

    Expanding the energy to second order in the tilt angle gives a stiffness
    proportional to g muB H s - 2 j2 s^2 - (j1 + j1') s^2 / 2, which vanishes at
    H2 = s (2 j2 + (j1 + j1') / 2) / (g muB).
    """
    h2 = params.s * (2.0 * params.j2 + 0.5 * (params.j1 + params.j1p)) / (params.g * MU_B)
    if h2 <= 1e-9 * max(1.0, abs(params.j2)) / MU_B:
        return SaturationField(0.0, False)
    return SaturationField(float(h2), True)

