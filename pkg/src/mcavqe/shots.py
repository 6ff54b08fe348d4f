"""Finite-shot estimates of the exchange and anisotropy subtotals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ansatz import AnsatzParams, prepare_state
from .engine import WeightedPauliSum, expectation, sample_expectation, shot_sigma
from .model import FieldSpec, ModelParams, hamiltonian_groups

EXCHANGE_GROUPS = ("j1", "j1p", "j2", "j2p")


def subtotal_operators(params: ModelParams, field: FieldSpec) -> dict[str, WeightedPauliSum]:
    groups = hamiltonian_groups(params, field)
    exchange = WeightedPauliSum()
    for name in EXCHANGE_GROUPS:
        exchange = exchange + groups[name]
    return {"exchange": exchange, "zeeman": groups["zeeman"], "mca": groups["mca"]}


@dataclass(frozen=True)
class ShotStats:
    name: str
    exact: float
    sigma: float  # analytic binomial standard deviation of one estimate
    estimates: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.estimates.mean())

    @property
    def spread(self) -> float:
        return float(self.estimates.std(ddof=1)) if self.estimates.size > 1 else 0.0

    def fraction_within(self, center: float, k: float = 3.0) -> float:
        """Share of estimates with |estimate - center| < k sigma (sigma = 0: exact hits only)."""
        dev = np.abs(self.estimates - center)
        ok = dev <= 1e-12 if self.sigma == 0.0 else dev < k * self.sigma
        return float(np.mean(ok))

    @property
    def signal_to_noise(self) -> float:
        return abs(self.exact) / self.sigma if self.sigma > 0 else float("inf")


def shot_study(params: ModelParams, field: FieldSpec, angles: AnsatzParams, shots: int,
               repetitions: int, seed: int) -> dict[str, ShotStats]:
    """Repeat the shot-based estimate of each subtotal with seeds seed, seed+1, ..."""
    state = prepare_state(angles)
    out = {}
    for offset, (name, op) in enumerate(subtotal_operators(params, field).items()):
        est = np.array([
            sample_expectation(state, op, shots, seed + 1000 * offset + r) for r in range(repetitions)
        ])
        out[name] = ShotStats(name, expectation(state, op), shot_sigma(state, op, shots), est)
    return out
