"""Tied product ansatz: four spin sites, each mirrored onto an ancilla qubit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .engine import StateVector, apply_ry, apply_rz, init_state
from .errors import UsageError

N_SITES = 4
N_QUBITS = 2 * N_SITES


@dataclass(frozen=True)
class AnsatzParams:
    """Polar and azimuthal angles (radians) of sites 1-4.

    Ancilla ``n + 4`` always reuses the angles of site ``n``.
    """

    theta: tuple[float, ...]
    phi: tuple[float, ...]

    def __post_init__(self):
        theta = tuple(float(t) for t in self.theta)
        phi = tuple(float(p) for p in self.phi)
        if len(theta) != N_SITES or len(phi) != N_SITES:
            raise UsageError(f"expected {N_SITES} theta and phi angles")
        if not all(math.isfinite(v) for v in theta + phi):
            raise UsageError(f"non-finite ansatz angles {theta + phi}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_vector(cls, x: Sequence[float]) -> "AnsatzParams":
        x = [float(v) for v in x]
        if len(x) != 2 * N_SITES:
            raise UsageError(f"expected {2 * N_SITES} parameters, got {len(x)}")
        return cls(tuple(x[:N_SITES]), tuple(x[N_SITES:]))

    @classmethod
    def from_directions(cls, vectors) -> "AnsatzParams":
        """Angles pointing each site along the given (a, b, c) direction."""
        theta, phi = [], []
        for v in np.asarray(vectors, dtype=float):
            x, y, z = v / np.linalg.norm(v)
            theta.append(math.acos(max(-1.0, min(1.0, z))))
            phi.append(math.atan2(y, x))
        return cls(tuple(theta), tuple(phi))

    def as_vector(self) -> np.ndarray:
        return np.array(self.theta + self.phi)

    def canonical(self) -> "AnsatzParams":
        """Same spin directions with theta in [0, pi] and phi in (-pi, pi]."""
        theta, phi = [], []
        for t, p in zip(self.theta, self.phi):
            t = math.remainder(t, 2 * math.pi)
            if t < 0:
                t, p = -t, p + math.pi
            p = math.remainder(p, 2 * math.pi)
            if p <= -math.pi:
                p += 2 * math.pi
            theta.append(t)
            phi.append(p)
        return AnsatzParams(tuple(theta), tuple(phi))


def bloch_vectors(angles: AnsatzParams) -> np.ndarray:
    """(4, 3) array of unit vectors (sin t cos p, sin t sin p, cos t)."""
    t = np.asarray(angles.theta)
    p = np.asarray(angles.phi)
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=1)


def prepare_state(angles: AnsatzParams) -> StateVector:
    """8-qubit product state: RY(theta_n) then RZ(phi_n) on qubit n-1 and its ancilla n+3."""
    state = init_state(N_QUBITS)
    for n, (t, p) in enumerate(zip(angles.theta, angles.phi)):
        for q in (n, n + N_SITES):
            apply_ry(state, q, t)
            apply_rz(state, q, p)
    return state
