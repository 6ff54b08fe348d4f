"""Four-site CuSb2O6 cluster: Pauli Hamiltonian and its closed-form classical twin.

Sites 1-4 live on qubits 0-3; their MCA ancillas on qubits 4-7. Pauli X, Y, Z
map to the crystal axes a, b, c. Energies are in meV, fields in tesla.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .ansatz import N_QUBITS, N_SITES, AnsatzParams, bloch_vectors
from .engine import PauliString, WeightedPauliSum
from .errors import UsageError

MU_B = 0.05788381806  # meV / T

# (coupling name, site i, site j, prefactor on J s^2); NN sums carry an extra 1/2
BONDS = (
    ("j1", 0, 1, 0.5),
    ("j1", 2, 3, 0.5),
    ("j1p", 1, 2, 0.5),
    ("j1p", 3, 0, 0.5),
    ("j2", 0, 2, 1.0),
    ("j2p", 1, 3, 1.0),
)
GROUPS = ("j1", "j1p", "j2", "j2p", "zeeman", "mca")
FIELD_PLANES = ("bc", "fixed_b", "fixed_a", "fixed_c", "ac")


@dataclass(frozen=True)
class ModelParams:
    j1: float = -104.30
    j1p: float = -103.13
    j2: float = 87.18
    j2p: float = 64.87
    ka: float = 0.000012
    kb: float = 0.00023
    kc: float = 0.00010
    g: float = 2.0
    s: float = 0.5
    twin_fraction: float = 0.8

    def __post_init__(self):
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise UsageError(f"{f.name} must be finite")
        if self.s <= 0 or self.g <= 0:
            raise UsageError("g and s must be positive")
        if min(self.ka, self.kb, self.kc) < 0:
            raise UsageError("anisotropy constants must be >= 0")
        if not 0.0 <= self.twin_fraction <= 1.0:
            raise UsageError(f"twin_fraction {self.twin_fraction} outside [0, 1]")

    def coupling(self, name: str) -> float:
        return getattr(self, name)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


def _snap(x: float) -> float:
    return 0.0 if abs(x) < 1e-14 else x


@dataclass(frozen=True)
class FieldSpec:
    """Applied field.

    ``plane="bc"`` rotates the field from b (alpha_h = 0) toward c (pi/2).
    ``plane="ac"`` rotates it from a toward c; it describes the lab field as
    seen by the minority twin.
    """

    magnitude: float = 0.0
    alpha_h: float = 0.0
    plane: str = "bc"

    def __post_init__(self):
        if not (math.isfinite(self.magnitude) and self.magnitude >= 0):
            raise UsageError(f"field magnitude must be finite and >= 0, got {self.magnitude}")
        if not math.isfinite(self.alpha_h):
            raise UsageError("alpha_h must be finite")
        if self.plane not in FIELD_PLANES:
            raise UsageError(f"unknown field plane {self.plane!r}")

    def direction(self) -> np.ndarray:
        """Unit vector (a, b, c) of the field."""
        ca, sa = _snap(math.cos(self.alpha_h)), _snap(math.sin(self.alpha_h))
        return np.array({
            "bc": (0.0, ca, sa),
            "ac": (ca, 0.0, sa),
            "fixed_a": (1.0, 0.0, 0.0),
            "fixed_b": (0.0, 1.0, 0.0),
            "fixed_c": (0.0, 0.0, 1.0),
        }[self.plane])

    def vector(self) -> np.ndarray:
        return self.magnitude * self.direction()

    def in_bc_plane(self) -> bool:
        return self.plane in ("bc", "fixed_b", "fixed_c")


@dataclass(frozen=True)
class EnergyBreakdown:
    e_j1: float
    e_j1p: float
    e_j2: float
    e_j2p: float
    e_zeeman: float
    e_mca: float
    total: float

    @property
    def exchange(self) -> float:
        return self.e_j1 + self.e_j1p + self.e_j2 + self.e_j2p

    def per_site(self) -> "EnergyBreakdown":
        return EnergyBreakdown(**{k: v / N_SITES for k, v in asdict(self).items()})

    def as_dict(self) -> dict:
        return asdict(self)


def hamiltonian_groups(params: ModelParams, field: FieldSpec) -> dict[str, WeightedPauliSum]:
    """Hamiltonian terms keyed by energy group, in emission order."""
    s2 = params.s ** 2
    groups: dict[str, list] = {g: [] for g in GROUPS}
    for name, i, j, pref in BONDS:
        coef = params.coupling(name) * s2 * pref
        for axis in "XYZ":
            groups[name].append((coef, PauliString.from_sparse(N_QUBITS, {i: axis, j: axis})))
    zeeman_scale = -params.g * MU_B * field.magnitude * params.s
    for axis, comp in zip("XYZ", field.direction()):
        if comp == 0.0 or field.magnitude == 0.0:
            continue
        for n in range(N_SITES):
            groups["zeeman"].append((zeeman_scale * comp, PauliString.from_sparse(N_QUBITS, {n: axis})))
    for axis, coef in zip("XYZ", (-params.ka, -params.kb, params.kc)):
        if coef == 0.0:
            continue
        for n in range(N_SITES):
            groups["mca"].append((coef, PauliString.from_sparse(N_QUBITS, {n: axis, n + N_SITES: axis})))
    return {g: WeightedPauliSum(tuple(t)) for g, t in groups.items()}


def build_hamiltonian(params: ModelParams, field: FieldSpec) -> WeightedPauliSum:
    out = WeightedPauliSum()
    for part in hamiltonian_groups(params, field).values():
        out = out + part
    return out


def energy_function(params: ModelParams, field: FieldSpec):
    """Fast scalar objective over the flat vector (theta_1..4, phi_1..4)."""
    s2 = params.s ** 2
    c12 = params.j1 * s2 * 0.5
    c23 = params.j1p * s2 * 0.5
    c13 = params.j2 * s2
    c24 = params.j2p * s2
    ha, hb, hc = (float(v) for v in -params.g * MU_B * params.s * field.vector())
    ka, kb, kc = params.ka, params.kb, params.kc
    sin, cos = math.sin, math.cos

    def energy(x) -> float:
        t1, t2, t3, t4, p1, p2, p3, p4 = x
        s1, s2_, s3, s4 = sin(t1), sin(t2), sin(t3), sin(t4)
        x1, y1, z1 = s1 * cos(p1), s1 * sin(p1), cos(t1)
        x2, y2, z2 = s2_ * cos(p2), s2_ * sin(p2), cos(t2)
        x3, y3, z3 = s3 * cos(p3), s3 * sin(p3), cos(t3)
        x4, y4, z4 = s4 * cos(p4), s4 * sin(p4), cos(t4)
        e = c12 * (x1 * x2 + y1 * y2 + z1 * z2 + x3 * x4 + y3 * y4 + z3 * z4)
        e += c23 * (x2 * x3 + y2 * y3 + z2 * z3 + x4 * x1 + y4 * y1 + z4 * z1)
        e += c13 * (x1 * x3 + y1 * y3 + z1 * z3)
        e += c24 * (x2 * x4 + y2 * y4 + z2 * z4)
        e += ha * (x1 + x2 + x3 + x4) + hb * (y1 + y2 + y3 + y4) + hc * (z1 + z2 + z3 + z4)
        e += -ka * (x1 * x1 + x2 * x2 + x3 * x3 + x4 * x4)
        e += -kb * (y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4)
        e += kc * (z1 * z1 + z2 * z2 + z3 * z3 + z4 * z4)
        return e

    return energy


def classical_energy(params: ModelParams, field: FieldSpec, angles: AnsatzParams) -> float:
    return energy_function(params, field)(angles.as_vector().tolist())


def _site_energy_gradient(params: ModelParams, field: FieldSpec, m: np.ndarray) -> np.ndarray:
    """dE/dm_n for each site, treating the Bloch vectors as free."""
    s2 = params.s ** 2
    grad = np.zeros_like(m)
    for name, i, j, pref in BONDS:
        c = params.coupling(name) * s2 * pref
        grad[i] += c * m[j]
        grad[j] += c * m[i]
    grad += -params.g * MU_B * params.s * field.vector()
    grad += 2.0 * m * np.array([-params.ka, -params.kb, params.kc])
    return grad


def classical_gradient(params: ModelParams, field: FieldSpec, angles: AnsatzParams) -> np.ndarray:
    """(dE/dtheta_1..4, dE/dphi_1..4) in meV / rad."""
    m = bloch_vectors(angles)
    dm = _site_energy_gradient(params, field, m)
    t = np.asarray(angles.theta)
    p = np.asarray(angles.phi)
    d_theta = np.stack([np.cos(t) * np.cos(p), np.cos(t) * np.sin(p), -np.sin(t)], axis=1)
    d_phi = np.stack([-np.sin(t) * np.sin(p), np.sin(t) * np.cos(p), np.zeros_like(t)], axis=1)
    return np.concatenate([(dm * d_theta).sum(axis=1), (dm * d_phi).sum(axis=1)])


def energy_breakdown(params: ModelParams, field: FieldSpec, angles: AnsatzParams) -> EnergyBreakdown:
    m = bloch_vectors(angles)
    s2 = params.s ** 2
    parts = dict.fromkeys(GROUPS, 0.0)
    for name, i, j, pref in BONDS:
        parts[name] += params.coupling(name) * s2 * pref * float(m[i] @ m[j])
    parts["zeeman"] = float(-params.g * MU_B * params.s * (m.sum(axis=0) @ field.vector()))
    parts["mca"] = float((m ** 2 @ np.array([-params.ka, -params.kb, params.kc])).sum())
    return EnergyBreakdown(
        e_j1=parts["j1"], e_j1p=parts["j1p"], e_j2=parts["j2"], e_j2p=parts["j2p"],
        e_zeeman=parts["zeeman"], e_mca=parts["mca"], total=sum(parts.values()),
    )
