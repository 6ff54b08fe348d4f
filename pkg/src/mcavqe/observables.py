"""Magnetization, torque, twin mixing and phase detection from optimized states."""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .ansatz import bloch_vectors
from .errors import UsageError
from .model import FieldSpec, ModelParams
from .solver import OptimizationResult, OptimizerConfig, optimize_ground_state

PHASES = ("afm_chain", "spin_flop", "half_saturated", "saturated", "other")
DEFAULT_EPS = 1e-6


@dataclass(frozen=True)
class MagnetizationRecord:
    field: FieldSpec
    per_site: np.ndarray  # (4, 3) Bloch vectors, (a, b, c)
    m_avg: np.ndarray  # muB per Cu
    converged: bool = True

    @property
    def m_b(self) -> float:
        return float(self.m_avg[1])

    def along_field(self) -> np.ndarray:
        """Per-site projection on the field axis (the b axis at zero field)."""
        d = self.field.direction() if self.field.magnitude > 0 else np.array([0.0, 1.0, 0.0])
        return self.per_site @ d


@dataclass(frozen=True)
class TorqueRecord:
    alpha_h: float
    tau_a: float  # muB T per Cu


@dataclass
class PhaseReport:
    h_flop: float | None = None
    h1: float | None = None
    h2: float | None = None
    phase_labels: list[str] = dc_field(default_factory=list)


def magnetization(result: OptimizationResult, params: ModelParams, field: FieldSpec) -> MagnetizationRecord:
    m = bloch_vectors(result.best_params)
    # a -> -a is a symmetry only when the field has no a component
    if field.direction()[0] == 0.0 and m[0, 0] < 0:
        m = m * np.array([-1.0, 1.0, 1.0])
    return MagnetizationRecord(field, m, params.g * params.s * m.mean(axis=0), result.converged)


def torque(record: MagnetizationRecord) -> TorqueRecord:
    """a-component of M x H for a field rotating in the bc plane."""
    if not record.field.in_bc_plane():
        raise UsageError(f"torque needs a bc-plane field, got plane {record.field.plane!r}")
    _, h_b, h_c = record.field.vector()
    _, m_b, m_c = record.m_avg
    return TorqueRecord(record.field.alpha_h, float(m_b * h_c - m_c * h_b))


def minority_frame_field(field: FieldSpec) -> FieldSpec:
    """Lab field expressed in the minority twin's axes (a and b swapped by a 90 deg turn about c)."""
    if field.plane == "bc":
        return FieldSpec(field.magnitude, field.alpha_h, "ac")
    if field.plane == "ac":
        return FieldSpec(field.magnitude, math.pi - field.alpha_h, "bc")
    return {
        "fixed_b": FieldSpec(field.magnitude, 0.0, "fixed_a"),
        "fixed_a": FieldSpec(field.magnitude, math.pi, "bc"),
        "fixed_c": FieldSpec(field.magnitude, 0.0, "fixed_c"),
    }[field.plane]


def _to_lab(v: np.ndarray) -> np.ndarray:
    # +90 deg about c: (a, b, c) -> (-b, a, c)
    return np.stack([-v[..., 1], v[..., 0], v[..., 2]], axis=-1)


def minority_record(result: OptimizationResult, params: ModelParams, lab_field: FieldSpec) -> MagnetizationRecord:
    """Minority-twin optimum (found in its own frame) rotated into lab axes."""
    inner = magnetization(result, params, minority_frame_field(lab_field))
    return MagnetizationRecord(lab_field, _to_lab(inner.per_site), _to_lab(inner.m_avg), inner.converged)


def mix_records(majority: MagnetizationRecord, minority: MagnetizationRecord, fraction: float) -> MagnetizationRecord:
    if not 0.0 <= fraction <= 1.0:
        raise UsageError(f"twin fraction {fraction} outside [0, 1]")
    return MagnetizationRecord(
        majority.field,
        fraction * majority.per_site + (1.0 - fraction) * minority.per_site,
        fraction * majority.m_avg + (1.0 - fraction) * minority.m_avg,
        majority.converged and minority.converged,
    )


def mix_twins(majority: MagnetizationRecord, params: ModelParams,
              config: OptimizerConfig | None = None) -> MagnetizationRecord:
    if params.twin_fraction == 1.0:
        return majority
    result = optimize_ground_state(params, minority_frame_field(majority.field), config)
    return mix_records(majority, minority_record(result, params, majority.field), params.twin_fraction)


def classify_phase(record: MagnetizationRecord, eps: float = DEFAULT_EPS) -> str:
    if not 0.0 < eps < 0.1:
        raise UsageError(f"eps must lie in (0, 0.1), got {eps}")
    along = record.along_field()
    m = record.per_site
    dominant = np.argmax(np.abs(m), axis=1)
    # mixed signs along b rule out any (partially) saturated state, so test the chain first
    if np.all(dominant == 1) and m[:, 1].min() < 0 < m[:, 1].max():
        return "afm_chain"
    n_sat = int(np.sum(along > 1.0 - eps)) if record.field.magnitude > 0 else 0
    if n_sat == 4:
        return "saturated"
    if n_sat == 2:
        return "half_saturated"
    d = record.field.direction() if record.field.magnitude > 0 else np.array([0.0, 1.0, 0.0])
    transverse = m - np.outer(along, d)
    if np.all(np.abs(transverse[:, 0]) > np.abs(transverse[:, 2])) and np.all(np.abs(transverse[:, 0]) > eps):
        return "spin_flop"
    return "other"


def _second_difference(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Three-point second derivative on a possibly uneven grid; NaN at the ends."""
    out = np.full(y.shape, np.nan)
    h0 = x[1:-1] - x[:-2]
    h1 = x[2:] - x[1:-1]
    out[1:-1] = 2.0 * (h0 * y[2:] - (h0 + h1) * y[1:-1] + h1 * y[:-2]) / (h0 * h1 * (h0 + h1))
    return out


def detect_transitions(sweep: Sequence[MagnetizationRecord], eps: float = DEFAULT_EPS,
                       knee_window: float = 0.05) -> PhaseReport:
    """Locate the spin flop, the half-saturation onset and full saturation.

    The flop is the midpoint of the step where labels turn afm_chain ->
    spin_flop (or, failing that, where the moment jumps by more than five
    median steps). Half saturation sets in smoothly, so h1 is placed at the
    sharpest bend of the leading spin pair's magnetization, provided that pair
    is within ``knee_window`` of saturation there. h2 is the first field after
    which every point is saturated.
    """
    records = list(sweep)
    if not records:
        return PhaseReport()
    h = np.array([r.field.magnitude for r in records])
    if np.any(np.diff(h) < 0):
        raise UsageError("sweep must be ordered by increasing field")
    labels = [classify_phase(r, eps) for r in records]
    report = PhaseReport(phase_labels=labels)

    for i in range(1, len(records)):
        if labels[i - 1] == "afm_chain" and labels[i] == "spin_flop":
            report.h_flop = 0.5 * (h[i - 1] + h[i])
            break
    else:
        if "afm_chain" in labels and len(records) > 2:
            m = np.array([r.m_avg @ (r.field.direction() if r.field.magnitude > 0 else (0, 1, 0))
                          for r in records])
            jumps = np.abs(np.diff(m))
            threshold = 5.0 * np.median(jumps)
            big = np.nonzero((jumps > threshold) & (jumps > 1e-9))[0]
            if big.size:
                report.h_flop = 0.5 * (h[big[0]] + h[big[0] + 1])

    sat = np.array([lab == "saturated" for lab in labels])
    i2 = None
    if sat[-1] and not sat.all():
        i2 = int(np.nonzero(~sat)[0][-1]) + 1
        report.h2 = float(h[i2])

    stop = i2 if i2 is not None else len(records)
    if stop >= 3 and np.all(np.diff(h[:stop]) > 0):
        along = np.array([r.along_field() for r in records[:stop]])
        pairs = np.stack([along[:, [0, 2]].mean(axis=1), along[:, [1, 3]].mean(axis=1)], axis=1)
        lead = pairs.max(axis=1)
        curv = _second_difference(h[:stop], lead)
        ok = (lead >= 1.0 - knee_window) & (lead - pairs.min(axis=1) >= knee_window) & (curv < 0)
        ok &= np.array([lab in ("spin_flop", "half_saturated", "other") for lab in labels[:stop]])
        if ok.any():
            i1 = int(np.nanargmin(np.where(ok, curv, np.nan)))
            half = [i for i in range(stop) if labels[i] == "half_saturated"]
            i1 = min([i1] + half)
            report.h1 = float(h[i1])
            for i in range(i1, stop):
                labels[i] = "half_saturated"
    return report
