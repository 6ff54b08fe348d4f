"""Sweep orchestration and output files (CSV, phase report, optional SVG plots)."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import RunConfig
from .errors import ConfigurationError, UsageError
from .model import EnergyBreakdown, FieldSpec, ModelParams, energy_breakdown
from .observables import (MagnetizationRecord, PhaseReport, classify_phase, detect_transitions, magnetization,
                          minority_frame_field, minority_record, mix_records, torque)
from .shots import shot_study
from .solver import OptimizationResult, OptimizerConfig, cold_start_sweep, warm_start_sweep

log = logging.getLogger(__name__)

EXIT_OK, EXIT_BREACH, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2, 3

CSV_COLUMNS = (
    "field_T", "alpha_deg", "m_a_muB", "m_b_muB", "m_c_muB", "y1", "y2", "y3", "y4",
    "e_j1", "e_j1p", "e_j2", "e_j2p", "e_zeeman", "e_mca", "e_total", "e_mca_per_site",
    "tau_muB_T", "phase", "converged",
)


@dataclass(frozen=True)
class SweepPoint:
    field: FieldSpec
    result: OptimizationResult  # majority twin
    record: MagnetizationRecord  # reported moment (twin-mixed when enabled)
    majority: MagnetizationRecord
    energy: EnergyBreakdown
    phase: str = ""

    @property
    def converged(self) -> bool:
        return bool(self.result.converged and self.record.converged)


def alpha_degrees(field: FieldSpec) -> float:
    if field.plane == "bc":
        return math.degrees(field.alpha_h)
    return {"fixed_b": 0.0, "fixed_c": 90.0}.get(field.plane, math.nan)


def _optimize(params: ModelParams, fields: Sequence[FieldSpec], cfg: OptimizerConfig, mode: str, workers: int):
    if mode == "cold":
        return cold_start_sweep(params, fields, cfg, workers=workers)
    return warm_start_sweep(params, fields, cfg)


def run_sweep(params: ModelParams, fields: Sequence[FieldSpec], optimizer: OptimizerConfig | None = None,
              twins: bool = False, mode: str = "warm", workers: int = 1) -> tuple[list[SweepPoint], PhaseReport]:
    """Optimize every field point; phases are detected on the majority twin."""
    cfg = optimizer or OptimizerConfig()
    fields = list(fields)
    results = _optimize(params, fields, cfg, mode, workers)
    majority = [magnetization(r, params, f) for r, f in zip(results, fields)]
    reported = majority
    if twins and params.twin_fraction < 1.0:
        minor_fields = [minority_frame_field(f) for f in fields]
        minor = _optimize(params, minor_fields, cfg, mode, workers)
        reported = [mix_records(m, minority_record(r, params, f), params.twin_fraction)
                    for m, r, f in zip(majority, minor, fields)]
    if _monotone(fields):
        report = detect_transitions(majority)
    else:
        report = PhaseReport(phase_labels=[classify_phase(m) for m in majority])
    points = [
        SweepPoint(f, r, rec, maj, energy_breakdown(params, f, r.best_params), lab)
        for f, r, rec, maj, lab in zip(fields, results, reported, majority, report.phase_labels)
    ]
    return points, report


def _monotone(fields: Sequence[FieldSpec]) -> bool:
    h = [f.magnitude for f in fields]
    return len({f.plane for f in fields}) == 1 and all(b > a for a, b in zip(h, h[1:]))


def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def csv_row(point: SweepPoint) -> list[str]:
    rec, e = point.record, point.energy
    tau = torque(rec).tau_a if rec.field.in_bc_plane() else math.nan
    numbers = [
        point.field.magnitude, alpha_degrees(point.field), *rec.m_avg, *rec.per_site[:, 1],
        e.e_j1, e.e_j1p, e.e_j2, e.e_j2p, e.e_zeeman, e.e_mca, e.total, e.e_mca / 4.0, tau,
    ]
    return [_fmt(float(v)) for v in numbers] + [point.phase, "true" if point.converged else "false"]


def emit_csv(points: Sequence[SweepPoint], path) -> Path:
    if not points:
        raise UsageError("emit_csv needs at least one record")
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for p in points:
                writer.writerow(csv_row(p))
    except OSError as exc:
        raise ConfigurationError(f"cannot write {path}: {exc}") from None
    return path


def _round(value):
    return None if value is None else round(float(value), 9)


def emit_report(report: PhaseReport, points: Sequence[SweepPoint], path, extra: dict | None = None) -> Path:
    data = {
        "h_flop_T": _round(report.h_flop),
        "h1_T": _round(report.h1),
        "h2_T": _round(report.h2),
        "n_points": len(points),
        "n_unconverged": sum(not p.converged for p in points),
        "phase_counts": {lab: report.phase_labels.count(lab) for lab in sorted(set(report.phase_labels))},
    }
    data.update(extra or {})
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def emit_plots(points: Sequence[SweepPoint], stem: Path) -> list[Path]:
    """Static SVG line charts of moment, energies and (bc-plane sweeps) torque."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    angle = points[0].field.plane == "bc" and len({p.field.magnitude for p in points}) == 1
    x = np.array([alpha_degrees(p.field) if angle else p.field.magnitude for p in points])
    xlabel = "alpha_H (deg)" if angle else "H (T)"
    m = np.array([p.record.m_avg for p in points])
    panels = {
        "magnetization": [(m[:, k], f"M_{ax}") for k, ax in enumerate("abc")],
        "energy": [(np.array([p.energy.exchange for p in points]), "exchange"),
                   (np.array([p.energy.e_zeeman for p in points]), "zeeman"),
                   (np.array([p.energy.e_mca for p in points]), "mca")],
    }
    if all(p.field.in_bc_plane() for p in points):
        panels["torque"] = [(np.array([torque(p.record).tau_a for p in points]), "tau_a")]
    out = []
    plt.rcParams["svg.hashsalt"] = "mcavqe"
    for name, curves in panels.items():
        fig, ax = plt.subplots(figsize=(6, 4))
        for y, label in curves:
            ax.plot(x, y, label=label)
        ax.set_xlabel(xlabel)
        ax.legend()
        fig.tight_layout()
        path = stem.with_name(f"{stem.name}_{name}.svg")
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        out.append(path)
    return out


def run(config: RunConfig, workers: int = 1) -> int:
    """Execute a configured sweep and write its files; returns the exit status."""
    out_dir = Path(config.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out_dir, exc)
        return EXIT_CONFIG
    fields = config.sweep.fields()
    log.info("sweep %s: %d points (%s start)", config.sweep.kind, len(fields), config.sweep.mode)
    points, report = run_sweep(config.model, fields, config.optimizer, config.twins, config.sweep.mode, workers)
    stem = out_dir / config.sweep.kind
    try:
        emit_csv(points, stem.with_suffix(".csv"))
    except ConfigurationError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    extra = {"kind": config.sweep.kind, "twins": config.twins}
    if config.shots:
        extra["shots"] = _shot_columns(config, points, stem.with_name(stem.name + "_shots.csv"))
    emit_report(report, points, stem.with_name(stem.name + "_phases.json"), extra)
    if config.emit_plots:
        emit_plots(points, stem)
    if not all(p.converged for p in points):
        log.error("%d sweep point(s) did not converge", sum(not p.converged for p in points))
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _shot_columns(config: RunConfig, points: Sequence[SweepPoint], path: Path) -> int:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["field_T", "alpha_deg", "exchange_exact", "exchange_est", "exchange_sigma",
                         "mca_exact", "mca_est", "mca_sigma"])
        for i, p in enumerate(points):
            st = shot_study(config.model, p.field, p.result.best_params, config.shots, 1,
                            config.optimizer.seed + i)
            ex, mca = st["exchange"], st["mca"]
            writer.writerow([_fmt(v) for v in (p.field.magnitude, alpha_degrees(p.field), ex.exact,
                                               ex.mean, ex.sigma, mca.exact, mca.mean, mca.sigma)])
    return config.shots
