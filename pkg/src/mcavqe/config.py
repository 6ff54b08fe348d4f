"""Run configuration: INI files with [model], [sweep] and [optimizer] sections."""
from __future__ import annotations

import configparser
import dataclasses
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, InvariantError, UsageError
from .model import FieldSpec, ModelParams
from .solver import OptimizerConfig

log = logging.getLogger(__name__)

SWEEP_KINDS = ("field_b", "field_a", "field_c", "angle_bc", "high_field")
SWEEP_MODES = ("warm", "cold")

# kb / |j1| of the default parameter set, to the four digits it is known to
KB_OVER_J1 = 2.205e-6
KB_OVER_J1_TOL = 5e-10


def anisotropy_ratio(params: ModelParams) -> float:
    return params.kb / abs(params.j1)


def check_parameter_consistency(params: ModelParams) -> bool:
    return abs(anisotropy_ratio(params) - KB_OVER_J1) <= KB_OVER_J1_TOL


if not check_parameter_consistency(ModelParams()):
    raise InvariantError(f"default kb/|j1| = {anisotropy_ratio(ModelParams()):.6e}, expected {KB_OVER_J1:.3e}")


@dataclass(frozen=True)
class SweepSpec:
    kind: str = "field_b"
    start: float = 0.0
    stop: float = 3.5
    step: float = 0.01
    fixed_magnitude: float = 0.0  # tesla, angle sweeps only
    mode: str = "warm"

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ConfigurationError(f"sweep.kind: unknown kind {self.kind!r}, expected one of {SWEEP_KINDS}")
        if self.mode not in SWEEP_MODES:
            raise ConfigurationError(f"sweep.mode: expected one of {SWEEP_MODES}, got {self.mode!r}")
        if not self.step > 0:
            raise ConfigurationError(f"sweep.step: must be > 0, got {self.step}")
        if self.start > self.stop:
            raise ConfigurationError(f"sweep.start: {self.start} exceeds sweep.stop {self.stop}")
        if self.kind == "angle_bc":
            if not self.fixed_magnitude > 0:
                raise ConfigurationError("sweep.fixed_magnitude: angle sweeps need a field > 0")
        elif self.start < 0:
            raise ConfigurationError(f"sweep.start: field must be >= 0, got {self.start}")

    def values(self) -> np.ndarray:
        """Grid points start, start + step, ... up to stop (inclusive within 1e-9 step)."""
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return np.round(self.start + self.step * np.arange(n + 1), 12)

    def fields(self) -> list[FieldSpec]:
        if self.kind == "angle_bc":
            return [FieldSpec(self.fixed_magnitude, math.radians(a), "bc") for a in self.values()]
        plane = {"field_b": "fixed_b", "high_field": "fixed_b", "field_a": "fixed_a", "field_c": "fixed_c"}[self.kind]
        return [FieldSpec(float(h), 0.0, plane) for h in self.values()]


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams = field(default_factory=ModelParams)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    twins: bool = False
    shots: int | None = None
    output_dir: Path = Path("results")
    emit_plots: bool = False

    def __post_init__(self):
        if self.shots is not None and self.shots < 1:
            raise ConfigurationError(f"sweep.shots: must be >= 1, got {self.shots}")

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _convert(section: str, key: str, raw: str, target):
    try:
        if target is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if target is int:
            return int(raw)
        if target is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError(raw)
            return value
        return raw.strip()
    except ValueError:
        raise ConfigurationError(f"{section}.{key}: cannot read {raw!r} as {target.__name__}") from None


def _section(parser, name: str, types: dict) -> dict:
    if not parser.has_section(name):
        return {}
    out = {}
    for key, raw in parser.items(name):
        if key not in types:
            raise ConfigurationError(f"{name}.{key}: unknown key")
        out[key] = _convert(name, key, raw, types[key])
    return out


_MODEL_KEYS = {f.name: float for f in dataclasses.fields(ModelParams)}
_OPT_KEYS = {f.name: (int if f.type == "int" else float) for f in dataclasses.fields(OptimizerConfig)}
_SWEEP_KEYS = {
    "kind": str, "start": float, "stop": float, "step": float, "fixed_magnitude": float, "mode": str,
    "twins": bool, "shots": int, "output_dir": str, "emit_plots": bool,
}


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config syntax: {exc}") from None
    unknown = set(parser.sections()) - {"model", "sweep", "optimizer"}
    if unknown:
        raise ConfigurationError(f"unknown section(s): {sorted(unknown)}")

    model = _section(parser, "model", _MODEL_KEYS)
    sweep = _section(parser, "sweep", _SWEEP_KEYS)
    opt = _section(parser, "optimizer", _OPT_KEYS)
    run_keys = {k: sweep.pop(k) for k in ("twins", "shots", "output_dir", "emit_plots") if k in sweep}
    if "output_dir" in run_keys:
        run_keys["output_dir"] = Path(run_keys["output_dir"])

    def build(cls, section, kwargs):
        try:
            return cls(**kwargs)
        except UsageError as exc:
            raise ConfigurationError(f"{section}: {exc}") from None

    cfg = RunConfig(
        model=build(ModelParams, "model", model),
        sweep=build(SweepSpec, "sweep", sweep),
        optimizer=build(OptimizerConfig, "optimizer", opt),
        **run_keys,
    )
    if not check_parameter_consistency(cfg.model):
        log.warning("kb/|j1| = %.4e differs from the reference ratio %.3e", anisotropy_ratio(cfg.model), KB_OVER_J1)
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
