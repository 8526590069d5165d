"""Scenario and experiment configuration.

All power quantities are given in dBm and converted to watts internally.
Defaults reproduce the reference simulation setup: an 8-antenna base
station serving 5 users through a 32-element (8x4) surface, transmitting
30 dBm against -100 dBm noise, with the sensing target at elevation 90
degrees and azimuth 45 degrees.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError

ARCHITECTURES = ("fbd", "gbd", "dris")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """One solvable scenario: geometry, powers, weights, solver knobs."""

    m_antennas: int = 8
    k_users: int = 5
    n1: int = 8
    n2: int = 4
    wavelength: float = 0.03
    p_max_dbm: float = 30.0
    noise_dbm: float = -100.0
    target_elevation_deg: float = 90.0
    target_azimuth_deg: float = 45.0
    bs_position: tuple[float, float, float] = (-20.0, 0.0, 25.0)
    ris_position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rician_kappa: float = 10.0
    user_radius_min: float = 5.0
    user_radius_max: float = 30.0
    eta: float = 0.6
    architecture: str = "fbd"
    group_size: int = 4
    seed: int = 0
    outer_tol: float = 1e-4
    max_outer: int = 50
    splitting_tol: float | None = None  # default 1e-6 * sqrt(N)
    splitting_max_iter: int = 100
    penalty_mu: float | None = None  # default trace(P+Q)/N^2
    preserve_dual: bool = True  # warm-start the splitting dual across outer passes
    gain_target_c: float | None = None  # default set at initialization
    gain_target_pt: float | None = None
    max_elements: int = 64  # memory guard on the N^2-sized subproblem

    @property
    def n_elements(self) -> int:
        return self.n1 * self.n2

    @property
    def p_max_w(self) -> float:
        return dbm_to_watts(self.p_max_dbm)

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    @property
    def target_elevation(self) -> float:
        return math.radians(self.target_elevation_deg)

    @property
    def target_azimuth(self) -> float:
        return math.radians(self.target_azimuth_deg)

    def validate(self) -> "SystemConfig":
        if self.m_antennas < 1:
            raise ValidationError("m_antennas must be >= 1")
        if self.k_users < 1:
            raise ValidationError("k_users must be >= 1")
        if self.n1 < 1 or self.n2 < 1:
            raise ValidationError("n1 and n2 must be >= 1")
        if self.wavelength <= 0:
            raise ValidationError("wavelength must be > 0")
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError(f"eta must lie in [0, 1], got {self.eta}")
        if self.architecture not in ARCHITECTURES:
            raise ValidationError(
                f"architecture must be one of {ARCHITECTURES}, got {self.architecture!r}"
            )
        if self.architecture == "gbd":
            if self.group_size < 1:
                raise ValidationError("group_size must be >= 1")
            if self.n_elements % self.group_size != 0:
                raise ValidationError(
                    f"group_size {self.group_size} does not divide N = {self.n_elements}"
                )
        if self.rician_kappa < 0:
            raise ValidationError("rician_kappa must be >= 0")
        if not 0 < self.user_radius_min <= self.user_radius_max:
            raise ValidationError("user radii must satisfy 0 < min <= max")
        if self.outer_tol <= 0 or self.max_outer < 1:
            raise ValidationError("outer_tol must be > 0 and max_outer >= 1")
        if self.splitting_tol is not None and self.splitting_tol <= 0:
            raise ValidationError("splitting_tol must be > 0")
        if self.splitting_max_iter < 1:
            raise ValidationError("splitting_max_iter must be >= 1")
        if self.penalty_mu is not None and self.penalty_mu <= 0:
            raise ValidationError("penalty_mu must be > 0")
        if self.max_elements < 1:
            raise ValidationError("max_elements must be >= 1")
        if self.n_elements > self.max_elements:
            raise ValidationError(
                f"N = {self.n_elements} exceeds max_elements = {self.max_elements}"
            )
        return self


@dataclass(frozen=True)
class ExperimentConfig:
    """A system scenario plus the sweep axes of one experiment run."""

    system: SystemConfig = SystemConfig()
    eta_list: tuple[float, ...] = (0.0, 0.6, 1.0)
    tradeoff_points: int = 11
    architectures: tuple[str, ...] = ("fbd", "gbd", "dris")
    num_trials: int = 20
    azimuth_start_deg: float = 0.0
    azimuth_stop_deg: float = 90.0
    azimuth_step_deg: float = 0.5
    out_dir: str = "results"
    workers: int = 1

    def validate(self) -> "ExperimentConfig":
        self.system.validate()
        for eta in self.eta_list:
            if not 0.0 <= eta <= 1.0:
                raise ValidationError(f"eta must lie in [0, 1], got {eta}")
        if self.tradeoff_points < 2:
            raise ValidationError("tradeoff_points must be >= 2")
        for arch in self.architectures:
            if arch not in ARCHITECTURES:
                raise ValidationError(
                    f"architecture must be one of {ARCHITECTURES}, got {arch!r}"
                )
            if arch == "gbd":
                dataclasses.replace(self.system, architecture="gbd").validate()
        if self.num_trials < 1:
            raise ValidationError("num_trials must be >= 1")
        if self.azimuth_step_deg <= 0:
            raise ValidationError("azimuth_step_deg must be > 0")
        if self.azimuth_stop_deg < self.azimuth_start_deg:
            raise ValidationError("azimuth_stop_deg must be >= azimuth_start_deg")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        return self


_SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_EXPERIMENT_FIELDS = {
    f.name for f in dataclasses.fields(ExperimentConfig) if f.name != "system"
}
_TUPLE_FIELDS = {"bs_position", "ris_position", "eta_list", "architectures"}
# Runtime-only knobs excluded from the semantic hash embedded in outputs.
_UNHASHED_FIELDS = {"out_dir", "workers"}


def _coerce(key: str, value):
    if key in _TUPLE_FIELDS:
        if not isinstance(value, (list, tuple)):
            raise ParseError(f"key {key!r} must be a list")
        return tuple(value)
    if isinstance(value, (dict, list)):
        raise ParseError(f"key {key!r} must be a scalar value")
    return value


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat key-value mapping."""
    if not isinstance(raw, dict):
        raise ParseError("config document must be a flat JSON object")
    sys_kwargs, exp_kwargs = {}, {}
    for key, value in raw.items():
        if key in _SYSTEM_FIELDS:
            sys_kwargs[key] = _coerce(key, value)
        elif key in _EXPERIMENT_FIELDS:
            exp_kwargs[key] = _coerce(key, value)
        else:
            raise ValidationError(f"unknown config key {key!r}")
    cfg = ExperimentConfig(system=SystemConfig(**sys_kwargs), **exp_kwargs)
    return cfg.validate()


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Load a flat JSON config file, apply overrides, validate.

    With no path the full default scenario is returned. Unknown keys are
    rejected so typos never silently fall back to defaults.
    """
    raw: dict = {}
    if path is not None:
        text = Path(path).read_text()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"cannot parse config file {path}: {exc}") from exc
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(raw)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    """Flatten an ExperimentConfig back to the on-disk key-value form."""
    out = dict(dataclasses.asdict(cfg.system))
    for f in dataclasses.fields(ExperimentConfig):
        if f.name != "system":
            out[f.name] = getattr(cfg, f.name)
    return out


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable 12-hex digest of the semantic config (runtime knobs excluded)."""
    semantic = {
        k: v for k, v in config_to_dict(cfg).items() if k not in _UNHASHED_FIELDS
    }
    blob = json.dumps(semantic, sort_keys=True, default=list)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
