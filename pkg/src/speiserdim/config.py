"""Plain-text experiment configuration: `key = value` lines, '#' comments.

Every field has a default, unknown keys are hard errors, and
serialize(parse(text)) reproduces all effective values, so a config file
embedded in an output header fully describes the run that produced it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .families import TAGS, MapFamily
from .dynamics import GridSpec

PI = math.pi


class ConfigError(ValueError):
    """Malformed config text, unknown key, or invalid value."""


@dataclass(frozen=True)
class ExperimentConfig:
    # family selection
    family: str = "FLambda"
    p: int = 1
    eta: float = 0.3
    m: int = 9
    lam: float = 1.0
    # lambda grid for sweeps; below ~0.7 the pole dust leaves the default grid
    lambda_min: float = 0.75
    lambda_max: float = 1.0
    lambda_count: int = 8
    # raster grid
    grid_center_re: float = 0.0
    grid_center_im: float = 0.0
    grid_half_width: float = 2.0
    grid_resolution: int = 512
    max_iterations: int = 500
    attraction_tol: float = 1e-6
    # a low guard marks every pass near a pole as an exit, so the exit
    # counter traps orbits that shadow the pole dust; raise it toward 1e12
    # to flag only near-exact pole hits
    guard_modulus: float = 30.0
    guard_exits: int = 2
    # lower-bound pipeline
    bowen_mode: str = "measured"
    bowen_table: str = "100,1000,10000"
    branch_count: int = 40
    branch_base_index: int = 0  # 0 selects the base pole automatically
    branch_r0: float = 0.24
    branch_r1: float = 0.9
    branch_samples: int = 64
    # upper-bound pipeline
    pole_radius: float = 40.0
    series_radius: float = 1e80
    series_t_hi: float = 4.0
    # box counting ("" = derive dyadic scales from the resolution)
    box_scales: str = ""
    # run plumbing
    seed: int = 0
    threads: int = 0
    out: str = ""

    def to_family(self) -> MapFamily:
        return MapFamily(tag=self.family, p=self.p, eta=self.eta, m=self.m, lam=self.lam)

    def to_grid(self) -> GridSpec:
        return GridSpec(
            center=complex(self.grid_center_re, self.grid_center_im),
            half_width=self.grid_half_width,
            resolution=self.grid_resolution,
            max_iterations=self.max_iterations,
            attraction_tol=self.attraction_tol,
        )

    def box_scale_list(self) -> list[int] | None:
        if not self.box_scales.strip():
            return None
        return _parse_int_list(self.box_scales, "box_scales")


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_int_list(text: str, key: str) -> list[int]:
    try:
        values = [int(part.strip()) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key} must be a comma-separated integer list: {exc}") from None
    if not values:
        raise ConfigError(f"{key} must contain at least one integer")
    return values


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"value {raw!r} for key {key!r} is not a valid {kind}") from None


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.family not in TAGS:
        raise ConfigError(f"family must be one of {TAGS}, got {cfg.family!r}")
    if cfg.p < 1:
        raise ConfigError("p must be a positive integer")
    if not 0.0 < cfg.eta < PI / 2:
        raise ConfigError("eta must lie strictly inside (0, pi/2)")
    if cfg.m < 1 or cfg.m % 2 == 0:
        raise ConfigError("m must be an odd positive integer")
    if not 0.0 < cfg.lam <= 1.0:
        raise ConfigError("lam must lie in (0, 1]")
    if not 0.0 < cfg.lambda_min <= cfg.lambda_max <= 1.0:
        raise ConfigError("lambda grid must satisfy 0 < lambda_min <= lambda_max <= 1")
    if cfg.lambda_count < 2:
        raise ConfigError("lambda_count must be at least 2")
    if cfg.grid_resolution < 2:
        raise ConfigError("grid_resolution must be at least 2")
    if cfg.grid_half_width <= 0:
        raise ConfigError("grid_half_width must be positive")
    if cfg.max_iterations < 1:
        raise ConfigError("max_iterations must be positive")
    if cfg.attraction_tol <= 0:
        raise ConfigError("attraction_tol must be positive")
    if cfg.guard_modulus <= 1.0:
        raise ConfigError("guard_modulus must exceed 1; it must sit above the attractor scale")
    if cfg.guard_exits < 1:
        raise ConfigError("guard_exits must be at least 1")
    if cfg.bowen_mode not in ("measured", "synthetic"):
        raise ConfigError("bowen_mode must be 'measured' or 'synthetic'")
    table = _parse_int_list(cfg.bowen_table, "bowen_table")
    if any(n < 2 for n in table):
        raise ConfigError("bowen_table entries must be at least 2")
    if cfg.branch_count < 2:
        raise ConfigError("branch_count must be at least 2")
    if cfg.branch_base_index < 0:
        raise ConfigError("branch_base_index must be 0 (auto) or positive")
    if cfg.branch_r0 <= 0 or cfg.branch_r1 <= 0:
        raise ConfigError("branch radii must be positive")
    if cfg.branch_r0 > (2.0 - math.sqrt(3.0)) * cfg.branch_r1 + 1e-12:
        raise ConfigError("branch_r0 must not exceed (2 - sqrt(3)) * branch_r1")
    if cfg.branch_samples < 8:
        raise ConfigError("branch_samples must be at least 8")
    if cfg.pole_radius <= 0 or cfg.series_radius <= 0:
        raise ConfigError("pole_radius and series_radius must be positive")
    if cfg.series_t_hi <= 0:
        raise ConfigError("series_t_hi must be positive")
    if cfg.box_scales.strip():
        scales = _parse_int_list(cfg.box_scales, "box_scales")
        if any(s < 1 for s in scales):
            raise ConfigError("box_scales entries must be positive")
    if cfg.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if cfg.threads < 0:
        raise ConfigError("threads must be nonnegative (0 = auto)")
    return cfg


def parse_config(text: str) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, raw)
    return validate_config(ExperimentConfig(**values))


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = [f"{f.name} = {_format_value(getattr(cfg, f.name))}" for f in fields(ExperimentConfig)]
    return "\n".join(lines) + "\n"


def config_comment_lines(cfg: ExperimentConfig) -> list[str]:
    return serialize_config(cfg).splitlines()
