"""Run configuration: a single declarative YAML file.

See the README for the documented schema. Only ``output_dir`` honours
an environment override (``YIELDSIGN_OUTPUT_DIR``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .asg import AsgParams
from .errors import ConfigError
from .ingest import FEATURE_PRESETS
from .months import parse_month

OUTPUT_DIR_ENV = "YIELDSIGN_OUTPUT_DIR"


@dataclass
class CvConfig:
    k: int = 5
    seed: int = 7
    mode: str = "stratified"


@dataclass
class Config:
    data_dir: Path
    countries: list[str]
    target_country: str
    output_dir: Path
    start: int = parse_month("1980-01")
    end: int = parse_month("2017-12")
    asg: AsgParams = field(default_factory=AsgParams)
    cv: CvConfig = field(default_factory=CvConfig)
    grids: dict[str, dict[str, list]] | None = None
    threshold: float = 0.75
    feature_preset: str = "full"

    def validate(self) -> "Config":
        if not self.countries:
            raise ConfigError("at least one training country is required")
        if len(set(self.countries)) != len(self.countries):
            raise ConfigError("duplicate training countries")
        if self.target_country in self.countries:
            raise ConfigError(
                f"target country {self.target_country} must not appear in the "
                f"training countries"
            )
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.feature_preset not in FEATURE_PRESETS:
            raise ConfigError(
                f"feature_preset must be one of {sorted(FEATURE_PRESETS)}, "
                f"got {self.feature_preset!r}"
            )
        if self.cv.k < 2:
            raise ConfigError(f"cv.k must be >= 2, got {self.cv.k}")
        if self.cv.mode not in ("stratified", "walk_forward"):
            raise ConfigError(f"cv.mode must be stratified or walk_forward, got {self.cv.mode!r}")
        if self.end < self.start:
            raise ConfigError("date_range end precedes start")
        return self


def _require(raw: dict, key: str):
    if key not in raw:
        raise ConfigError(f"config is missing required key {key!r}")
    return raw[key]


def load_config(path: str | Path, seed_override: int | None = None) -> Config:
    """Parse and validate a config file; ``--seed`` overrides cv.seed."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a mapping")

    base = path.parent

    def resolve(p: str) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    try:
        date_range = raw.get("date_range") or {}
        asg_raw = raw.get("asg") or {}
        cv_raw = raw.get("cv") or {}
        config = Config(
            data_dir=resolve(str(_require(raw, "data_dir"))),
            countries=[str(c) for c in _require(raw, "countries")],
            target_country=str(_require(raw, "target_country")),
            output_dir=Path(
                os.environ.get(OUTPUT_DIR_ENV) or resolve(str(_require(raw, "output_dir")))
            ),
            start=parse_month(str(date_range.get("start", "1980-01"))),
            end=parse_month(str(date_range.get("end", "2017-12"))),
            asg=AsgParams(
                window=int(asg_raw.get("window", 12)),
                cap=float(asg_raw.get("cap", 3.0)),
                sg_window=int(asg_raw.get("sg_window", 3)),
                sg_order=int(asg_raw.get("sg_order", 2)),
            ),
            cv=CvConfig(
                k=int(cv_raw.get("k", 5)),
                seed=int(seed_override if seed_override is not None else cv_raw.get("seed", 7)),
                mode=str(cv_raw.get("mode", "stratified")),
            ),
            grids=raw.get("grids"),
            threshold=float(raw.get("threshold", 0.75)),
            feature_preset=str(raw.get("feature_preset", "full")),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config.validate()
