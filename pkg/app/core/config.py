import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseSettings, Field, ValidationError, validator

from app.core.errors import ConfigError, MissingArtifactError
from app.schemas.config import RunConfig

SECTIONS = ("sim", "agent", "baseline", "run")


class Settings(BaseSettings):
    app_name: str = "signal-lab"
    log_level: str = Field(default="INFO", description="logging level for the CLI")
    workers: int = Field(
        default=1,
        description="worker processes for seed-parallel evaluation; 1 runs in-process",
        ge=1,
    )
    output_root: str = Field(default="runs", description="default parent of run directories")

    @validator("log_level")
    def _known_level(cls, v: str) -> str:  # noqa: N805
        if not isinstance(logging.getLevelName(v.upper()), int):
            raise ValueError(f"unknown logging level {v!r}")
        return v.upper()

    class Config:
        env_prefix = "SIGNAL_LAB_"
        env_file = ".env"
        env_file_encoding = "utf-8"


def get_settings() -> Settings:
    try:
        return Settings()
    except ValidationError as exc:
        raise ConfigError(_describe(exc, prefix="SIGNAL_LAB_")) from exc


def _describe(exc: ValidationError, prefix: str = "") -> str:
    parts = []
    for err in exc.errors():
        field = ".".join(str(p) for p in err["loc"] if p != "__root__")
        name = f"{prefix}{field}" if field else prefix.rstrip(".") or "config"
        parts.append(f"{name}: {err['msg']}")
    return "; ".join(parts)


def read_config_file(path: str) -> Dict[str, Dict[str, Any]]:
    p = Path(path)
    if not p.is_file():
        raise MissingArtifactError([str(p)])
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config file {p}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {p}: top level must be an object")
    unknown = set(doc) - set(SECTIONS) - {"version"}
    if unknown:
        raise ConfigError(f"config file {p}: unknown section(s) {', '.join(sorted(unknown))}")
    out: Dict[str, Dict[str, Any]] = {}
    for name in SECTIONS:
        section = doc.get(name) or {}
        if not isinstance(section, dict):
            raise ConfigError(f"config file {p}: section {name!r} must be an object")
        out[name] = dict(section)
    return out


def resolve_run_config(
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Dict[str, Any]]] = None,
) -> RunConfig:
    """Defaults < config file < flag overrides; every section validated before any run starts."""
    merged: Dict[str, Dict[str, Any]] = {name: {} for name in SECTIONS}
    if config_path:
        for name, values in read_config_file(config_path).items():
            merged[name].update(values)
    for name, values in (overrides or {}).items():
        if name not in merged:
            raise ConfigError(f"unknown config section {name!r}")
        merged[name].update({k: v for k, v in values.items() if v is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc


def effective_config_document(cfg: RunConfig, version: str) -> Dict[str, Any]:
    doc: Dict[str, Any] = json.loads(cfg.json())
    doc["version"] = version
    return doc
