"""Service configuration: YAML file, overridden by environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8123
    store_path: str = "wellbot_data"
    # None means the fixture packaged with the module.
    flows_path: str | None = None
    content_path: str | None = None
    taxonomy_path: str | None = None
    questionnaires_path: str | None = None


_ENV_FIELDS = {
    "WELLBOT_HOST": "host",
    "WELLBOT_PORT": "port",
    "WELLBOT_STORE": "store_path",
    "WELLBOT_FLOWS": "flows_path",
    "WELLBOT_CONTENT": "content_path",
    "WELLBOT_TAXONOMY": "taxonomy_path",
    "WELLBOT_QUESTIONNAIRES": "questionnaires_path",
}


def load_config(path: str | Path | None = None, env: dict | None = None) -> ServiceConfig:
    env = os.environ if env is None else env
    config = ServiceConfig()
    if path is not None:
        path = Path(path)
        try:
            doc = yaml.safe_load(path.read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"could not load config {path}: {exc}") from exc
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        known = {f for f in ServiceConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown settings {sorted(unknown)}")
        config = replace(config, **doc)
    overrides = {}
    for var, field_name in _ENV_FIELDS.items():
        if var in env and env[var] != "":
            overrides[field_name] = env[var]
    if overrides:
        config = replace(config, **overrides)
    try:
        config = replace(config, port=int(config.port))
    except (TypeError, ValueError):
        raise ConfigError(f"port must be an integer, got {config.port!r}") from None
    return config
