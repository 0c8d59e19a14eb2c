"""Flat run configuration: built-in defaults < config file < command-line flags."""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .compressor import CompressionConfig, TopologyConfig
from .embeddings import EmbeddingProviderConfig
from .errors import ConfigError


@dataclass(frozen=True)
class RunConfig:
    # graph
    alpha: float = 0.5
    tau: float = 10.0
    k_min: int = 5
    k_max: int = 20
    # topology
    landmark_proportion: float = 0.2
    nu: int = 1
    max_value: float = 3.0
    k_pool: int = 3
    m_pool: int = 3
    # compression
    target_ratio: float = 0.3
    lambda_weight: float = 0.7
    beta_weight: float = 0.5
    query: str | None = None
    disconnect_penalty: float = -1e9
    scoring_mode: str = "topo_task"
    hierarchy: bool = True
    hierarchy_threshold: int = 120
    segment_target_count: int | None = None
    local_ratio_floor: float = 0.5
    strict: bool = False
    seed: int = 42
    workers: int = 1
    # embeddings
    embedding_mode: str = "mock"
    cache_path: str | None = None
    query_cache_path: str | None = None
    endpoint_url: str | None = None
    model_id: str = "mock-hash"
    batch_size: int = 32
    max_retries: int = 3
    timeout: float = 30.0
    max_in_flight: int = 4
    token_env: str = "GLOSA_EMBEDDING_TOKEN"
    mock_dim: int = 64

    def topology(self) -> TopologyConfig:
        return TopologyConfig(
            alpha=self.alpha, tau=self.tau, landmark_proportion=self.landmark_proportion,
            nu=self.nu, max_value=self.max_value, k_pool=self.k_pool, m_pool=self.m_pool,
            k_min=self.k_min, k_max=self.k_max,
        )

    def compression(self) -> CompressionConfig:
        return CompressionConfig(
            target_ratio=self.target_ratio, lambda_weight=self.lambda_weight,
            beta_weight=self.beta_weight, query=self.query,
            disconnect_penalty=self.disconnect_penalty, scoring_mode=self.scoring_mode,
            hierarchy_threshold=self.hierarchy_threshold,
            segment_target_count=self.segment_target_count,
            local_ratio_floor=self.local_ratio_floor, seed=self.seed, strict=self.strict,
        )

    def embedding(self) -> EmbeddingProviderConfig:
        return EmbeddingProviderConfig(
            mode=self.embedding_mode, cache_path=self.cache_path,
            query_cache_path=self.query_cache_path, endpoint_url=self.endpoint_url,
            model_id=self.model_id, batch_size=self.batch_size, max_retries=self.max_retries,
            timeout=self.timeout, max_in_flight=self.max_in_flight, token_env=self.token_env,
            mock_dim=self.mock_dim, seed=self.seed,
        )

    def validate(self) -> "RunConfig":
        self.topology().validate()
        self.compression().validate()
        self.embedding().validate()
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def echo(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, value):
    kind = _FIELD_TYPES[key]
    if value is None:
        return None
    if "bool" in kind:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be a boolean")
        return value
    if kind.startswith("int"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if kind.startswith("float"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key} must be a string")
    return value


def merge(base: RunConfig, overrides: dict) -> RunConfig:
    """Apply non-None overrides after checking names and types."""
    clean = {}
    for key, value in overrides.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown configuration key {key!r}")
        if value is not None:
            clean[key] = _coerce(key, value)
    return replace(base, **clean)


def load_config_file(path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config file must be flat; found tables {nested}")
    return data


def dump_config(cfg: RunConfig, path) -> None:
    """Write a flat TOML file that reloads to the same configuration."""
    lines = []
    for key, value in cfg.echo().items():
        if value is None:
            continue
        if isinstance(value, bool):
            lines.append(f"{key} = {'true' if value else 'false'}")
        elif isinstance(value, str):
            lines.append(f"{key} = {json.dumps(value)}")
        else:
            lines.append(f"{key} = {value!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def resolve(config_file=None, flags: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if config_file:
        cfg = merge(cfg, load_config_file(config_file))
    if flags:
        cfg = merge(cfg, flags)
    return cfg.validate()
