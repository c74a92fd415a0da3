"""Run configuration: one JSON file captures environments, ladders, models,
decoding settings, parallelism, and replay mode, so any run is reproducible
from (config, seeds, replay store)."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .core import ENV_IDS, LEVEL_MAX, LEVEL_MIN, level_schedule
from .metrics import DEFAULT_THETA

REPLAY_MODES = ("live", "record", "replay")

# per-environment override keys; anything else (decoding knobs in particular)
# is rejected so the token budget stays constant across levels and envs
ENV_OVERRIDE_KEYS = frozenset({"levels", "ladder", "settings"})

# validator-semantics switches each environment accepts via "settings"
ENV_SETTINGS_KEYS = {"checker": frozenset({"strict_opposite_color"})}


class ConfigError(ValueError):
    """Invalid run configuration; maps to CLI exit code 2."""


@dataclass(frozen=True)
class ModelConfig:
    model_id: str
    endpoint_url: str
    max_tokens: int
    temperature: float = 0.0
    timeout_s: int = 120
    api_key_env: str = ""
    extra_body: Optional[dict] = None


@dataclass(frozen=True)
class RunConfig:
    out_dir: str
    seed: int
    instances_per_cell: int
    ladders: dict  # env_id -> list of (level, params template)
    env_settings: dict  # env_id -> validator-semantics switches
    models: tuple
    parallelism: int
    replay_mode: str
    replay_path: str
    theta: float
    strict_parse: bool


def _build_ladders(env_section) -> dict:
    if not env_section:
        raise ConfigError("config must select at least one environment")
    ladders = {}
    settings = {}
    for env_id, override in env_section.items():
        if env_id not in ENV_IDS:
            raise ConfigError(f"unknown environment {env_id!r}")
        override = override or {}
        unknown = set(override) - ENV_OVERRIDE_KEYS
        if unknown:
            raise ConfigError(
                f"environment {env_id}: unsupported override keys {sorted(unknown)} "
                f"(decoding settings are per-model only)"
            )
        if "settings" in override:
            allowed = ENV_SETTINGS_KEYS.get(env_id, frozenset())
            bad = set(override["settings"]) - allowed
            if bad:
                raise ConfigError(
                    f"environment {env_id}: unknown settings {sorted(bad)}"
                )
            settings[env_id] = dict(override["settings"])
        if "ladder" in override:
            ladder = []
            for entry in override["ladder"]:
                level, params = entry
                if not LEVEL_MIN <= level <= LEVEL_MAX:
                    raise ConfigError(f"environment {env_id}: level {level} out of range")
                ladder.append((int(level), dict(params)))
        else:
            ladder = level_schedule(env_id)
        if "levels" in override:
            wanted = set(override["levels"])
            bad = wanted - {lvl for lvl, _ in ladder}
            if bad:
                raise ConfigError(f"environment {env_id}: levels {sorted(bad)} not in ladder")
            ladder = [(lvl, params) for lvl, params in ladder if lvl in wanted]
        if not ladder:
            raise ConfigError(f"environment {env_id}: empty ladder")
        ladders[env_id] = ladder
    return ladders, settings


def load_config(path) -> RunConfig:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    instances_per_cell = raw.get("instances_per_cell", 1)
    if not isinstance(instances_per_cell, int) or instances_per_cell < 1:
        raise ConfigError(f"instances_per_cell must be >= 1, got {instances_per_cell!r}")
    replay_mode = raw.get("replay_mode", "live")
    if replay_mode not in REPLAY_MODES:
        raise ConfigError(f"replay_mode must be one of {REPLAY_MODES}, got {replay_mode!r}")
    replay_path = raw.get("replay_path", "replay.jsonl")
    if replay_mode == "replay" and not os.path.exists(replay_path):
        raise ConfigError(f"replay mode requires an existing store at {replay_path}")

    models = []
    for m in raw.get("models", []):
        try:
            model = ModelConfig(
                model_id=m["model_id"],
                endpoint_url=m["endpoint_url"],
                max_tokens=int(m["max_tokens"]),
                temperature=float(m.get("temperature", 0.0)),
                timeout_s=int(m.get("timeout_s", 120)),
                api_key_env=m.get("api_key_env", ""),
                extra_body=m.get("extra_body"),
            )
        except KeyError as exc:
            raise ConfigError(f"model entry missing field {exc}") from exc
        if model.max_tokens < 1:
            raise ConfigError(f"model {model.model_id}: max_tokens must be positive")
        if model.temperature < 0:
            raise ConfigError(f"model {model.model_id}: temperature must be >= 0")
        models.append(model)

    parallelism = raw.get("parallelism", 4)
    if not isinstance(parallelism, int) or parallelism < 1:
        raise ConfigError(f"parallelism must be >= 1, got {parallelism!r}")
    theta = float(raw.get("theta", DEFAULT_THETA))
    if not 0 < theta <= 1:
        raise ConfigError(f"theta must be in (0, 1], got {theta}")

    ladders, env_settings = _build_ladders(raw.get("environments", {}))
    return RunConfig(
        out_dir=raw.get("out_dir", "out"),
        seed=int(raw.get("seed", 0)),
        instances_per_cell=instances_per_cell,
        ladders=ladders,
        env_settings=env_settings,
        models=tuple(models),
        parallelism=parallelism,
        replay_mode=replay_mode,
        replay_path=replay_path,
        theta=theta,
        strict_parse=bool(raw.get("strict_parse", False)),
    )
