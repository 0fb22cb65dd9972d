"""Run configuration: one JSON file naming every artifact a session needs."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .boundary import MODES
from .errors import ConfigError

ENV_VAR = "LAG_CONFIG"


@dataclass(frozen=True)
class ProviderSettings:
    kind: str = "mock"
    script_dir: str = ""
    base_url: str = ""
    model: str = ""
    auth_env: str = ""
    timeout: float = 30.0
    retries: int = 2


@dataclass(frozen=True)
class LagConfig:
    schema_path: str
    lexicon_path: str
    kb_path: str
    type_map_path: str
    task_path: str
    contract_path: str
    stage_paths: tuple
    provider: ProviderSettings = ProviderSettings()
    boundary_mode: str = "strict"
    link_weights: tuple = (0.6, 0.2, 0.2)
    link_threshold: float = 0.5
    language: str = "en"
    hop_limit: int = 2
    cap: int = 40
    allowlist: tuple = ()
    max_repairs: int = 1
    token_budget: int = 8000
    functional_predicates: tuple = ()
    opposing_pairs: tuple = ()
    partition_base: str = "urn:lag:partition:"

    def fingerprint(self) -> str:
        """Stable digest over the resolved configuration."""
        payload = json.dumps(self.__dict__, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _resolve(base: Path, value: str) -> str:
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    return str(path)


def _require_file(path: str, what: str) -> str:
    if not Path(path).is_file():
        raise ConfigError(f"{what} does not exist: {path}")
    return path


def config_path_from_env(explicit: str = "") -> str:
    path = explicit or os.environ.get(ENV_VAR, "")
    if not path:
        raise ConfigError(f"no config path given and {ENV_VAR} is not set")
    return path


def load_config(path) -> LagConfig:
    """Parse and validate the JSON config; relative paths follow the file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    base = path.parent

    def need(key: str) -> str:
        if key not in raw or not isinstance(raw[key], str):
            raise ConfigError(f"config needs a string field {key!r}")
        return raw[key]

    prompts = raw.get("prompts", {})
    if not isinstance(prompts, dict) or not prompts.get("task") or not prompts.get("contract"):
        raise ConfigError("config needs prompts.task and prompts.contract")
    stages = prompts.get("stages", [])
    if not isinstance(stages, list):
        raise ConfigError("prompts.stages must be a list of paths")

    provider_raw = raw.get("provider", {})
    kind = provider_raw.get("kind", "mock")
    if kind not in ("mock", "http"):
        raise ConfigError(f"unknown provider kind {kind!r}")
    if kind == "mock":
        script_dir = _resolve(base, provider_raw.get("script_dir", ""))
        if not Path(script_dir).is_dir():
            raise ConfigError(f"mock provider script_dir does not exist: {script_dir}")
        provider = ProviderSettings(kind="mock", script_dir=script_dir)
    else:
        if not provider_raw.get("base_url") or not provider_raw.get("model"):
            raise ConfigError("http provider needs base_url and model")
        provider = ProviderSettings(
            kind="http",
            base_url=provider_raw["base_url"],
            model=provider_raw["model"],
            auth_env=provider_raw.get("auth_env", ""),
            timeout=float(provider_raw.get("timeout", 30.0)),
            retries=int(provider_raw.get("retries", 2)),
        )

    linking = raw.get("linking", {})
    weights = tuple(linking.get("weights", (0.6, 0.2, 0.2)))
    if len(weights) != 3 or abs(sum(weights) - 1.0) > 1e-9:
        raise ConfigError(f"linking weights must be three numbers summing to 1: {weights!r}")
    threshold = float(linking.get("threshold", 0.5))

    context = raw.get("context", {})
    hop_limit = int(context.get("hop_limit", 2))
    cap = int(context.get("cap", 40))
    if hop_limit < 0 or cap < 0:
        raise ConfigError("context hop_limit and cap must be >= 0")
    allowlist = tuple(context.get("allowlist", ()))

    mode = raw.get("boundary_mode", "strict")
    if mode not in MODES:
        raise ConfigError(f"unknown boundary mode {mode!r}")

    conflicts = raw.get("conflicts", {})
    opposing = []
    for pair in conflicts.get("opposing", []):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"opposing pairs must be two-element lists: {pair!r}")
        opposing.append(tuple(pair))

    config = LagConfig(
        schema_path=_require_file(_resolve(base, need("schema")), "schema"),
        lexicon_path=_require_file(_resolve(base, need("lexicon")), "lexicon"),
        kb_path=_require_file(_resolve(base, need("kb_snapshot")), "kb snapshot"),
        type_map_path=_require_file(_resolve(base, need("type_map")), "type map"),
        task_path=_require_file(_resolve(base, prompts["task"]), "task prompt"),
        contract_path=_require_file(_resolve(base, prompts["contract"]), "output contract"),
        stage_paths=tuple(
            _require_file(_resolve(base, s), "stage prompt") for s in stages
        ),
        provider=provider,
        boundary_mode=mode,
        link_weights=weights,
        link_threshold=threshold,
        language=linking.get("language", "en"),
        hop_limit=hop_limit,
        cap=cap,
        allowlist=allowlist,
        max_repairs=int(raw.get("max_repairs", 1)),
        token_budget=int(raw.get("token_budget", 8000)),
        functional_predicates=tuple(conflicts.get("functional", ())),
        opposing_pairs=tuple(opposing),
        partition_base=raw.get("partition_base", "urn:lag:partition:"),
    )
    return config
