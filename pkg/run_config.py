"""Layered run configuration: defaults < preset < environment < CLI flags."""

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

from dotenv import dotenv_values

from errors import ConfigError
from models import RUN_DEFAULTS, FamilyId, RunConfig, parse_q, q_label

PRESETS_PATH = Path(__file__).resolve().parent / "presets.json"

# Environment variable -> RunConfig key
ENV_KEYS = {
    "SPLINE_WEIGHTS_LAG": "lag",
    "SPLINE_WEIGHTS_Q": "q",
    "SPLINE_WEIGHTS_FAMILIES": "families",
    "SPLINE_WEIGHTS_TOL": "tol_rel",
    "SPLINE_WEIGHTS_FORMAT": "format",
    "SPLINE_WEIGHTS_WORKERS": "workers",
    "SPLINE_WEIGHTS_VERBOSE": "verbose",
}


def parse_q_list(text: str) -> List[float]:
    """'1,2,inf' -> [1.0, 2.0, inf]."""
    try:
        return [parse_q(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(str(e)) from e


def parse_family_list(text: str) -> List[FamilyId]:
    try:
        return [FamilyId.from_tag(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(str(e)) from e


def load_presets(path: Optional[str] = None) -> Dict[str, Any]:
    """Load named presets from presets.json."""
    try:
        with open(path or PRESETS_PATH, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        return {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON in presets file: {e}") from e


def environment_settings(env: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """SPLINE_WEIGHTS_* settings from `env`, or from os.environ overlaid on `.env`."""
    if env is None:
        env = {**dotenv_values(".env"), **os.environ}
    return {key: env[var] for var, key in ENV_KEYS.items() if env.get(var) not in (None, "")}


def load_run_config(
    cli_overrides: Optional[Mapping[str, Any]] = None,
    env: Optional[Mapping[str, str]] = None,
    presets_path: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Merge the configuration layers. Values are left raw; validate_run_config coerces them.

    Args:
        cli_overrides: Settings given on the command line (None values are ignored)
        env: Environment mapping; None reads os.environ and `.env`
        presets_path: Alternative presets file

    Raises:
        ConfigError: unknown preset name
    """
    cli = {k: v for k, v in (cli_overrides or {}).items() if v is not None}
    env_settings = environment_settings(env)

    merged: Dict[str, Any] = dict(RUN_DEFAULTS)
    preset_name = cli.get("preset")
    if preset_name:
        presets = load_presets(presets_path)
        if preset_name not in presets:
            available = ", ".join(sorted(presets)) or "none"
            raise ConfigError(f"unknown preset {preset_name!r} (available: {available})")
        merged.update(presets[preset_name].get("settings", {}))
        merged["preset"] = preset_name

    merged.update(env_settings)
    merged.update(cli)
    return merged


def config_echo(config: RunConfig) -> Dict[str, Any]:
    """The settings a report records as actually used."""
    return {
        "lag": config["lag"],
        "q": [q_label(q) for q in config["q"]],
        "families": list(config["families"]),
        "tol_rel": config["tol_rel"],
        "preset": config.get("preset"),
    }
