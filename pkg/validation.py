"""Run configuration validation driven by config_schema.json."""

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from errors import ConfigError, LagError
from models import FamilyId, RunConfig, parse_q

SCHEMA_PATH = Path(__file__).resolve().parent / "config_schema.json"

TRUE_STRINGS = ("1", "true", "yes", "on")
FALSE_STRINGS = ("0", "false", "no", "off", "")


@lru_cache(maxsize=None)
def load_schema(path: str = str(SCHEMA_PATH)) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def normalize_input_schema(input_schema: Any) -> List[Dict[str, Any]]:
    """Flatten a JSON Schema object into a field list [{name, type, required, enum, minimum, items}].

    A list of field descriptors is returned as is.
    """
    if not input_schema:
        return []
    if isinstance(input_schema, list):
        return input_schema

    properties = input_schema.get("properties", {})
    required = input_schema.get("required", [])
    fields = []
    for name, spec in properties.items():
        if not isinstance(spec, dict):
            continue
        fields.append({
            "name": name,
            "type": spec.get("type", "string"),
            "required": name in required,
            "enum": spec.get("enum"),
            "minimum": spec.get("minimum"),
            "exclusive_minimum": spec.get("exclusiveMinimum"),
            "items": spec.get("items", {}),
        })
    return fields


def _split_list(value: Any) -> List[str]:
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return [str(part).strip() for part in value]


def _coerce(value: Any, ftype: str) -> Any:
    if ftype == "string":
        return str(value).strip()
    if ftype == "integer":
        if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
            raise ValueError(value)
        return int(str(value).strip()) if isinstance(value, str) else int(value)
    if ftype == "number":
        return float(value)
    if ftype == "boolean":
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in TRUE_STRINGS:
            return True
        if text in FALSE_STRINGS:
            return False
        raise ValueError(value)
    if ftype == "array":
        return _split_list(value)
    return value


def validate_against_schema(
    data: Dict[str, Any], schema: Any
) -> Tuple[Dict[str, Any], List[str]]:
    """
    Validate and coerce `data` according to `schema`.

    Returns a tuple (validated_data, errors). Unknown keys are reported as errors.
    """
    fields = normalize_input_schema(schema)
    known = {f["name"] for f in fields}
    validated: Dict[str, Any] = {}
    errors: List[str] = [f"unknown setting {key!r}" for key in data if key not in known]

    for field in fields:
        name = field["name"]
        val = data.get(name)
        if val is None or (isinstance(val, str) and not val.strip() and field["type"] != "boolean"):
            if field.get("required"):
                errors.append(f"{name} is required")
            continue

        try:
            v = _coerce(val, field["type"])
        except (TypeError, ValueError):
            errors.append(f"{name} failed to coerce to {field['type']}")
            continue

        if field.get("enum") is not None and v not in field["enum"]:
            errors.append(f"{name} must be one of {', '.join(map(str, field['enum']))} (got {v!r})")
            continue
        if field.get("minimum") is not None and v < field["minimum"]:
            errors.append(f"{name} must be >= {field['minimum']} (got {v!r})")
            continue
        if field.get("exclusive_minimum") is not None and not v > field["exclusive_minimum"]:
            errors.append(f"{name} must be > {field['exclusive_minimum']} (got {v!r})")
            continue
        if field["type"] == "array":
            if not v:
                errors.append(f"{name} must not be empty")
                continue
            allowed = (field.get("items") or {}).get("enum")
            if name == "q":
                try:
                    v = [parse_q(item) for item in v]
                except ValueError:
                    errors.append(f"q must be a subset of 1, 2, inf (got {', '.join(v)})")
                    continue
            elif allowed is not None:
                bad = [item for item in v if item not in allowed]
                if bad:
                    errors.append(f"{name} contains unknown entries: {', '.join(bad)}")
                    continue

        validated[name] = v

    return validated, errors


def _dedupe(values: List[Any]) -> List[Any]:
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def validate_run_config(config: Dict[str, Any], n: Optional[int] = None) -> RunConfig:
    """
    Coerce a raw configuration and check its domain rules.

    Args:
        config: Raw settings (strings from env/CLI are accepted)
        n: Series length index once the data is known; enables the lag check

    Returns:
        The coerced RunConfig

    Raises:
        ConfigError: every violation, joined in one message
        LagError: when the only problem is L outside 1 <= L < n
    """
    validated, errors = validate_against_schema(config, load_schema())
    if "q" in validated:
        validated["q"] = _dedupe(validated["q"])
    if "families" in validated:
        validated["families"] = [FamilyId.from_tag(tag).value for tag in _dedupe(validated["families"])]
    if "tol_rel" in validated and not math.isfinite(validated["tol_rel"]):
        errors.append("tol_rel must be finite")

    lag_error = None
    if n is not None and "lag" in validated and not 1 <= validated["lag"] < n:
        lag_error = f"lag L={validated['lag']} must satisfy 1 <= L < n={n}"
        errors.append(lag_error)

    if errors:
        message = "; ".join(errors)
        if errors == [lag_error]:
            raise LagError(message)
        raise ConfigError(message)
    return RunConfig(**validated)
