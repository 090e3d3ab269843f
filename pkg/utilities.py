"""Utility functions: console logging, stage history tracking and number formatting."""

import hashlib
import json
import math
import sys
from typing import Any, Dict, List, Optional

SIGNIFICANT_DIGITS = 7


# Logging Utilities

def _truncate(val: Any, limit: int = 200) -> str:
    try:
        if isinstance(val, (dict, list)):
            s = json.dumps(val, ensure_ascii=False)
        else:
            s = str(val)
    except Exception:
        s = str(val)
    if len(s) > limit:
        return s[:limit - 3] + "..."
    return s


def log_event(tag: str, verbose: bool = True, **fields: Any) -> None:
    """Print one `TAG | key=value | ...` line to stderr when verbose is on."""
    if not verbose:
        return
    parts = [tag.upper()] + [f"{key}={_truncate(value)}" for key, value in fields.items()]
    print(" | ".join(parts), file=sys.stderr)


def track_stage(history: List[Dict[str, Any]], record: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Return a new history with `record` appended (the input list is left untouched)."""
    return list(history) + [record]


def log_stage_execution(
    stage: int, old_state: Dict[str, Any], new_state: Dict[str, Any], verbose: bool = True
) -> None:
    """Concise per-stage line; the stage history itself is tracked regardless of verbose."""
    if not verbose:
        return
    record = (new_state.get("stage_history") or [{}])[-1]
    old_winner = old_state.get("incumbent")
    changed = old_winner is None or old_winner is not new_state.get("incumbent")
    log_event(
        f"STAGE:S{stage}",
        verbose,
        family=new_state.get("family"),
        q=new_state.get("q"),
        challenger=record.get("challenger"),
        challenger_cost=format_number(record.get("challenger_cost")),
        winner=record.get("winner"),
        winner_cost=format_number(record.get("winner_cost")),
        changed=changed,
    )


# Number Formatting

def round_significant(value: Optional[float], digits: int = SIGNIFICANT_DIGITS) -> Optional[float]:
    """Round to `digits` significant digits; None and non-finite values pass through."""
    if value is None:
        return None
    value = float(value)
    if not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def format_number(value: Optional[float], full_precision: bool = False) -> Optional[float]:
    if value is None:
        return None
    if full_precision:
        return float(value)
    return round_significant(value)


def format_vector(values, full_precision: bool = False) -> List[float]:
    return [format_number(v, full_precision) for v in values]


# Provenance

def file_digest(path: str) -> str:
    """sha256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
