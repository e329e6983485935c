"""Machine-readable run summaries."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Any

import msgspec
import msgspec.json

__all__ = ["write_summary", "read_summary"]


def _clean(value: Any) -> Any:
    # JSON has no NaN or infinity
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def write_summary(path: str | Path, mapping: dict[str, Any]) -> Path:
    """Write ``mapping`` as indented JSON with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    encoded = msgspec.json.encode(_clean(mapping), order="sorted")
    path.write_bytes(msgspec.json.format(encoded, indent=2) + b"\n")
    return path


def read_summary(path: str | Path) -> dict[str, Any]:
    return msgspec.json.decode(Path(path).read_bytes())
