"""JSON parser using msgspec."""

from pathlib import Path
from typing import Any

import msgspec
import msgspec.json

from pconduct.errors import ConfigError


class JsonParser:
    """Decodes straight into a msgspec.Struct when one is requested."""

    @staticmethod
    def can_parse(path: Path) -> bool:
        return path.suffix.lower() == ".json"

    @staticmethod
    def parse(content: bytes, target_type: type | None = None) -> Any:
        try:
            if isinstance(target_type, type) and issubclass(target_type, msgspec.Struct):
                return msgspec.json.decode(content, type=target_type)
            return msgspec.json.decode(content)
        except msgspec.ValidationError as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc
        except msgspec.DecodeError as exc:
            raise ConfigError(f"Invalid JSON: {exc}") from exc
