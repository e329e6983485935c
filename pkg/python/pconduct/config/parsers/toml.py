"""TOML parser using standard library."""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any

from pconduct.errors import ConfigError


class TomlParser:
    @staticmethod
    def can_parse(path: Path) -> bool:
        return path.suffix.lower() == ".toml"

    @staticmethod
    def parse(content: bytes, target_type: type | None = None) -> Any:
        # tomllib always returns a dict
        try:
            return tomllib.loads(content.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"Invalid TOML: {exc}") from exc
