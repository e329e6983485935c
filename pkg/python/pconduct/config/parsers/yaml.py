"""YAML parser using PyYAML (optional extra)."""

from pathlib import Path
from typing import Any

from pconduct.errors import ConfigError


class YamlParser:
    @staticmethod
    def can_parse(path: Path) -> bool:
        return path.suffix.lower() in (".yaml", ".yml")

    @staticmethod
    def parse(content: bytes, target_type: type | None = None) -> Any:
        try:
            import yaml
        except ImportError:
            raise ImportError(
                "YAML scene files require PyYAML. Install with: uv add 'pconduct[yaml]'"
            )
        try:
            return yaml.safe_load(content)
        except yaml.YAMLError as exc:
            raise ConfigError(f"Invalid YAML: {exc}") from exc
