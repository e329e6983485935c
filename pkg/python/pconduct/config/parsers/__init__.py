"""Scene and run-file parsers with protocol-based extensibility."""

from pathlib import Path
from typing import Any, Protocol

from pconduct.errors import ConfigError


class Parser(Protocol):
    """Protocol for file format parsers."""

    @staticmethod
    def can_parse(path: Path) -> bool:
        """Return True if this parser can handle the given file."""
        ...

    @staticmethod
    def parse(content: bytes, target_type: type | None = None) -> Any:
        """Parse file content and return dict/list or typed object.

        Args:
            content: Raw file bytes to parse
            target_type: Optional type hint for direct decoding
                         (msgspec can decode JSON straight into a Struct)
        """
        ...


# Import and register all parsers
from pconduct.config.parsers.json import JsonParser  # noqa: E402
from pconduct.config.parsers.toml import TomlParser  # noqa: E402
from pconduct.config.parsers.yaml import YamlParser  # noqa: E402

# Parser registry - order matters! First match wins
PARSERS: list[type[Parser]] = [
    TomlParser,
    JsonParser,
    YamlParser,
]

SUPPORTED_SUFFIXES = (".toml", ".json", ".yaml", ".yml")


def parse_file(
    path: Path, target_type: type | None = None, content: bytes | None = None
) -> Any:
    """Parse a file with the first parser that accepts its suffix.

    Raises:
        ConfigError: If no parser handles the suffix or the content is malformed.
    """
    if content is None:
        content = path.read_bytes()

    for parser in PARSERS:
        if parser.can_parse(path):
            return parser.parse(content, target_type)

    raise ConfigError(
        f"Unsupported file extension '{path.suffix}' in {path.name}. "
        f"Supported formats: {', '.join(SUPPORTED_SUFFIXES)}"
    )
