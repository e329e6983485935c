"""Project defaults from ``[tool.pconduct]`` in the nearest pyproject.toml."""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

from pconduct.config.loader import convert, deep_merge
from pconduct.config.schema import Defaults

__all__ = ["find_pyproject", "resolve_defaults"]


def find_pyproject(start: str | Path | None = None) -> Path | None:
    """Walk up from ``start`` (default: the working directory) to a pyproject.toml."""
    here = Path(start or Path.cwd()).resolve()
    for directory in (here, *here.parents):
        candidate = directory / "pyproject.toml"
        if candidate.is_file():
            return candidate
    return None


def resolve_defaults(start: str | Path | None = None, scene_table: dict | None = None) -> Defaults:
    """Built-in defaults, then ``[tool.pconduct]``, then a scene file's ``[defaults]`` table.

    Command-line flags take precedence over all three; the CLI applies
    them on top.
    """
    table: dict = {}
    source = "built-in defaults"
    path = find_pyproject(start)
    if path is not None:
        with path.open("rb") as fh:
            table = tomllib.load(fh).get("tool", {}).get("pconduct", {})
        source = f"{path} [tool.pconduct]"
    if scene_table:
        table = deep_merge(table, scene_table)
        source += " and the scene [defaults] table"
    return convert(table, Defaults, source)
