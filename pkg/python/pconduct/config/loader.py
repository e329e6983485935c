import glob
from pathlib import Path
from typing import Any, TypeVar, get_args, get_origin, overload

import msgspec

from pconduct.config.parsers import parse_file
from pconduct.errors import ConfigError

T = TypeVar("T")


def deep_merge(base: dict, override: dict) -> dict:
    """Recursively merge two dictionaries."""
    result = base.copy()
    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value
    return result


def convert(data: Any, target_type: Any, source: str = "") -> Any:
    """msgspec.convert with schema errors reported as ConfigError."""
    try:
        return msgspec.convert(data, type=target_type)
    except msgspec.ValidationError as exc:
        where = f" in {source}" if source else ""
        raise ConfigError(f"Invalid configuration{where}: {exc}") from exc


# ==========================================
# Loader
# ==========================================
class Loader:
    """
    Loads scene and run files into msgspec structs.

    Several files matching one pattern are deep-merged in sorted order, so a
    base scene can be refined by later overrides.
    """

    @overload
    def __call__(self, pattern: str | Path, model: type[list[T]], *, merge: str = "deep") -> list[T]: ...

    @overload
    def __call__(self, pattern: str | Path, model: type[T], *, merge: str = "deep") -> T: ...

    @overload
    def __call__(self, pattern: str | Path, *, merge: str = "deep") -> Any: ...

    def __call__(self, pattern: str | Path, model: Any = None, *, merge: str = "deep") -> Any:
        return self._execute(str(pattern), model, merge)

    def __getitem__(self, model: type[T]):
        def wrapper(pattern: str | Path, *, merge: str = "deep") -> T:
            return self._execute(str(pattern), model, merge)

        return wrapper

    def _execute(self, pattern: str, type_hint: Any = None, merge: str = "deep") -> Any:
        paths = sorted(Path(p) for p in glob.glob(pattern, recursive=True))
        if not paths and not glob.has_magic(pattern):
            raise FileNotFoundError(f"File not found: {pattern}")

        # No type hint? Return raw data
        if type_hint is None:
            if len(paths) == 1:
                return parse_file(paths[0])
            return [parse_file(p) for p in paths]

        is_collection = get_origin(type_hint) is list
        model_cls = get_args(type_hint)[0] if is_collection else type_hint

        # Single file: let the parser decode straight into the struct
        if not is_collection and len(paths) == 1:
            result = parse_file(paths[0], target_type=model_cls)
            if isinstance(result, (dict, list)):
                return convert(result, model_cls, paths[0].name)
            return result

        raw_items = [parse_file(path) for path in paths]
        if is_collection:
            flat: list = []
            for item in raw_items:
                flat.extend(item if isinstance(item, list) else [item])
            return convert(flat, list[model_cls], pattern)

        if not raw_items:
            raise ConfigError(f"No data found for {pattern}")
        final = raw_items[0]
        for item in raw_items[1:]:
            if not isinstance(final, dict) or not isinstance(item, dict):
                raise ConfigError(f"Cannot merge lists into a single {model_cls.__name__}")
            final = deep_merge(final, item) if merge == "deep" else {**final, **item}
        return convert(final, model_cls, pattern)


# Global loader instance
load = Loader()
