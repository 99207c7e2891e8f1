"""Strict helpers for the declarative YAML files (profiles, targets, scenarios).

Every loader works on the same principle: read the document, consume known
keys with type checks, and reject anything left over, reporting the full
dotted key path so a typo is immediately visible.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .errors import SchemaError

SCHEMA_VERSION = 1


def load_yaml_mapping(path: str | Path) -> dict:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise SchemaError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top level must be a mapping")
    return doc


def check_schema_version(doc: dict, path: str) -> None:
    version = doc.pop("schema_version", None)
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: schema_version must be {SCHEMA_VERSION}, got {version!r}"
        )


class Section:
    """A mapping being consumed key by key; leftovers are schema errors."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise SchemaError(f"{path}: expected a mapping, got {type(data).__name__}")
        self._data = dict(data)
        self.path = path

    def take(self, key: str, kind=None, default=..., choices=None):
        if key in self._data:
            value = self._data.pop(key)
        elif default is not ...:
            return default
        else:
            raise SchemaError(f"{self.path}.{key}: required key is missing")
        if kind is not None and not self._check_kind(value, kind):
            raise SchemaError(
                f"{self.path}.{key}: expected {self._kind_name(kind)}, got {value!r}"
            )
        if choices is not None and value not in choices:
            raise SchemaError(
                f"{self.path}.{key}: must be one of {sorted(choices)}, got {value!r}"
            )
        return value

    def take_number(self, key: str, default=..., minimum=None, maximum=None) -> float:
        value = self.take(key, kind=(int, float), default=default)
        if default is not ... and value is default and not isinstance(value, (int, float)):
            return value
        value = float(value)
        if minimum is not None and value < minimum:
            raise SchemaError(f"{self.path}.{key}: must be >= {minimum}, got {value}")
        if maximum is not None and value > maximum:
            raise SchemaError(f"{self.path}.{key}: must be <= {maximum}, got {value}")
        return value

    def take_int(self, key: str, default=..., minimum=None) -> int:
        value = self.take(key, kind=int, default=default)
        if not isinstance(value, int):
            return value
        if minimum is not None and value < minimum:
            raise SchemaError(f"{self.path}.{key}: must be >= {minimum}, got {value}")
        return value

    def keys(self) -> list[str]:
        return list(self._data)

    def section(self, key: str, default=...) -> "Section":
        value = self.take(key, kind=dict, default=default)
        if not isinstance(value, dict):
            return value
        return Section(value, f"{self.path}.{key}")

    def finish(self) -> None:
        if self._data:
            unknown = sorted(self._data)
            raise SchemaError(f"{self.path}: unknown key(s) {unknown}")

    @staticmethod
    def _check_kind(value, kind) -> bool:
        if kind == (int, float):
            # bool is an int subclass but never a valid number here
            return isinstance(value, (int, float)) and not isinstance(value, bool)
        if kind is int:
            return isinstance(value, int) and not isinstance(value, bool)
        return isinstance(value, kind)

    @staticmethod
    def _kind_name(kind) -> str:
        if kind == (int, float):
            return "a number"
        return f"a {getattr(kind, '__name__', kind)}"
