"""Event schema: field names, kinds, and categorical vocabularies."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

CATEGORICAL = "categorical"
NUMERIC = "numeric"

#: Categorical id used when an event has no value for a field.
MISSING_CATEGORY = 0xFFFFFFFF


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    name: str
    kind: str  # "categorical" | "numeric"

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise SchemaError(f"field {self.name!r}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class EventSchema:
    """Describes the per-event record layout.

    ``timestamp_field`` names the single timestamp attribute; ``fields``
    are the remaining attributes. Categorical fields carry an ordered
    vocabulary; ids index into it and ``MISSING_CATEGORY`` marks absence.
    """

    timestamp_field: str
    fields: tuple[FieldSpec, ...]
    vocabularies: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate field names in schema")
        if self.timestamp_field in names:
            raise SchemaError("timestamp field must not appear in fields")
        for f in self.fields:
            if f.kind == CATEGORICAL:
                vocab = self.vocabularies.get(f.name, ())
                if len(set(vocab)) != len(vocab):
                    raise SchemaError(f"vocabulary for {f.name!r} has duplicates")
        for name in self.vocabularies:
            if name not in names:
                raise SchemaError(f"vocabulary for unknown field {name!r}")
            if self.field(name).kind != CATEGORICAL:
                raise SchemaError(f"vocabulary given for numeric field {name!r}")

    def field(self, name: str) -> FieldSpec:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def field_names(self) -> list[str]:
        return [f.name for f in self.fields]

    def categorical_fields(self) -> list[str]:
        return [f.name for f in self.fields if f.kind == CATEGORICAL]

    def numeric_fields(self) -> list[str]:
        return [f.name for f in self.fields if f.kind == NUMERIC]

    def vocabulary(self, name: str) -> tuple[str, ...]:
        if self.field(name).kind != CATEGORICAL:
            raise SchemaError(f"{name!r} is not categorical")
        return self.vocabularies.get(name, ())

    def to_json(self) -> dict:
        return {
            "timestamp_field": self.timestamp_field,
            "fields": [{"name": f.name, "kind": f.kind} for f in self.fields],
            "vocabularies": {k: list(v) for k, v in sorted(self.vocabularies.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EventSchema":
        try:
            fields = tuple(FieldSpec(f["name"], f["kind"]) for f in obj["fields"])
            vocabs = {k: tuple(v) for k, v in obj.get("vocabularies", {}).items()}
            return cls(obj["timestamp_field"], fields, vocabs)
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed schema document: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "EventSchema":
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema is not valid JSON: {exc}") from exc
