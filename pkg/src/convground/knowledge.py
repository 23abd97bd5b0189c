"""Tabular knowledge schema, canonicalization, and equivalence judging.

A piece of grounded knowledge describes a tabular dataset: what the table is
about, how large it is, and per-column properties. Raw extraction output
arrives in several shorthand forms and is canonicalized into
:class:`GroundedKnowledge` before anything else touches it. Equivalence
between two knowledge objects is judged through token-set comparison of the
surface terms, so "area in km2" and "area" count as the same column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Sequence, Union

Scalar = Union[int, float, str]


class SchemaError(ValueError):
    """A raw knowledge tree does not fit the tabular schema."""


# Closed lists, fixed so that the judge reproduces the shipped sample verdicts.
STOPWORDS = frozenset({
    "of", "the", "a", "an", "in", "on", "about", "for", "and",
    "information", "data", "short", "text",
})

_UNIT_TOKEN = re.compile(r"^(?:km2|m2|kg|km|m|%)$")
_NUMERIC_TOKEN = re.compile(r"^\d+(?:[.,]\d+)?$")
_NON_WORD = re.compile(r"[^0-9a-z%]+")


def normalize_term(term: str) -> frozenset[str]:
    """Reduce a surface term to its set of content tokens.

    Lowercases, strips punctuation, and drops stopwords, unit tokens, and
    purely numeric tokens. The result may be empty.
    """
    tokens = _NON_WORD.sub(" ", term.lower()).split()
    return frozenset(
        t for t in tokens
        if t not in STOPWORDS
        and not _UNIT_TOKEN.match(t)
        and not _NUMERIC_TOKEN.match(t)
    )


def terms_equivalent(a: str, b: str) -> bool:
    """True iff one side's content tokens are a non-empty subset of the other's."""
    sa, sb = normalize_term(a), normalize_term(b)
    if not sa or not sb:
        return False
    return sa <= sb or sb <= sa


_COLUMN_FIELDS = ("description", "values", "distinct_count", "min_value", "max_value")


@dataclass(frozen=True)
class ColumnKnowledge:
    """Everything known about one column of the table."""

    column_name: str
    description: Optional[str] = None
    values: Optional[tuple[Scalar, ...]] = None
    distinct_count: Optional[int] = None
    min_value: Optional[Scalar] = None
    max_value: Optional[Scalar] = None

    def __post_init__(self) -> None:
        if not self.column_name.strip():
            raise ValueError("column_name must be non-empty")
        if self.values is not None and not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))
        if (
            self.min_value is not None
            and self.max_value is not None
            and self.min_value > self.max_value
        ):
            raise ValueError(
                f"min_value {self.min_value} exceeds max_value {self.max_value}"
            )

    def fields(self) -> dict[str, Any]:
        """The populated fields beyond the name."""
        return {
            name: getattr(self, name)
            for name in _COLUMN_FIELDS
            if getattr(self, name) is not None
        }

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"column_name": self.column_name}
        for name, value in self.fields().items():
            out[name] = list(value) if isinstance(value, tuple) else value
        return out


@dataclass(frozen=True)
class GroundedKnowledge:
    """A snapshot of what is known about the tabular dataset."""

    table_domain: Optional[str] = None
    table_content: Optional[str] = None
    row_count: Optional[int] = None
    column_count: Optional[int] = None
    column_info: tuple[ColumnKnowledge, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.column_info, tuple):
            object.__setattr__(self, "column_info", tuple(self.column_info))
        names = [c.column_name for c in self.column_info]
        for i in range(len(names)):
            for j in range(i + 1, len(names)):
                if terms_equivalent(names[i], names[j]):
                    raise ValueError(
                        f"columns {names[i]!r} and {names[j]!r} have equivalent names"
                    )

    @property
    def is_empty(self) -> bool:
        return (
            self.table_domain is None
            and self.table_content is None
            and self.row_count is None
            and self.column_count is None
            and not self.column_info
        )

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for name in ("table_domain", "table_content", "row_count", "column_count"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.column_info:
            out["column_info"] = [c.to_json_dict() for c in self.column_info]
        return out


EMPTY_KNOWLEDGE = GroundedKnowledge()


# ---------------------------------------------------------------------------
# Facts: the atomic grounded elements a knowledge object decomposes into.
# ---------------------------------------------------------------------------

_SCALAR_FIELDS = ("table_domain", "table_content", "row_count", "column_count")


@dataclass(frozen=True)
class FactKey:
    """Schema path of a fact: a top-level field or one column entry."""

    field: str
    column: Optional[str] = None

    def __str__(self) -> str:
        return self.field if self.column is None else f"column:{self.column}"


@dataclass(frozen=True)
class Fact:
    key: FactKey
    value: Any  # scalar for top-level fields, ColumnKnowledge for columns


def facts(knowledge: GroundedKnowledge) -> list[Fact]:
    """Decompose knowledge into its atomic facts, in schema order."""
    out: list[Fact] = []
    for name in _SCALAR_FIELDS:
        value = getattr(knowledge, name)
        if value is not None:
            out.append(Fact(FactKey(name), value))
    for column in knowledge.column_info:
        out.append(Fact(FactKey("column", column.column_name), column))
    return out


def knowledge_from_facts(fact_list: Iterable[Fact]) -> GroundedKnowledge:
    """Rebuild a knowledge object from facts, folding equivalent columns together."""
    scalars: dict[str, Any] = {}
    columns: list[ColumnKnowledge] = []
    for fact in fact_list:
        if fact.key.field == "column":
            incoming = fact.value
            for i, existing in enumerate(columns):
                if terms_equivalent(existing.column_name, incoming.column_name):
                    columns[i] = merge_columns(existing, incoming)
                    break
            else:
                columns.append(incoming)
        else:
            scalars[fact.key.field] = fact.value
    return GroundedKnowledge(column_info=tuple(columns), **scalars)


def keys_equivalent(a: FactKey, b: FactKey) -> bool:
    if a.field != b.field:
        return False
    if a.field == "column":
        return terms_equivalent(a.column or "", b.column or "")
    return True


def merge_columns(existing: ColumnKnowledge, incoming: ColumnKnowledge) -> ColumnKnowledge:
    """Fold an incoming column entry into an existing equivalent one.

    The first-seen column name is kept stable (renaming could collide with
    other committed columns); descriptions keep the longer surface form;
    every other incoming field overwrites.
    """
    merged = dict(existing.fields())
    for name, value in incoming.fields().items():
        if name == "description" and "description" in merged:
            if len(str(value)) > len(str(merged["description"])):
                merged["description"] = value
        else:
            merged[name] = value
    return ColumnKnowledge(column_name=existing.column_name, **merged)


# ---------------------------------------------------------------------------
# Equivalence judging.
# ---------------------------------------------------------------------------

def _scalars_equivalent(a: Scalar, b: Scalar) -> bool:
    if isinstance(a, str) and isinstance(b, str):
        return a == b or terms_equivalent(a, b)
    if isinstance(a, str) or isinstance(b, str):
        return False
    return a == b


def _lists_equivalent(a: Sequence[Scalar], b: Sequence[Scalar]) -> bool:
    return _perfect_matching(list(a), list(b), _scalars_equivalent)


def _field_values_equivalent(name: str, a: Any, b: Any) -> bool:
    if name == "description":
        return a == b or terms_equivalent(str(a), str(b))
    if name == "values":
        return _lists_equivalent(a, b)
    return a == b


def columns_equivalent(a: ColumnKnowledge, b: ColumnKnowledge) -> bool:
    if not terms_equivalent(a.column_name, b.column_name):
        return False
    fa, fb = a.fields(), b.fields()
    if set(fa) != set(fb):
        return False
    return all(_field_values_equivalent(name, fa[name], fb[name]) for name in fa)


def fact_equivalent(a: Fact, b: Fact) -> bool:
    """Judge two atomic facts as semantically the same grounded element.

    Keys must agree: ``table_domain`` and ``table_content`` are never
    cross-matched, and column keys match when their names are equivalent
    terms. Numeric values compare exactly, text values through
    :func:`terms_equivalent`, and lists as multisets requiring a perfect
    one-to-one matching.
    """
    if not keys_equivalent(a.key, b.key):
        return False
    if a.key.field == "column":
        return columns_equivalent(a.value, b.value)
    if a.key.field in ("table_domain", "table_content"):
        return a.value == b.value or terms_equivalent(str(a.value), str(b.value))
    return a.value == b.value


def _perfect_matching(left: list, right: list, eq) -> bool:
    """True iff a one-to-one matching covers both lists under ``eq``."""
    if len(left) != len(right):
        return False
    used = [False] * len(right)

    def assign(i: int) -> bool:
        if i == len(left):
            return True
        for j, candidate in enumerate(right):
            if not used[j] and eq(left[i], candidate):
                used[j] = True
                if assign(i + 1):
                    return True
                used[j] = False
        return False

    return assign(0)


def knowledge_equivalent(a: GroundedKnowledge, b: GroundedKnowledge) -> bool:
    """True iff the fact sets of both sides admit a perfect matching."""
    return _perfect_matching(facts(a), facts(b), fact_equivalent)


# ---------------------------------------------------------------------------
# Canonicalization of raw extraction output.
# ---------------------------------------------------------------------------

_TOP_LEVEL_KEYS = frozenset(
    {"table_domain", "table_content", "row_count", "column_count",
     "column_info", "column_names", "column_name", *_COLUMN_FIELDS}
)
_ENTRY_KEYS = frozenset({"column_name", *_COLUMN_FIELDS})


def _as_count(name: str, value: Any) -> int:
    if isinstance(value, bool):
        raise SchemaError(f"{name}: expected a non-negative integer, got {value!r}")
    if isinstance(value, str):
        try:
            value = int(value.strip())
        except ValueError:
            raise SchemaError(f"{name}: cannot coerce {value!r} to an integer") from None
    if isinstance(value, float):
        if not value.is_integer():
            raise SchemaError(f"{name}: expected an integer, got {value!r}")
        value = int(value)
    if not isinstance(value, int):
        raise SchemaError(f"{name}: expected a non-negative integer, got {value!r}")
    if value < 0:
        raise SchemaError(f"{name}: must be non-negative, got {value}")
    return value


def _as_number(name: str, value: Any) -> Union[int, float]:
    if isinstance(value, bool):
        raise SchemaError(f"{name}: expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value.strip())
        except ValueError:
            raise SchemaError(f"{name}: cannot coerce {value!r} to a number") from None
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, (int, float)):
        raise SchemaError(f"{name}: expected a number, got {value!r}")
    return value


def _as_text(name: str, value: Any) -> str:
    if not isinstance(value, str):
        raise SchemaError(f"{name}: expected text, got {value!r}")
    return value


def _canonicalize_entry(raw: Any) -> ColumnKnowledge:
    if isinstance(raw, ColumnKnowledge):
        return raw
    if not isinstance(raw, dict):
        raise SchemaError(f"column_info entries must be objects, got {raw!r}")
    data = {k: v for k, v in raw.items() if v is not None}
    unknown = set(data) - _ENTRY_KEYS
    if unknown:
        raise SchemaError(f"unknown column key {sorted(unknown)[0]!r}")
    if "column_name" not in data:
        raise SchemaError("column entry is missing column_name")
    kwargs: dict[str, Any] = {"column_name": _as_text("column_name", data["column_name"])}
    if "description" in data:
        kwargs["description"] = _as_text("description", data["description"])
    if "values" in data:
        values = data["values"]
        if not isinstance(values, (list, tuple)):
            raise SchemaError(f"values: expected a list, got {values!r}")
        kwargs["values"] = tuple(values)
    if "distinct_count" in data:
        kwargs["distinct_count"] = _as_count("distinct_count", data["distinct_count"])
    for bound in ("min_value", "max_value"):
        if bound in data:
            kwargs[bound] = _as_number(bound, data[bound])
    try:
        return ColumnKnowledge(**kwargs)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def canonicalize(raw: Any) -> GroundedKnowledge:
    """Turn a schema-shaped tree into canonical :class:`GroundedKnowledge`.

    Accepts the shorthands used in turn annotations: a top-level
    ``column_names`` list expands to name-only column entries, and a
    top-level ``column_name`` (with any column-scoped fields alongside it)
    wraps into a single entry. Null-valued fields are dropped; numeric
    fields are coerced from numeric text; unknown keys are rejected.
    """
    if isinstance(raw, GroundedKnowledge):
        return raw
    if not isinstance(raw, dict):
        raise SchemaError(f"expected a key/value tree, got {type(raw).__name__}")
    data = {k: v for k, v in raw.items() if v is not None}
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise SchemaError(f"unknown key {sorted(unknown)[0]!r}")

    entries: list[ColumnKnowledge] = []
    if "column_names" in data:
        names = data.pop("column_names")
        if not isinstance(names, (list, tuple)):
            raise SchemaError(f"column_names: expected a list, got {names!r}")
        entries.extend(
            _canonicalize_entry({"column_name": name}) for name in names
        )
    if "column_name" in data:
        entry = {"column_name": data.pop("column_name")}
        for name in _COLUMN_FIELDS:
            if name in data:
                entry[name] = data.pop(name)
        entries.append(_canonicalize_entry(entry))
    stray = [name for name in _COLUMN_FIELDS if name in data]
    if stray:
        raise SchemaError(f"key {stray[0]!r} requires an accompanying column_name")
    if "column_info" in data:
        info = data.pop("column_info")
        if not isinstance(info, (list, tuple)):
            raise SchemaError(f"column_info: expected a list, got {info!r}")
        entries.extend(_canonicalize_entry(e) for e in info)

    # Fold duplicate columns (equivalent names) into one entry; later
    # occurrences enrich or overwrite the earlier one.
    columns: list[ColumnKnowledge] = []
    for incoming in entries:
        for i, existing in enumerate(columns):
            if terms_equivalent(existing.column_name, incoming.column_name):
                try:
                    columns[i] = merge_columns(existing, incoming)
                except ValueError as exc:
                    raise SchemaError(
                        f"column {existing.column_name!r}: {exc}"
                    ) from None
                break
        else:
            columns.append(incoming)

    kwargs: dict[str, Any] = {}
    if "table_domain" in data:
        kwargs["table_domain"] = _as_text("table_domain", data["table_domain"])
    if "table_content" in data:
        kwargs["table_content"] = _as_text("table_content", data["table_content"])
    if "row_count" in data:
        kwargs["row_count"] = _as_count("row_count", data["row_count"])
    if "column_count" in data:
        kwargs["column_count"] = _as_count("column_count", data["column_count"])

    row_count = kwargs.get("row_count")
    if row_count is not None:
        for column in columns:
            if column.distinct_count is not None and column.distinct_count > row_count:
                raise SchemaError(
                    f"column {column.column_name!r}: distinct_count "
                    f"{column.distinct_count} exceeds row_count {row_count}"
                )

    try:
        return GroundedKnowledge(column_info=tuple(columns), **kwargs)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
