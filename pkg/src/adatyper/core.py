"""Domain types: tables, columns, the type catalog, predictions, corpora."""

from __future__ import annotations

import csv
import hashlib
import io
import re
from dataclasses import dataclass, field

import numpy as np

from adatyper.errors import CatalogMismatchError, IngestError

CATEGORIES = ("geographic", "temporal", "personal", "business", "user-defined", "background")

NULL_TYPE = "null"

#: Initial catalog: ten generally relevant types plus the reserved background class.
SEED_TYPES = (
    ("city", "geographic"),
    ("country", "geographic"),
    ("postal code", "geographic"),
    ("address", "geographic"),
    ("date", "temporal"),
    ("year", "temporal"),
    ("first name", "personal"),
    ("gender", "personal"),
    ("email", "personal"),
    ("phone number", "personal"),
)


@dataclass(frozen=True)
class Column:
    """A header plus an ordered list of cell strings; missing cells are ''."""

    header: str
    values: tuple[str, ...]
    source_table_id: str = ""

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("a column needs at least one value")
        if not isinstance(self.values, tuple):
            object.__setattr__(self, "values", tuple(self.values))

    def non_empty_values(self):
        return [v for v in self.values if v != ""]


@dataclass(frozen=True)
class Table:
    id: str
    columns: tuple[Column, ...]

    def __post_init__(self):
        if len(self.columns) < 1:
            raise ValueError("a table needs at least one column")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) != 1:
            raise ValueError(f"ragged table {self.id!r}: value-list lengths {sorted(lengths)}")
        if not isinstance(self.columns, tuple):
            object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values)


@dataclass(frozen=True)
class SemanticType:
    name: str
    category: str

    def __post_init__(self):
        if self.name != self.name.lower():
            raise ValueError(f"type name must be lowercase: {self.name!r}")
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if self.name == NULL_TYPE and self.category != "background":
            raise ValueError("the reserved 'null' type must have category 'background'")


class TypeCatalog:
    """Ordered set of semantic types; every mutation bumps the version.

    Snapshots (the tuple of names at a given version) are retained so that
    artifacts trained against an older version stay auditable.
    """

    def __init__(self, types: list[SemanticType] | None = None):
        self._types: list[SemanticType] = [SemanticType(NULL_TYPE, "background")]
        self._names = {NULL_TYPE}
        self.version = 1
        self._history: dict[int, tuple[str, ...]] = {}
        if types:
            for t in types:
                if t.name == NULL_TYPE:
                    continue
                self._add(t)
        self._history[self.version] = self.names()

    @classmethod
    def default(cls) -> "TypeCatalog":
        return cls([SemanticType(n, c) for n, c in SEED_TYPES])

    def _add(self, t: SemanticType):
        if t.name in self._names:
            raise ValueError(f"duplicate type name {t.name!r}")
        self._types.append(t)
        self._names.add(t.name)
        self.version += 1

    def add_type(self, t: SemanticType) -> int:
        """Add a type and return the new catalog version."""
        self._add(t)
        self._history[self.version] = self.names()
        return self.version

    def remove_type(self, name: str) -> int:
        if name == NULL_TYPE:
            raise ValueError("the background type 'null' may never be removed")
        if name not in self._names:
            raise KeyError(name)
        self._types = [t for t in self._types if t.name != name]
        self._names.discard(name)
        self.version += 1
        self._history[self.version] = self.names()
        return self.version

    def __contains__(self, name: str) -> bool:
        return name in self._names

    def __len__(self) -> int:
        return len(self._types)

    @property
    def types(self) -> tuple[SemanticType, ...]:
        return tuple(self._types)

    def names(self, include_null: bool = True) -> tuple[str, ...]:
        return tuple(t.name for t in self._types if include_null or t.name != NULL_TYPE)

    def names_at(self, version: int) -> tuple[str, ...]:
        return self._history[version]

    def get(self, name: str) -> SemanticType:
        for t in self._types:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "types": [{"name": t.name, "category": t.category} for t in self._types],
            "history": {str(v): list(names) for v, names in self._history.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TypeCatalog":
        cat = cls.__new__(cls)
        cat._types = [SemanticType(t["name"], t["category"]) for t in d["types"]]
        cat._names = {t.name for t in cat._types}
        cat.version = d["version"]
        cat._history = {int(v): tuple(names) for v, names in d.get("history", {}).items()}
        cat._history.setdefault(cat.version, cat.names())
        return cat


ESTIMATORS = ("header", "regex", "dictionary", "classifier", "none")


@dataclass(frozen=True)
class Prediction:
    table_id: str
    column_index: int
    type_name: str
    confidence: float
    estimator: str

    def __post_init__(self):
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")
        if self.estimator == "none" and (self.type_name != NULL_TYPE or self.confidence != 0.0):
            raise ValueError("abstention must be ('null', 0, none)")

    def to_dict(self) -> dict:
        return {
            "table": self.table_id,
            "column": self.column_index,
            "type": self.type_name,
            "confidence": self.confidence,
            "estimator": self.estimator,
        }


PROVENANCES = ("seed", "weak", "example")


@dataclass(frozen=True)
class LabeledColumn:
    embedding: "np.ndarray"
    type_name: str
    provenance: str = "seed"
    cycle: int = 0
    column_id: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.provenance == "weak" and self.cycle < 1:
            raise ValueError("weak labels only arise from adaptation cycles >= 1")

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.embedding, dtype=np.float64).tobytes())
        h.update(self.type_name.encode())
        return h.hexdigest()


@dataclass
class TrainingCorpus:
    items: list[LabeledColumn]
    catalog_version: int

    def type_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for it in self.items:
            counts[it.type_name] = counts.get(it.type_name, 0) + 1
        return counts

    def extended(self, new_items: list[LabeledColumn], catalog_version: int) -> "TrainingCorpus":
        """Append-only growth across adaptation cycles."""
        return TrainingCorpus(items=list(self.items) + list(new_items), catalog_version=catalog_version)


_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def normalize_header(header: str) -> str:
    """Lowercase a header, breaking camelCase/underscore/hyphen word boundaries."""
    s = _CAMEL_RE.sub(" ", header)
    s = s.replace("_", " ").replace("-", " ")
    s = " ".join(s.lower().split())
    return s


def build_corpus(
    labeled: list[tuple[Column, str]],
    catalog: TypeCatalog,
    embedder,
    cap: int = 250,
    null_cap: int = 250,
    seed: int = 0,
    provenance: str = "seed",
) -> TrainingCorpus:
    """Embed labeled columns, capping over-represented types by uniform downsampling.

    Deterministic for a fixed seed; the per-type sample is drawn with an RNG
    derived from (seed, type name) so per-type counts are invariant to input
    order across types.
    """
    if cap < 1 or null_cap < 1:
        raise ValueError("caps must be >= 1")
    by_type: dict[str, list[tuple[int, Column]]] = {}
    for i, (col, type_name) in enumerate(labeled):
        if type_name not in catalog:
            raise CatalogMismatchError(f"type {type_name!r} not in catalog (version {catalog.version})")
        by_type.setdefault(type_name, []).append((i, col))

    items: list[LabeledColumn] = []
    for type_name in sorted(by_type):
        group = by_type[type_name]
        limit = null_cap if type_name == NULL_TYPE else cap
        if len(group) > limit:
            rng = np.random.default_rng([seed, _stable_int(type_name)])
            keep = sorted(rng.choice(len(group), size=limit, replace=False).tolist())
            group = [group[j] for j in keep]
        for i, col in group:
            emb = embedder.embed_column(col)
            items.append(
                LabeledColumn(
                    embedding=emb.vector,
                    type_name=type_name,
                    provenance=provenance,
                    column_id=col.source_table_id + f"#{i}",
                )
            )
    return TrainingCorpus(items=items, catalog_version=catalog.version)


def _stable_int(s: str) -> int:
    return int.from_bytes(hashlib.sha256(s.encode()).digest()[:8], "big")


def parse_delimited(text: str, table_id: str, delimiter: str = ",") -> Table:
    """Parse delimiter-separated text: first row = headers, UTF-8, '' = missing."""
    reader = csv.reader(io.StringIO(text), delimiter=delimiter)
    rows = list(reader)
    rows = [r for r in rows if r]  # drop fully blank lines
    if len(rows) < 2:
        raise IngestError(f"table {table_id!r}: need a header row and at least one data row")
    headers = rows[0]
    width = len(headers)
    data = rows[1:]
    for idx, row in enumerate(data, start=1):
        if len(row) != width:
            raise IngestError(
                f"table {table_id!r}: row {idx} has {len(row)} fields, expected {width}"
            )
    columns = tuple(
        Column(
            header=headers[j],
            values=tuple(row[j] for row in data),
            source_table_id=table_id,
        )
        for j in range(width)
    )
    return Table(id=table_id, columns=columns)
