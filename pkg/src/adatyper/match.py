"""Non-learned estimators: header matching, regex matching, dictionary lookup."""

from __future__ import annotations

import json
import re
import threading
from collections import Counter
from dataclasses import dataclass, field

from adatyper.core import Column, TypeCatalog, NULL_TYPE, normalize_header
from adatyper.embed import cosine

DEFAULT_VALUE_SAMPLE = 100


@dataclass(frozen=True)
class EstimatorResult:
    type_name: str
    confidence: float
    estimator: str

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence out of range: {self.confidence}")


class RegexRule:
    def __init__(self, type_name: str, pattern: str, full_match: bool = True, user: bool = False):
        self.type_name = type_name
        self.pattern = pattern
        self.full_match = full_match
        self.user = user
        try:
            self._compiled = re.compile(pattern)
        except re.error as exc:
            raise ValueError(f"pattern for {type_name!r} does not compile: {exc}") from exc

    def matches(self, value: str) -> bool:
        if self.full_match:
            return self._compiled.fullmatch(value) is not None
        return self._compiled.search(value) is not None

    def to_dict(self) -> dict:
        return {
            "type": self.type_name,
            "pattern": self.pattern,
            "full_match": self.full_match,
            "user": self.user,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RegexRule":
        return cls(d["type"], d["pattern"], d.get("full_match", True), d.get("user", False))


#: Starter patterns for structured types. These are ours, tuned for desk-scale
#: synthetic data, not an authoritative catalog of real-world formats.
STARTER_REGEX_RULES = [
    ("postal code", r"\d{5}(-\d{4})?"),
    ("phone number", r"\+?\d{1,3}[- ]?\(?\d{3}\)?[- ]?\d{3}[- ]?\d{4}"),
    ("email", r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}"),
    ("date", r"\d{4}-\d{2}-\d{2}|\d{1,2}/\d{1,2}/\d{4}"),
    ("year", r"(19|20)\d{2}"),
    ("latitude", r"[+-]?(90(\.0+)?|[0-8]?\d(\.\d+)?)"),
    ("longitude", r"[+-]?(180(\.0+)?|1[0-7]\d(\.\d+)?|\d{1,2}(\.\d+)?)"),
    ("percentage", r"\d{1,3}(\.\d+)?%"),
    ("currency", r"[A-Z]{3}"),
    ("country code", r"[A-Z]{2}"),
]


def starter_rules(catalog: TypeCatalog) -> list[RegexRule]:
    """The starter rules restricted to types present in the catalog."""
    return [RegexRule(t, p) for t, p in STARTER_REGEX_RULES if t in catalog]


class ValueDictionary:
    """Per-type sets of lowercase trimmed values; mutation is lock-guarded."""

    def __init__(self, entries: dict[str, set[str]] | None = None, max_entries_per_type: int = 10_000):
        self.max_entries_per_type = max_entries_per_type
        self._entries: dict[str, set[str]] = {}
        self._lock = threading.Lock()
        if entries:
            for t, values in entries.items():
                self.add_values(t, values)

    @property
    def entries(self) -> dict[str, frozenset]:
        return {t: frozenset(v) for t, v in self._entries.items()}

    def types(self) -> list[str]:
        return sorted(self._entries)

    def add_values(self, type_name: str, values) -> None:
        cleaned = {v.strip().lower() for v in values if v.strip()}
        with self._lock:
            current = self._entries.setdefault(type_name, set())
            room = self.max_entries_per_type - len(current)
            if room <= 0:
                return
            new = sorted(cleaned - current)[:room]
            current.update(new)

    def contains(self, type_name: str, value: str) -> bool:
        return value.strip().lower() in self._entries.get(type_name, ())

    def to_jsonl(self) -> str:
        lines = []
        for t in sorted(self._entries):
            lines.append(json.dumps({"type": t, "values": sorted(self._entries[t])}))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str, max_entries_per_type: int = 10_000) -> "ValueDictionary":
        d = cls(max_entries_per_type=max_entries_per_type)
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            d.add_values(rec["type"], rec["values"])
        return d


def rules_to_jsonl(rules: list[RegexRule]) -> str:
    return "".join(json.dumps(r.to_dict()) + "\n" for r in rules)


def rules_from_jsonl(text: str) -> list[RegexRule]:
    return [RegexRule.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def match_header(column: Column, catalog: TypeCatalog, embedder) -> EstimatorResult:
    """Cosine similarity between the normalized header and each type name.

    Ties broken by catalog order; an empty header abstains outright.
    """
    header = normalize_header(column.header)
    if not header:
        return EstimatorResult(NULL_TYPE, 0.0, "header")
    hv = embedder.embed_text(header).vector
    best_type, best_sim = NULL_TYPE, 0.0
    for name in catalog.names(include_null=False):
        sim = cosine(hv, embedder.embed_text(name).vector)
        if sim > best_sim:
            best_type, best_sim = name, sim
    return EstimatorResult(best_type, max(0.0, min(1.0, best_sim)), "header")


def _sampled_values(column: Column, sample: int) -> list[str]:
    out = []
    for v in column.values:
        if v == "":
            continue
        out.append(v)
        if len(out) >= sample:
            break
    return out


def match_regex(column: Column, rules: list[RegexRule], sample: int = DEFAULT_VALUE_SAMPLE) -> EstimatorResult:
    """Fraction of sampled values matching each type's pattern; max over types."""
    if sample < 1:
        raise ValueError("sample must be >= 1")
    values = _sampled_values(column, sample)
    if not values or not rules:
        return EstimatorResult(NULL_TYPE, 0.0, "regex")
    best_type, best_conf = NULL_TYPE, 0.0
    for rule in rules:  # ties broken by rule order
        matched = sum(1 for v in values if rule.matches(v))
        conf = matched / len(values)
        if conf > best_conf:
            best_type, best_conf = rule.type_name, conf
    return EstimatorResult(best_type, best_conf, "regex")


def match_dictionary(column: Column, dictionary: ValueDictionary, sample: int = DEFAULT_VALUE_SAMPLE) -> EstimatorResult:
    """Fraction of sampled lowercased values present in each type's set."""
    if sample < 1:
        raise ValueError("sample must be >= 1")
    values = _sampled_values(column, sample)
    if not values:
        return EstimatorResult(NULL_TYPE, 0.0, "dictionary")
    best_type, best_conf = NULL_TYPE, 0.0
    for type_name in dictionary.types():
        matched = sum(1 for v in values if dictionary.contains(type_name, v))
        conf = matched / len(values)
        if conf > best_conf:
            best_type, best_conf = type_name, conf
    return EstimatorResult(best_type, best_conf, "dictionary")


def populate_dictionary(corpus: list[tuple[Column, str]], top_k: int, max_entries_per_type: int = 10_000) -> ValueDictionary:
    """Top-k most frequent lowercased values per type; ties lexicographic."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    counts: dict[str, Counter] = {}
    for column, type_name in corpus:
        c = counts.setdefault(type_name, Counter())
        for v in column.values:
            v = v.strip().lower()
            if v:
                c[v] += 1
    d = ValueDictionary(max_entries_per_type=max_entries_per_type)
    for type_name, counter in counts.items():
        ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        d.add_values(type_name, [v for v, _ in ranked[:top_k]])
    return d


def top_values(column: Column, top_m: int) -> list[str]:
    """The column's top_m most frequent values (lowercased, ties lexicographic)."""
    counter = Counter(v.strip().lower() for v in column.values if v.strip())
    ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return [v for v, _ in ranked[:top_m]]
