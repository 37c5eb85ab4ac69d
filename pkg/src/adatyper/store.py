"""Versioned on-disk persistence for the running system.

Layout under a data directory:

    manifest.json         current cycle + file map + config echo
    catalog.json
    corpus-v{i}.json      labeled embeddings per adaptation cycle
    model-v{i}.json
    index-v{i}.npz
    dictionary.jsonl
    rules.jsonl
    tables/{id}.json      uploaded tables
    history/cycle-{i}.json

Old cycle files are never deleted, so any past model/corpus version stays
loadable.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from adatyper.config import RunConfig
from adatyper.core import Column, Table, TypeCatalog, TrainingCorpus, LabeledColumn
from adatyper.errors import LoadError
from adatyper.index import HnswIndex
from adatyper.learn import TypeForest
from adatyper.match import ValueDictionary, RegexRule, rules_to_jsonl, rules_from_jsonl

MANIFEST_VERSION = 1


def corpus_to_dict(corpus: TrainingCorpus) -> dict:
    return {
        "catalog_version": corpus.catalog_version,
        "items": [
            {
                "embedding": np.asarray(it.embedding, dtype=np.float64).tolist(),
                "type": it.type_name,
                "provenance": it.provenance,
                "cycle": it.cycle,
                "column_id": it.column_id,
            }
            for it in corpus.items
        ],
    }


def corpus_from_dict(d: dict) -> TrainingCorpus:
    items = [
        LabeledColumn(
            embedding=np.asarray(it["embedding"], dtype=np.float64),
            type_name=it["type"],
            provenance=it["provenance"],
            cycle=it["cycle"],
            column_id=it.get("column_id", ""),
        )
        for it in d["items"]
    ]
    return TrainingCorpus(items=items, catalog_version=d["catalog_version"])


def table_to_dict(table: Table) -> dict:
    return {
        "id": table.id,
        "columns": [{"header": c.header, "values": list(c.values)} for c in table.columns],
    }


def table_from_dict(d: dict) -> Table:
    return Table(
        d["id"],
        tuple(
            Column(c["header"], tuple(c["values"]), d["id"]) for c in d["columns"]
        ),
    )


class SystemStore:
    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "tables").mkdir(exist_ok=True)
        (self.root / "history").mkdir(exist_ok=True)

    # -- manifest ----------------------------------------------------------

    @property
    def manifest_path(self) -> Path:
        return self.root / "manifest.json"

    def exists(self) -> bool:
        return self.manifest_path.exists()

    def read_manifest(self) -> dict:
        try:
            return json.loads(self.manifest_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise LoadError(f"cannot read manifest: {exc}") from exc

    def write_manifest(self, cycle: int, config: RunConfig, catalog_version: int) -> None:
        manifest = {
            "manifest_version": MANIFEST_VERSION,
            "cycle": cycle,
            "catalog_version": catalog_version,
            "config": config.to_dict(),
        }
        self._atomic_write(self.manifest_path, json.dumps(manifest, indent=2, sort_keys=True))

    def _atomic_write(self, path: Path, text: str) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)

    # -- artifacts ---------------------------------------------------------

    def save_catalog(self, catalog: TypeCatalog) -> None:
        self._atomic_write(self.root / "catalog.json", json.dumps(catalog.to_dict(), sort_keys=True))

    def load_catalog(self) -> TypeCatalog:
        return TypeCatalog.from_dict(json.loads((self.root / "catalog.json").read_text()))

    def save_corpus(self, corpus: TrainingCorpus, cycle: int) -> None:
        self._atomic_write(self.root / f"corpus-v{cycle}.json", json.dumps(corpus_to_dict(corpus)))

    def load_corpus(self, cycle: int) -> TrainingCorpus:
        return corpus_from_dict(json.loads((self.root / f"corpus-v{cycle}.json").read_text()))

    def save_forest(self, forest: TypeForest, cycle: int) -> None:
        self._atomic_write(self.root / f"model-v{cycle}.json", forest.dumps())

    def load_forest(self, cycle: int, expected_dimension: int | None = None) -> TypeForest:
        return TypeForest.loads((self.root / f"model-v{cycle}.json").read_text(), expected_dimension)

    def save_index(self, index: HnswIndex, cycle: int) -> None:
        index.save(self.root / f"index-v{cycle}.npz")

    def load_index(self, cycle: int, expected_dimension: int | None = None) -> HnswIndex:
        return HnswIndex.load(self.root / f"index-v{cycle}.npz", expected_dimension)

    def save_dictionary(self, dictionary: ValueDictionary) -> None:
        self._atomic_write(self.root / "dictionary.jsonl", dictionary.to_jsonl())

    def load_dictionary(self) -> ValueDictionary:
        path = self.root / "dictionary.jsonl"
        if not path.exists():
            return ValueDictionary()
        return ValueDictionary.from_jsonl(path.read_text())

    def save_rules(self, rules: list[RegexRule]) -> None:
        self._atomic_write(self.root / "rules.jsonl", rules_to_jsonl(rules))

    def load_rules(self) -> list[RegexRule]:
        path = self.root / "rules.jsonl"
        if not path.exists():
            return []
        return rules_from_jsonl(path.read_text())

    def save_table(self, table: Table) -> None:
        self._atomic_write(self.root / "tables" / f"{table.id}.json", json.dumps(table_to_dict(table)))

    def load_table(self, table_id: str) -> Table | None:
        path = self.root / "tables" / f"{table_id}.json"
        if not path.exists():
            return None
        return table_from_dict(json.loads(path.read_text()))

    def table_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "tables").glob("*.json"))

    def save_history_entry(self, cycle: int, report: dict) -> None:
        self._atomic_write(self.root / "history" / f"cycle-{cycle}.json", json.dumps(report, indent=2))

    def load_history(self) -> list[dict]:
        entries = []
        for path in sorted((self.root / "history").glob("cycle-*.json"), key=lambda p: int(p.stem.split("-")[1])):
            entries.append(json.loads(path.read_text()))
        return entries
