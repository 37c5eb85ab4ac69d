"""Adaptation loop: one human correction -> weakly-supervised retraining.

The corrected column is embedded, its k approximate nearest neighbors are
retrieved from the index and labeled with the corrected type, the corpus is
extended (append-only), the catalog gains the type if new, and the classifier
is retrained. Dictionary and regex estimators adapt alongside.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

from adatyper.core import (
    Column,
    TypeCatalog,
    SemanticType,
    TrainingCorpus,
    LabeledColumn,
    NULL_TYPE,
)
from adatyper.errors import AdaTyperError
from adatyper.index import HnswIndex
from adatyper.learn import ForestConfig, TypeForest, retrain
from adatyper.match import RegexRule, ValueDictionary, top_values


@dataclass(frozen=True)
class Feedback:
    column: Column
    corrected_type: str
    is_new_type: bool = False
    user_regex: str | None = None

    def validate(self, catalog: TypeCatalog) -> None:
        if self.corrected_type == NULL_TYPE:
            raise AdaTyperError("cannot adapt towards the reserved background type")
        if self.is_new_type and self.corrected_type in catalog:
            raise AdaTyperError(f"type {self.corrected_type!r} already exists in the catalog")
        if not self.is_new_type and self.corrected_type not in catalog:
            raise AdaTyperError(
                f"type {self.corrected_type!r} not in catalog; pass is_new_type for new types"
            )


@dataclass
class AdaptReport:
    cycle: int
    corrected_type: str
    is_new_type: bool
    retrieved: list[dict]  # [{"column_id": ..., "similarity": ...}]
    requested_k: int
    corpus_delta: int
    new_catalog_version: int
    retrain_seconds: float
    shortfall: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AdaptOptions:
    k: int = 5
    min_similarity: float | None = None  # optional floor on weak-label neighbors
    dictionary_top_m: int = 10
    insert_example_into_index: bool = True


def adapt(
    feedback: Feedback,
    index: HnswIndex,
    corpus: TrainingCorpus,
    catalog: TypeCatalog,
    forest_cfg: ForestConfig,
    embedder,
    options: AdaptOptions | None = None,
    cycle: int | None = None,
) -> tuple[TypeCatalog, TrainingCorpus, TypeForest, AdaptReport]:
    """One adaptation cycle. The catalog is mutated in place (versioned);

    corpus and forest are returned as new objects, leaving prior versions
    intact for auditability.
    """
    options = options or AdaptOptions()
    if options.k < 1:
        raise AdaTyperError("k must be >= 1")
    if len(index) == 0:
        raise AdaTyperError("cannot adapt against an empty index")
    feedback.validate(catalog)

    example_emb = embedder.embed_column(feedback.column)
    if example_emb.is_zero:
        raise AdaTyperError(
            "the example column has no non-empty values, so it cannot be embedded; "
            "pick a column with data"
        )

    this_cycle = cycle if cycle is not None else max((it.cycle for it in corpus.items), default=0) + 1

    neighbors = index.query_nodes(example_emb.vector, options.k)
    if options.min_similarity is not None:
        neighbors = [(n, p, s) for n, p, s in neighbors if s >= options.min_similarity]
    shortfall = len(neighbors) < options.k

    if feedback.is_new_type:
        catalog.add_type(SemanticType(feedback.corrected_type, "user-defined"))

    new_items = [
        LabeledColumn(
            embedding=index.vector_of(node),
            type_name=feedback.corrected_type,
            provenance="weak",
            cycle=this_cycle,
            column_id=str(p.get("column_id", "")),
        )
        for node, p, _sim in neighbors
    ]
    example_item = LabeledColumn(
        embedding=example_emb.vector,
        type_name=feedback.corrected_type,
        provenance="example",
        cycle=this_cycle,
        column_id=feedback.column.source_table_id,
    )
    new_corpus = corpus.extended(new_items + [example_item], catalog.version)

    t0 = time.perf_counter()
    new_forest = retrain(forest_cfg, new_corpus)
    retrain_seconds = time.perf_counter() - t0

    if options.insert_example_into_index:
        index.insert(
            example_emb.vector,
            {
                "column_id": feedback.column.source_table_id,
                "type": feedback.corrected_type,
            },
        )

    report = AdaptReport(
        cycle=this_cycle,
        corrected_type=feedback.corrected_type,
        is_new_type=feedback.is_new_type,
        retrieved=[
            {"column_id": str(p.get("column_id", "")), "similarity": float(s)}
            for _n, p, s in neighbors
        ],
        requested_k=options.k,
        corpus_delta=len(new_items) + 1,
        new_catalog_version=catalog.version,
        retrain_seconds=retrain_seconds,
        shortfall=shortfall,
    )
    return catalog, new_corpus, new_forest, report


def adapt_dictionary(feedback: Feedback, dictionary: ValueDictionary, top_m: int = 10) -> ValueDictionary:
    """Merge the example column's most common values into the type's entry set.

    Runs on every feedback; idempotent for a repeated column (set union).
    """
    dictionary.add_values(feedback.corrected_type, top_values(feedback.column, top_m))
    return dictionary


def adapt_regex(feedback: Feedback, rules: list[RegexRule]) -> list[RegexRule]:
    """Append/replace the user-supplied rule for the corrected type.

    At most one user rule per type is kept; built-in starter rules for other
    types are untouched. Invalid patterns are rejected before any mutation.
    """
    if not feedback.user_regex:
        return rules
    new_rule = RegexRule(feedback.corrected_type, feedback.user_regex, user=True)
    kept = [r for r in rules if not (r.user and r.type_name == feedback.corrected_type)]
    return kept + [new_rule]
