"""Adaptive semantic column type detection.

A hybrid pipeline of header, regex, dictionary and learned estimators over
column embeddings, plus an adaptation loop that turns a single human
correction into weakly-supervised training data via ANN retrieval.
"""

__version__ = "0.1.0"

from adatyper.core import (
    Column,
    Table,
    SemanticType,
    TypeCatalog,
    Prediction,
    LabeledColumn,
    TrainingCorpus,
)

__all__ = [
    "Column",
    "Table",
    "SemanticType",
    "TypeCatalog",
    "Prediction",
    "LabeledColumn",
    "TrainingCorpus",
]
