"""Learned estimator: a bagged decision-tree ensemble over column embeddings.

Trees use axis-aligned splits chosen by Gini impurity over a random feature
subset. All randomness flows from a single seed; corpus items are put into a
canonical order (by content hash) before training, so the trained model is
invariant to the order labeled columns arrive in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from adatyper.core import TrainingCorpus
from adatyper.errors import ConfigError, LoadError, TrainingError

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 16
    min_leaf: int = 2
    features_per_split: int | None = None  # None -> ceil(sqrt(D))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")

    def resolved_features(self, dimension: int) -> int:
        if self.features_per_split is not None:
            return min(self.features_per_split, dimension)
        return min(dimension, math.ceil(math.sqrt(dimension)))


class _Tree:
    """Flat-array decision tree; leaves hold raw class-count histograms."""

    __slots__ = ("feature", "threshold", "left", "right", "hist")

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.hist: list[list[int]] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.hist.append([])
        return len(self.feature) - 1

    def leaf_distribution(self, x: np.ndarray) -> np.ndarray:
        node = 0
        while self.feature[node] >= 0:
            if x[self.feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        h = np.asarray(self.hist[node], dtype=np.float64)
        return h / h.sum()

    def to_dict(self) -> dict:
        return {
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left,
            "right": self.right,
            "hist": self.hist,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "_Tree":
        t = cls()
        t.feature = list(d["feature"])
        t.threshold = [float(x) for x in d["threshold"]]
        t.left = list(d["left"])
        t.right = list(d["right"])
        t.hist = [list(map(int, h)) for h in d["hist"]]
        return t


def best_gini_split(
    X: np.ndarray, y: np.ndarray, n_classes: int, features, min_leaf: int
) -> tuple[int, float] | None:
    """Best (feature, threshold) among `features` by Gini; None if no valid split.

    Score maximized is sum over children of (sum_c count_c^2)/n_child, which
    orders splits identically to weighted Gini. Ties resolve to the earliest
    feature in the given order, then the smallest threshold.
    """
    n = len(y)
    best = None
    best_score = -1.0
    for f in features:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        counts = np.zeros((n, n_classes), dtype=np.int64)
        counts[np.arange(n), ys] = 1
        prefix = np.cumsum(counts, axis=0)
        total = prefix[-1]
        # candidate boundaries: between distinct consecutive values
        for i in range(min_leaf - 1, n - min_leaf):
            if xs[i] == xs[i + 1]:
                continue
            left = prefix[i]
            right = total - left
            n_l = i + 1
            n_r = n - n_l
            score = float(np.dot(left, left)) / n_l + float(np.dot(right, right)) / n_r
            if score > best_score:
                best_score = score
                best = (int(f), float((xs[i] + xs[i + 1]) / 2.0))
    if best is None:
        return None
    # reject splits no better than keeping the node whole
    total_counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_score = float(np.dot(total_counts, total_counts)) / n
    if best_score <= parent_score + 1e-12:
        return None
    return best


class TypeForest:
    def __init__(
        self,
        trees: list[_Tree],
        class_index: tuple[str, ...],
        config: ForestConfig,
        dimension: int,
        trained_catalog_version: int,
    ):
        self.trees = trees
        self.class_index = class_index
        self.config = config
        self.dimension = dimension
        self.trained_catalog_version = trained_catalog_version

    def predict_proba(self, emb: np.ndarray) -> dict[str, float]:
        emb = np.asarray(emb, dtype=np.float64)
        if emb.shape != (self.dimension,):
            raise ConfigError(
                f"embedding dimension mismatch: expected {self.dimension}, got {emb.shape}"
            )
        acc = np.zeros(len(self.class_index), dtype=np.float64)
        for tree in self.trees:
            acc += tree.leaf_distribution(emb)
        acc /= len(self.trees)
        return {name: float(p) for name, p in zip(self.class_index, acc)}

    def classify(self, emb: np.ndarray) -> tuple[str, float]:
        """(argmax type, max probability); ties resolve to class_index order."""
        proba = self.predict_proba(emb)
        best_type = max(self.class_index, key=lambda t: (proba[t], -self.class_index.index(t)))
        return best_type, proba[best_type]

    def to_dict(self) -> dict:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "config": asdict(self.config),
            "class_index": list(self.class_index),
            "dimension": self.dimension,
            "trained_catalog_version": self.trained_catalog_version,
            "trees": [t.to_dict() for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict, expected_dimension: int | None = None) -> "TypeForest":
        if d.get("format_version") != MODEL_FORMAT_VERSION:
            raise LoadError(f"unsupported model format version {d.get('format_version')}")
        if expected_dimension is not None and d["dimension"] != expected_dimension:
            raise LoadError(
                f"model embedder dimension {d['dimension']} does not match configured {expected_dimension}"
            )
        return cls(
            trees=[_Tree.from_dict(t) for t in d["trees"]],
            class_index=tuple(d["class_index"]),
            config=ForestConfig(**d["config"]),
            dimension=d["dimension"],
            trained_catalog_version=d["trained_catalog_version"],
        )

    @classmethod
    def loads(cls, text: str, expected_dimension: int | None = None) -> "TypeForest":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LoadError(f"model file is not valid JSON: {exc}") from exc
        return cls.from_dict(d, expected_dimension)


def _grow(
    tree: _Tree,
    X: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    depth: int,
    n_classes: int,
    cfg: ForestConfig,
    fps: int,
    rng: np.random.Generator,
) -> int:
    node = tree._new_node()
    sub_y = y[idx]
    hist = np.bincount(sub_y, minlength=n_classes)
    split = None
    if depth < cfg.max_depth and len(idx) >= 2 * cfg.min_leaf and np.count_nonzero(hist) > 1:
        features = np.sort(rng.choice(X.shape[1], size=fps, replace=False))
        split = best_gini_split(X[idx], sub_y, n_classes, features, cfg.min_leaf)
    if split is None:
        tree.hist[node] = hist.tolist()
        return node
    f, thr = split
    tree.feature[node] = f
    tree.threshold[node] = thr
    mask = X[idx, f] <= thr
    tree.left[node] = _grow(tree, X, y, idx[mask], depth + 1, n_classes, cfg, fps, rng)
    tree.right[node] = _grow(tree, X, y, idx[~mask], depth + 1, n_classes, cfg, fps, rng)
    return node


def train_forest(corpus: TrainingCorpus, cfg: ForestConfig) -> TypeForest:
    if not corpus.items:
        raise TrainingError("cannot train on an empty corpus")
    # canonical order: training is invariant to corpus permutation
    items = sorted(corpus.items, key=lambda it: (it.content_hash(), it.provenance, it.cycle))
    class_index = tuple(sorted({it.type_name for it in items}))
    if len(class_index) < 2:
        raise TrainingError(f"need >= 2 classes to train, got {class_index}")
    label_of = {name: i for i, name in enumerate(class_index)}
    X = np.stack([np.asarray(it.embedding, dtype=np.float64) for it in items])
    y = np.asarray([label_of[it.type_name] for it in items], dtype=np.int64)
    n, dim = X.shape
    fps = cfg.resolved_features(dim)
    trees = []
    for t in range(cfg.n_trees):
        rng = np.random.default_rng([cfg.seed, t])
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        tree = _Tree()
        _grow(tree, X, y, np.asarray(idx), 0, len(class_index), cfg, fps, rng)
        trees.append(tree)
    return TypeForest(trees, class_index, cfg, dim, corpus.catalog_version)


def retrain(cfg: ForestConfig, corpus: TrainingCorpus) -> TypeForest:
    """Full retrain on the (possibly adapted) corpus; same contract as train_forest."""
    return train_forest(corpus, cfg)
