"""HNSW approximate-nearest-neighbor index over unit-norm embeddings.

Cosine metric: stored vectors are unit-norm, so distance = 1 - dot(q, v).
Construction follows the standard HNSW layout: geometric level draws with
multiplier mL = 1/ln(M), per-node neighbor lists capped at M on upper layers
and 2M on layer 0. Neighbor selection is plain closest-M by default; the
diversity heuristic from the original algorithm is available via config.
"""

from __future__ import annotations

import heapq
import json
import math
import threading
import time
from dataclasses import dataclass, asdict

import numpy as np

from adatyper.errors import ConfigError, LoadError

INDEX_FORMAT_VERSION = 1


@dataclass(frozen=True)
class HnswConfig:
    M: int = 8
    ef_construction: int = 50
    ef_search: int = 50
    seed: int = 0
    max_elements: int | None = None
    selection: str = "simple"  # or "heuristic"

    def __post_init__(self):
        if self.M < 2:
            raise ConfigError("M must be >= 2")
        if self.ef_construction < 1 or self.ef_search < 1:
            raise ConfigError("ef parameters must be >= 1")
        if self.selection not in ("simple", "heuristic"):
            raise ConfigError(f"unknown neighbor selection {self.selection!r}")


class HnswIndex:
    def __init__(self, dimension: int, cfg: HnswConfig | None = None):
        self.cfg = cfg or HnswConfig()
        self.dimension = dimension
        self._vectors = np.empty((0, dimension), dtype=np.float32)
        self._payloads: list[dict] = []
        self._levels: list[int] = []
        # _neighbors[node][layer] -> list of node ids
        self._neighbors: list[list[list[int]]] = []
        self._entry: int = -1
        self._top_level: int = -1
        self._mL = 1.0 / math.log(self.cfg.M)
        self._rng = np.random.default_rng(self.cfg.seed)
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._payloads)

    @property
    def payloads(self) -> list[dict]:
        return list(self._payloads)

    # -- internals ---------------------------------------------------------

    def _dist(self, q: np.ndarray, ids) -> np.ndarray:
        return 1.0 - self._vectors[ids] @ q

    def _search_layer(self, q: np.ndarray, entry: int, ef: int, layer: int):
        """Beam search on one layer. Returns [(dist, id)] sorted ascending."""
        d0 = float(1.0 - np.dot(self._vectors[entry], q))
        visited = {entry}
        candidates = [(d0, entry)]  # min-heap
        results = [(-d0, entry)]  # max-heap on dist
        while candidates:
            d_c, c = heapq.heappop(candidates)
            if d_c > -results[0][0] and len(results) >= ef:
                break
            neigh = [u for u in self._neighbors[c][layer] if u not in visited]
            if not neigh:
                continue
            visited.update(neigh)
            dists = self._dist(q, neigh)
            worst = -results[0][0]
            for u, d_u in zip(neigh, dists.tolist()):
                if len(results) < ef or d_u < worst:
                    heapq.heappush(candidates, (d_u, u))
                    heapq.heappush(results, (-d_u, u))
                    if len(results) > ef:
                        heapq.heappop(results)
                    worst = -results[0][0]
        out = sorted((-nd, u) for nd, u in results)
        return out

    def _greedy_descent(self, q: np.ndarray, entry: int, from_layer: int, to_layer: int) -> int:
        cur = entry
        cur_d = float(1.0 - np.dot(self._vectors[cur], q))
        for layer in range(from_layer, to_layer, -1):
            changed = True
            while changed:
                changed = False
                neigh = self._neighbors[cur][layer]
                if not neigh:
                    continue
                dists = self._dist(q, neigh)
                j = int(np.argmin(dists))
                if dists[j] < cur_d:
                    cur = neigh[j]
                    cur_d = float(dists[j])
                    changed = True
        return cur

    def _select(self, q: np.ndarray, candidates: list[tuple[float, int]], m: int) -> list[int]:
        """Pick up to m neighbor ids from (dist, id) candidates sorted ascending."""
        if self.cfg.selection == "simple" or len(candidates) <= m:
            return [u for _, u in candidates[:m]]
        chosen: list[int] = []
        for d, u in candidates:
            if len(chosen) >= m:
                break
            vu = self._vectors[u]
            ok = True
            for c in chosen:
                if 1.0 - float(np.dot(vu, self._vectors[c])) < d:
                    ok = False
                    break
            if ok:
                chosen.append(u)
        if not chosen:
            chosen = [candidates[0][1]]
        return chosen

    def _shrink(self, node: int, layer: int, cap: int):
        ids = self._neighbors[node][layer]
        if len(ids) <= cap:
            return
        q = self._vectors[node]
        dists = self._dist(q, ids)
        order = np.argsort(dists, kind="stable")
        pairs = [(float(dists[i]), ids[i]) for i in order]
        self._neighbors[node][layer] = self._select(q, pairs, cap)

    # -- public API --------------------------------------------------------

    def insert(self, embedding: np.ndarray, payload: dict) -> int:
        vec = np.asarray(embedding, dtype=np.float32)
        if vec.shape != (self.dimension,):
            raise ConfigError(f"dimension mismatch: expected {self.dimension}, got {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if norm == 0:
            raise ValueError("zero vectors cannot be indexed")
        if abs(norm - 1.0) > 1e-3:
            vec = vec / norm
        with self._lock:
            if self.cfg.max_elements is not None and len(self) >= self.cfg.max_elements:
                raise ConfigError(f"index is full (max_elements={self.cfg.max_elements})")
            node = len(self._payloads)
            if node >= self._vectors.shape[0]:
                new_cap = max(64, self._vectors.shape[0] * 2)
                grown = np.empty((new_cap, self.dimension), dtype=np.float32)
                grown[: self._vectors_used()] = self._vectors[: self._vectors_used()]
                self._vectors = grown
            self._vectors[node] = vec
            self._payloads.append(dict(payload))
            level = int(-math.log(max(self._rng.random(), 1e-300)) * self._mL)
            self._levels.append(level)
            self._neighbors.append([[] for _ in range(level + 1)])

            if self._entry < 0:
                self._entry = node
                self._top_level = level
                return node

            q = self._vectors[node]
            ep = self._entry
            if self._top_level > level:
                ep = self._greedy_descent(q, ep, self._top_level, level)
            for layer in range(min(level, self._top_level), -1, -1):
                found = self._search_layer(q, ep, self.cfg.ef_construction, layer)
                cap = self.cfg.M if layer > 0 else 2 * self.cfg.M
                chosen = self._select(q, found, self.cfg.M)
                self._neighbors[node][layer] = list(chosen)
                for u in chosen:
                    self._neighbors[u][layer].append(node)
                    self._shrink(u, layer, cap)
                ep = found[0][1]
            if level > self._top_level:
                self._entry = node
                self._top_level = level
            return node

    def _vectors_used(self) -> int:
        return len(self._payloads)

    def query(self, embedding: np.ndarray, k: int, ef: int | None = None) -> list[tuple[dict, float]]:
        """Up to k (payload, cosine similarity) pairs, descending similarity."""
        if len(self) == 0:
            return []
        ef = self.cfg.ef_search if ef is None else ef
        if ef < k:
            raise ConfigError(f"ef ({ef}) must be >= k ({k})")
        vec = np.asarray(embedding, dtype=np.float32)
        if vec.shape != (self.dimension,):
            raise ConfigError(f"dimension mismatch: expected {self.dimension}, got {vec.shape}")
        norm = float(np.linalg.norm(vec))
        if norm == 0:
            return []
        q = vec / norm
        ep = self._greedy_descent(q, self._entry, self._top_level, 0)
        found = self._search_layer(q, ep, max(ef, k), 0)
        out = []
        for d, u in found[:k]:
            out.append((self._payloads[u], 1.0 - d))
        return out

    def query_nodes(self, embedding: np.ndarray, k: int, ef: int | None = None) -> list[tuple[int, dict, float]]:
        """Like query, but also yields the internal node id of each hit."""
        hits = self.query(embedding, k, ef)
        # payload dicts are identity-unique per node, so recover ids directly
        by_identity = {id(p): i for i, p in enumerate(self._payloads)}
        return [(by_identity[id(p)], p, s) for p, s in hits]

    def vector_of(self, node: int) -> np.ndarray:
        return np.array(self._vectors[node], dtype=np.float64)

    def exact_query(self, embedding: np.ndarray, k: int) -> list[tuple[dict, float]]:
        """Brute-force k-NN over all stored vectors; the recall oracle."""
        if len(self) == 0:
            return []
        q = np.asarray(embedding, dtype=np.float32)
        q = q / np.linalg.norm(q)
        sims = self._vectors[: len(self)] @ q
        order = np.argsort(-sims, kind="stable")[:k]
        return [(self._payloads[i], float(sims[i])) for i in order]

    def reachable_from_entry(self) -> int:
        """Number of nodes reachable from the entry point on layer 0."""
        if self._entry < 0:
            return 0
        seen = {self._entry}
        stack = [self._entry]
        while stack:
            u = stack.pop()
            for v in self._neighbors[u][0]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen)

    # -- persistence -------------------------------------------------------

    def save(self, path) -> None:
        meta = {
            "format_version": INDEX_FORMAT_VERSION,
            "dimension": self.dimension,
            "config": asdict(self.cfg),
            "count": len(self),
            "levels": self._levels,
            "neighbors": self._neighbors,
            "payloads": self._payloads,
            "entry": self._entry,
            "top_level": self._top_level,
        }
        meta_bytes = json.dumps(meta).encode("utf-8")
        with open(path, "wb") as f:
            np.savez(
                f,
                meta=np.frombuffer(meta_bytes, dtype=np.uint8),
                vectors=self._vectors[: len(self)],
            )

    @classmethod
    def load(cls, path, expected_dimension: int | None = None) -> "HnswIndex":
        try:
            with np.load(path) as data:
                meta = json.loads(bytes(data["meta"].tobytes()).decode("utf-8"))
                vectors = np.array(data["vectors"], dtype=np.float32)
        except Exception as exc:
            raise LoadError(f"cannot read index file {path}: {exc}") from exc
        if meta.get("format_version") != INDEX_FORMAT_VERSION:
            raise LoadError(f"unsupported index format version {meta.get('format_version')}")
        if expected_dimension is not None and meta["dimension"] != expected_dimension:
            raise LoadError(
                f"index dimension {meta['dimension']} does not match configured {expected_dimension}"
            )
        idx = cls(meta["dimension"], HnswConfig(**meta["config"]))
        idx._vectors = vectors
        idx._payloads = meta["payloads"]
        idx._levels = meta["levels"]
        idx._neighbors = meta["neighbors"]
        idx._entry = meta["entry"]
        idx._top_level = meta["top_level"]
        # restore RNG position so later inserts do not repeat level draws
        for _ in range(len(idx._payloads)):
            idx._rng.random()
        return idx


def build_index(items: list[tuple[np.ndarray, dict]], cfg: HnswConfig, dimension: int | None = None) -> HnswIndex:
    if not items and dimension is None:
        raise ConfigError("cannot infer dimension from an empty item list")
    dim = dimension if dimension is not None else len(items[0][0])
    idx = HnswIndex(dim, cfg)
    for emb, payload in items:
        idx.insert(emb, payload)
    return idx


def recall_at_k(index: HnswIndex, queries: np.ndarray, k: int, ef: int | None = None) -> float:
    """Mean fraction of exact k-NN recovered by the approximate query."""
    total = 0.0
    for q in queries:
        exact = {id(p) for p, _ in index.exact_query(q, k)}
        approx = {id(p) for p, _ in index.query(q, k, ef=max(ef or index.cfg.ef_search, k))}
        total += len(exact & approx) / max(len(exact), 1)
    return total / len(queries)


def memory_estimate_bytes(index: HnswIndex) -> int:
    vec = len(index) * index.dimension * 4
    links = sum(sum(len(l) for l in node) for node in index._neighbors) * 8
    return vec + links


def benchmark_index(
    grid: list[HnswConfig],
    n_elements: int = 2000,
    n_queries: int = 200,
    dimension: int = 64,
    k: int = 10,
    runs: int = 5,
    seed: int = 0,
) -> list[dict]:
    """Recall/latency/memory/construction-time table over a config grid.

    Each grid point is averaged over `runs` seeded repetitions on random
    unit vectors.
    """
    rows = []
    for cfg in grid:
        agg = {"recall": 0.0, "query_ms": 0.0, "build_s": 0.0, "memory_bytes": 0.0}
        for r in range(runs):
            rng = np.random.default_rng([seed, r])
            data = rng.standard_normal((n_elements, dimension)).astype(np.float32)
            data /= np.linalg.norm(data, axis=1, keepdims=True)
            queries = rng.standard_normal((n_queries, dimension)).astype(np.float32)
            queries /= np.linalg.norm(queries, axis=1, keepdims=True)
            run_cfg = HnswConfig(
                M=cfg.M,
                ef_construction=cfg.ef_construction,
                ef_search=cfg.ef_search,
                seed=r,
                selection=cfg.selection,
            )
            t0 = time.perf_counter()
            idx = build_index([(v, {"i": i}) for i, v in enumerate(data)], run_cfg)
            build_s = time.perf_counter() - t0
            t0 = time.perf_counter()
            rec = recall_at_k(idx, queries, k)
            query_ms = (time.perf_counter() - t0) * 1000.0 / n_queries
            agg["recall"] += rec
            agg["query_ms"] += query_ms
            agg["build_s"] += build_s
            agg["memory_bytes"] += memory_estimate_bytes(idx)
        rows.append(
            {
                "M": cfg.M,
                "ef_construction": cfg.ef_construction,
                "ef_search": cfg.ef_search,
                "selection": cfg.selection,
                "recall": agg["recall"] / runs,
                "query_ms": agg["query_ms"] / runs,
                "build_s": agg["build_s"] / runs,
                "memory_bytes": agg["memory_bytes"] / runs,
            }
        )
    return rows
