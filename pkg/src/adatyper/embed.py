"""Column and text embeddings.

The reference embedder hashes character n-grams into a fixed-dimension
signed feature vector (64-bit FNV-1a, two seeds: one for the index, one for
the sign) and L2-normalizes. It is deterministic across runs and platforms,
so every downstream component (classifier, ANN index, header matcher) is
reproducible without model weights. Real language-model embedders plug in
through :class:`ExternalEmbedder` over a one-endpoint HTTP protocol.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from adatyper.core import Column
from adatyper.errors import ConfigError, RetryableError

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

# Distinct per-hash seeds so index and sign are decorrelated.
_SEED_INDEX = 0x9E3779B97F4A7C15
_SEED_SIGN = 0xC2B2AE3D27D4EB4F


def _fnv1a(data: bytes, seed: int) -> int:
    h = (_FNV_OFFSET ^ seed) & _MASK64
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True)
class ColumnEmbedding:
    vector: np.ndarray

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])

    @property
    def is_zero(self) -> bool:
        """Reserved embedding for all-empty input; the only non-unit vector."""
        return not np.any(self.vector)


@dataclass(frozen=True)
class EmbedderConfig:
    dimension: int = 256
    ngram_size: int = 3
    value_sample: int = 32
    value_truncate: int = 64
    provider: str = "reference"
    endpoint: str = ""

    def __post_init__(self):
        if self.dimension < 8:
            raise ConfigError(f"embedding dimension must be >= 8, got {self.dimension}")
        if self.ngram_size < 1:
            raise ConfigError(f"ngram size must be >= 1, got {self.ngram_size}")
        if self.provider not in ("reference", "external"):
            raise ConfigError(f"unknown embedder provider {self.provider!r}")


def serialize_column(column: Column, cfg: EmbedderConfig) -> str:
    """First `value_sample` non-empty values in document order, each truncated."""
    out = []
    for v in column.values:
        if v == "":
            continue
        out.append(v[: cfg.value_truncate])
        if len(out) >= cfg.value_sample:
            break
    return " ".join(out)


def _ngrams(text: str, n: int):
    if len(text) < n:
        if text:
            yield text
        return
    for i in range(len(text) - n + 1):
        yield text[i : i + n]


def embed_text(text: str, cfg: EmbedderConfig) -> ColumnEmbedding:
    """Signed n-gram feature hashing, L2-normalized; '' maps to the zero vector."""
    return ColumnEmbedding(_embed_cached(text, cfg.dimension, cfg.ngram_size))


@lru_cache(maxsize=65536)
def _embed_cached(text: str, dimension: int, ngram_size: int) -> np.ndarray:
    vec = np.zeros(dimension, dtype=np.float64)
    for gram in _ngrams(text, ngram_size):
        data = gram.encode("utf-8")
        idx = _fnv1a(data, _SEED_INDEX) % dimension
        sign = 1.0 if _fnv1a(data, _SEED_SIGN) & 1 else -1.0
        vec[idx] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    vec.setflags(write=False)
    return vec


def embed_column(column: Column, cfg: EmbedderConfig) -> ColumnEmbedding:
    return embed_text(serialize_column(column, cfg), cfg)


class ReferenceEmbedder:
    """Bundles a config with the hashing embedder; the default provider."""

    def __init__(self, cfg: EmbedderConfig | None = None):
        self.cfg = cfg or EmbedderConfig()

    @property
    def dimension(self) -> int:
        return self.cfg.dimension

    def embed_text(self, text: str) -> ColumnEmbedding:
        return embed_text(text, self.cfg)

    def embed_column(self, column: Column) -> ColumnEmbedding:
        return embed_column(column, self.cfg)


class ExternalEmbedder:
    """Client for an external embedding service.

    Protocol: HTTP POST to the endpoint with {"text": str}; response is
    {"vector": [float x D]} with status 200. The response is L2-normalized
    here; a dimension mismatch is a configuration error, transport failures
    are retryable.
    """

    def __init__(self, cfg: EmbedderConfig, client=None):
        if cfg.provider != "external":
            raise ConfigError("ExternalEmbedder requires provider='external'")
        if not cfg.endpoint:
            raise ConfigError("external embedder needs an endpoint URL")
        self.cfg = cfg
        if client is None:
            import httpx

            client = httpx.Client(timeout=30.0)
        self._client = client

    @property
    def dimension(self) -> int:
        return self.cfg.dimension

    def embed_text(self, text: str) -> ColumnEmbedding:
        try:
            resp = self._client.post(self.cfg.endpoint, json={"text": text})
        except Exception as exc:  # transport-level failure
            raise RetryableError(f"embedding endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise RetryableError(f"embedding endpoint returned status {resp.status_code}")
        vec = np.asarray(resp.json()["vector"], dtype=np.float64)
        if vec.shape != (self.cfg.dimension,):
            raise ConfigError(
                f"embedding dimension mismatch: expected {self.cfg.dimension}, got {vec.shape[0]}"
            )
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        return ColumnEmbedding(vec)

    def embed_column(self, column: Column) -> ColumnEmbedding:
        return self.embed_text(serialize_column(column, self.cfg))


def get_embedder(cfg: EmbedderConfig):
    if cfg.provider == "reference":
        return ReferenceEmbedder(cfg)
    return ExternalEmbedder(cfg)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
