"""Run configuration: one serializable object, file + environment overrides.

Precedence: built-in defaults < config file < environment variables
(ADATYPER_*) < explicit CLI flags.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, asdict
from pathlib import Path

from adatyper.embed import EmbedderConfig
from adatyper.index import HnswConfig
from adatyper.learn import ForestConfig
from adatyper.pipeline import PipelineConfig, DEFAULT_THRESHOLDS


@dataclass
class RunConfig:
    seed: int = 0
    data_dir: str = "adatyper-data"
    port: int = 8008
    host: str = "127.0.0.1"
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    forest: ForestConfig = field(default_factory=ForestConfig)
    hnsw: HnswConfig = field(default_factory=HnswConfig)
    adapt_k: int = 5
    delimiter: str = ","

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig.from_thresholds(self.thresholds)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        kwargs = dict(d)
        if "embedder" in kwargs and isinstance(kwargs["embedder"], dict):
            kwargs["embedder"] = EmbedderConfig(**kwargs["embedder"])
        if "forest" in kwargs and isinstance(kwargs["forest"], dict):
            kwargs["forest"] = ForestConfig(**kwargs["forest"])
        if "hnsw" in kwargs and isinstance(kwargs["hnsw"], dict):
            kwargs["hnsw"] = HnswConfig(**kwargs["hnsw"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path | None = None, env: dict | None = None) -> "RunConfig":
        d: dict = {}
        if path is not None:
            d = json.loads(Path(path).read_text())
        cfg = cls.from_dict(d)
        return cfg.with_env_overrides(env)

    def with_env_overrides(self, env: dict | None = None) -> "RunConfig":
        env = os.environ if env is None else env
        out = RunConfig.from_dict(self.to_dict())
        if "ADATYPER_PORT" in env:
            out.port = int(env["ADATYPER_PORT"])
        if "ADATYPER_HOST" in env:
            out.host = env["ADATYPER_HOST"]
        if "ADATYPER_DATA_DIR" in env:
            out.data_dir = env["ADATYPER_DATA_DIR"]
        if "ADATYPER_SEED" in env:
            out.seed = int(env["ADATYPER_SEED"])
        if "ADATYPER_EMBEDDER_PROVIDER" in env:
            e = asdict(out.embedder)
            e["provider"] = env["ADATYPER_EMBEDDER_PROVIDER"]
            out.embedder = EmbedderConfig(**e)
        for est in ("header", "regex", "dictionary", "classifier"):
            key = f"ADATYPER_TAU_{est.upper()}"
            if key in env:
                out.thresholds[est] = float(env[key])
        return out

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
