import json

import numpy as np
import pytest

from adatyper.config import RunConfig
from adatyper.core import Column, Table, TypeCatalog, LabeledColumn, TrainingCorpus
from adatyper.embed import EmbedderConfig
from adatyper.errors import LoadError
from adatyper.index import HnswConfig, build_index
from adatyper.learn import ForestConfig, train_forest
from adatyper.match import RegexRule, ValueDictionary
from adatyper.store import SystemStore, corpus_from_dict, corpus_to_dict
from tests.test_learn import random_corpus


class TestRunConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.port == 8008
        assert cfg.adapt_k == 5
        assert cfg.thresholds["header"] == 0.75

    def test_file_round_trip(self, tmp_path):
        cfg = RunConfig(seed=7, port=9000, embedder=EmbedderConfig(dimension=128))
        path = tmp_path / "config.json"
        cfg.save(path)
        again = RunConfig.load(path, env={})
        assert again.seed == 7 and again.port == 9000
        assert again.embedder.dimension == 128

    def test_env_overrides(self):
        env = {
            "ADATYPER_PORT": "9999",
            "ADATYPER_SEED": "5",
            "ADATYPER_TAU_HEADER": "0.61",
        }
        cfg = RunConfig().with_env_overrides(env)
        assert cfg.port == 9999 and cfg.seed == 5
        assert cfg.thresholds["header"] == 0.61

    def test_pipeline_config_reflects_thresholds(self):
        cfg = RunConfig(thresholds={"header": 0.5, "regex": 0.2, "dictionary": 0.3, "classifier": 0.1})
        assert cfg.pipeline_config().tau_header == 0.5

    def test_nested_dicts_from_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"forest": {"n_trees": 7}, "hnsw": {"M": 4}}))
        cfg = RunConfig.load(path, env={})
        assert cfg.forest.n_trees == 7 and cfg.hnsw.M == 4


class TestSystemStore:
    def test_corpus_round_trip(self, tmp_path):
        store = SystemStore(tmp_path)
        corpus = random_corpus(n=10, d=8)
        store.save_corpus(corpus, 0)
        again = store.load_corpus(0)
        assert len(again.items) == 10
        for a, b in zip(corpus.items, again.items):
            assert a.content_hash() == b.content_hash()
            assert a.provenance == b.provenance

    def test_corpus_dict_preserves_cycles(self):
        items = [LabeledColumn(np.ones(4) / 2.0, "city", "weak", cycle=3)]
        corpus = TrainingCorpus(items=items, catalog_version=2)
        again = corpus_from_dict(corpus_to_dict(corpus))
        assert again.items[0].cycle == 3
        assert again.catalog_version == 2

    def test_forest_round_trip(self, tmp_path):
        store = SystemStore(tmp_path)
        forest = train_forest(random_corpus(n=20, d=8), ForestConfig(n_trees=3))
        store.save_forest(forest, 2)
        again = store.load_forest(2)
        assert again.dumps() == forest.dumps()

    def test_index_round_trip(self, tmp_path):
        store = SystemStore(tmp_path)
        rng = np.random.default_rng(0)
        vecs = rng.standard_normal((20, 8)).astype(np.float32)
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        idx = build_index([(v, {"i": i}) for i, v in enumerate(vecs)], HnswConfig())
        store.save_index(idx, 1)
        again = store.load_index(1)
        assert idx.query(vecs[0], 3) == again.query(vecs[0], 3)

    def test_catalog_dictionary_rules_round_trip(self, tmp_path):
        store = SystemStore(tmp_path)
        catalog = TypeCatalog.default()
        store.save_catalog(catalog)
        assert store.load_catalog().names() == catalog.names()
        d = ValueDictionary({"city": {"paris"}})
        store.save_dictionary(d)
        assert store.load_dictionary().entries == d.entries
        rules = [RegexRule("year", r"\d{4}", user=True)]
        store.save_rules(rules)
        loaded = store.load_rules()
        assert loaded[0].pattern == r"\d{4}" and loaded[0].user

    def test_missing_optional_files_default_empty(self, tmp_path):
        store = SystemStore(tmp_path)
        assert store.load_dictionary().entries == {}
        assert store.load_rules() == []

    def test_table_round_trip_and_ids(self, tmp_path):
        store = SystemStore(tmp_path)
        t = Table("t9", (Column("a", ("1", "2"), "t9"),))
        store.save_table(t)
        assert store.load_table("t9") == t
        assert store.load_table("nope") is None
        assert store.table_ids() == ["t9"]

    def test_history_ordering(self, tmp_path):
        store = SystemStore(tmp_path)
        for cycle in (2, 1, 10):
            store.save_history_entry(cycle, {"cycle": cycle})
        assert [h["cycle"] for h in store.load_history()] == [1, 2, 10]

    def test_manifest_round_trip(self, tmp_path):
        store = SystemStore(tmp_path)
        assert not store.exists()
        store.write_manifest(3, RunConfig(seed=9), catalog_version=12)
        assert store.exists()
        m = store.read_manifest()
        assert m["cycle"] == 3 and m["catalog_version"] == 12
        assert m["config"]["seed"] == 9

    def test_corrupt_manifest_is_load_error(self, tmp_path):
        store = SystemStore(tmp_path)
        store.manifest_path.write_text("{broken")
        with pytest.raises(LoadError):
            store.read_manifest()

    def test_old_versions_stay_loadable(self, tmp_path):
        store = SystemStore(tmp_path)
        c0 = random_corpus(n=5, d=8, seed=1)
        c1 = random_corpus(n=6, d=8, seed=2)
        store.save_corpus(c0, 0)
        store.save_corpus(c1, 1)
        assert len(store.load_corpus(0).items) == 5
        assert len(store.load_corpus(1).items) == 6
