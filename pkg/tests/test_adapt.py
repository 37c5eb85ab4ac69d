import numpy as np
import pytest

from adatyper.adapt import AdaptOptions, Feedback, adapt, adapt_dictionary, adapt_regex
from adatyper.core import (
    Column,
    TypeCatalog,
    SemanticType,
    LabeledColumn,
    TrainingCorpus,
    NULL_TYPE,
    build_corpus,
)
from adatyper.errors import AdaTyperError
from adatyper.index import HnswConfig, build_index
from adatyper.learn import ForestConfig
from adatyper.match import RegexRule, ValueDictionary

FOREST_CFG = ForestConfig(n_trees=5, max_depth=6)


@pytest.fixture
def setup(embedder):
    """Small trained state: catalog, corpus, index over 30 pool columns."""
    catalog = TypeCatalog(
        [SemanticType("city", "geographic"), SemanticType("year", "temporal")]
    )
    labeled = []
    for i in range(15):
        labeled.append((Column("c", (f"cityville{i}", f"townburg{i}"), f"s{i}"), "city"))
        labeled.append((Column("y", (f"19{i:02d}", f"20{i:02d}"), f"s{i}"), "year"))
    corpus = build_corpus(labeled, catalog, embedder)
    pool = [
        Column("p", (f"zzorb-{i}", f"zzorb-{i+1}", f"zzorb-{i+2}"), f"pool{i}")
        for i in range(30)
    ]
    index = build_index(
        [(embedder.embed_column(c).vector, {"column_id": c.source_table_id}) for c in pool],
        HnswConfig(seed=1),
        dimension=embedder.dimension,
    )
    return catalog, corpus, index


class TestFeedbackValidation:
    def test_cannot_adapt_to_null(self, setup):
        catalog, _, _ = setup
        with pytest.raises(AdaTyperError):
            Feedback(Column("h", ("x",)), NULL_TYPE).validate(catalog)

    def test_new_type_must_be_new(self, setup):
        catalog, _, _ = setup
        with pytest.raises(AdaTyperError):
            Feedback(Column("h", ("x",)), "city", is_new_type=True).validate(catalog)

    def test_existing_type_must_exist(self, setup):
        catalog, _, _ = setup
        with pytest.raises(AdaTyperError):
            Feedback(Column("h", ("x",)), "isbn", is_new_type=False).validate(catalog)


class TestAdapt:
    def test_new_type_catalog_plus_one_corpus_plus_six(self, setup, embedder):
        catalog, corpus, index = setup
        n_before, v_before = len(catalog), catalog.version
        fb = Feedback(Column("h", ("zzorb-1", "zzorb-2"), "user"), "zz code", is_new_type=True)
        catalog, new_corpus, forest, report = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder, AdaptOptions(k=5)
        )
        assert len(catalog) == n_before + 1
        assert catalog.version == v_before + 1
        assert len(new_corpus.items) == len(corpus.items) + 6  # k weak + 1 example
        assert report.corpus_delta == 6
        assert "zz code" in forest.class_index

    def test_existing_type_keeps_catalog(self, setup, embedder):
        catalog, corpus, index = setup
        v_before = catalog.version
        fb = Feedback(Column("h", ("newcity", "oldcity"), "user"), "city")
        catalog, new_corpus, _f, report = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder, AdaptOptions(k=5)
        )
        assert catalog.version == v_before
        assert len(new_corpus.items) == len(corpus.items) + 6

    def test_weak_labels_carry_cycle_and_provenance(self, setup, embedder):
        catalog, corpus, index = setup
        fb = Feedback(Column("h", ("zzorb-5",), "user"), "city")
        _c, new_corpus, _f, report = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder, AdaptOptions(k=3), cycle=4
        )
        added = new_corpus.items[len(corpus.items):]
        assert [it.provenance for it in added] == ["weak"] * 3 + ["example"]
        assert all(it.cycle == 4 for it in added)
        assert report.cycle == 4

    def test_weak_embeddings_come_from_the_index(self, setup, embedder):
        catalog, corpus, index = setup
        fb = Feedback(Column("h", ("zzorb-7", "zzorb-8"), "user"), "city")
        _c, new_corpus, _f, report = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder, AdaptOptions(k=2)
        )
        weak = [it for it in new_corpus.items[len(corpus.items):] if it.provenance == "weak"]
        payload_ids = {r["column_id"] for r in report.retrieved}
        assert {it.column_id for it in weak} == payload_ids
        for it in weak:
            assert np.linalg.norm(np.asarray(it.embedding)) == pytest.approx(1.0, abs=1e-5)

    def test_example_inserted_into_index(self, setup, embedder):
        catalog, corpus, index = setup
        n = len(index)
        fb = Feedback(Column("h", ("zzorb-9",), "user"), "city")
        adapt(fb, index, corpus, catalog, FOREST_CFG, embedder)
        assert len(index) == n + 1

    def test_insert_opt_out(self, setup, embedder):
        catalog, corpus, index = setup
        n = len(index)
        fb = Feedback(Column("h", ("zzorb-9",), "user"), "city")
        adapt(fb, index, corpus, catalog, FOREST_CFG, embedder,
              AdaptOptions(insert_example_into_index=False))
        assert len(index) == n

    def test_min_similarity_floor_flags_shortfall(self, setup, embedder):
        catalog, corpus, index = setup
        fb = Feedback(Column("h", ("completely unrelated text",), "user"), "city")
        _c, new_corpus, _f, report = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder,
            AdaptOptions(k=5, min_similarity=0.99),
        )
        assert report.shortfall
        assert len(report.retrieved) < 5
        # the example itself still lands in the corpus
        assert new_corpus.items[-1].provenance == "example"

    def test_empty_example_rejected(self, setup, embedder):
        catalog, corpus, index = setup
        fb = Feedback(Column("h", ("", "")), "city")
        with pytest.raises(AdaTyperError, match="non-empty"):
            adapt(fb, index, corpus, catalog, FOREST_CFG, embedder)

    def test_new_class_predictable_on_its_example(self, setup, embedder):
        # end-to-end: after one cycle the retrained classifier recognizes the
        # example column of the brand-new type
        catalog, corpus, index = setup
        col = Column("h", ("zzorb-1", "zzorb-2", "zzorb-3"), "user")
        fb = Feedback(col, "zz code", is_new_type=True)
        _c, _corpus, forest, _r = adapt(
            fb, index, corpus, catalog, FOREST_CFG, embedder, AdaptOptions(k=5)
        )
        predicted, _conf = forest.classify(embedder.embed_column(col).vector)
        assert predicted == "zz code"

    def test_prior_corpus_object_untouched(self, setup, embedder):
        catalog, corpus, index = setup
        n = len(corpus.items)
        fb = Feedback(Column("h", ("zzorb-1",), "user"), "city")
        adapt(fb, index, corpus, catalog, FOREST_CFG, embedder)
        assert len(corpus.items) == n


class TestAdaptDictionary:
    def test_top_m_by_frequency(self):
        d = ValueDictionary()
        fb = Feedback(Column("h", ("NY", "NY", "LA")), "city")
        adapt_dictionary(fb, d, top_m=2)
        assert d.entries["city"] == {"ny", "la"}

    def test_idempotent(self):
        d = ValueDictionary()
        fb = Feedback(Column("h", ("NY", "LA")), "city")
        adapt_dictionary(fb, d)
        adapt_dictionary(fb, d)
        assert d.entries["city"] == {"ny", "la"}

    def test_grows_monotonically(self):
        d = ValueDictionary()
        sizes = []
        for i in range(5):
            adapt_dictionary(Feedback(Column("h", (f"v{i}",)), "city"), d)
            sizes.append(len(d.entries["city"]))
        assert sizes == sorted(sizes)


class TestAdaptRegex:
    def test_adds_user_rule(self):
        fb = Feedback(Column("h", ("12345",)), "postal code", user_regex=r"^\d{5}$")
        rules = adapt_regex(fb, [])
        assert len(rules) == 1 and rules[0].user
        assert rules[0].matches("99999")

    def test_invalid_pattern_leaves_rules_unchanged(self):
        rules = [RegexRule("year", r"\d{4}")]
        fb = Feedback(Column("h", ("x",)), "postal code", user_regex="([")
        with pytest.raises(ValueError):
            adapt_regex(fb, rules)
        assert len(rules) == 1

    def test_one_user_rule_per_type(self):
        fb1 = Feedback(Column("h", ("x",)), "postal code", user_regex=r"\d{5}")
        fb2 = Feedback(Column("h", ("x",)), "postal code", user_regex=r"\d{4}")
        rules = adapt_regex(fb2, adapt_regex(fb1, []))
        user_rules = [r for r in rules if r.user and r.type_name == "postal code"]
        assert len(user_rules) == 1
        assert user_rules[0].pattern == r"\d{4}"

    def test_no_regex_given_is_noop(self):
        rules = [RegexRule("year", r"\d{4}")]
        fb = Feedback(Column("h", ("x",)), "year")
        assert adapt_regex(fb, rules) is rules
