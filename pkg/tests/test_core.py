import numpy as np
import pytest
from hypothesis import given, strategies as st

from adatyper.core import (
    Column,
    Table,
    TypeCatalog,
    SemanticType,
    Prediction,
    LabeledColumn,
    TrainingCorpus,
    NULL_TYPE,
    normalize_header,
    build_corpus,
    parse_delimited,
)
from adatyper.embed import EmbedderConfig, ReferenceEmbedder
from adatyper.errors import CatalogMismatchError, IngestError


class TestNormalizeHeader:
    def test_camel_case(self):
        assert normalize_header("PostalCode") == "postal code"

    def test_underscores(self):
        assert normalize_header("first_name") == "first name"

    def test_empty(self):
        assert normalize_header("") == ""

    def test_hyphen_and_collapse(self):
        assert normalize_header("Phone--Number") == "phone number"

    def test_acronym_boundary(self):
        assert normalize_header("HTTPStatus") == "http status"

    def test_digit_boundary(self):
        assert normalize_header("address2Line") == "address2 line"

    @given(st.text(max_size=30))
    def test_idempotent_and_lowercase(self, s):
        once = normalize_header(s)
        assert once == once.lower()
        assert normalize_header(once) == once


class TestColumnTable:
    def test_column_needs_values(self):
        with pytest.raises(ValueError):
            Column("h", ())

    def test_ragged_table_rejected(self):
        with pytest.raises(ValueError, match="ragged"):
            Table("t", (Column("a", ("1",)), Column("b", ("1", "2"))))

    def test_non_empty_values(self):
        c = Column("h", ("a", "", "b"))
        assert c.non_empty_values() == ["a", "b"]


class TestCatalog:
    def test_default_has_eleven_types(self, catalog):
        assert len(catalog) == 11
        assert NULL_TYPE in catalog

    def test_version_starts_at_one_for_empty(self):
        assert TypeCatalog().version == 1

    def test_add_bumps_version(self, catalog):
        v0 = catalog.version
        v1 = catalog.add_type(SemanticType("orcid", "user-defined"))
        assert v1 == v0 + 1 and "orcid" in catalog

    def test_null_cannot_be_removed(self, catalog):
        with pytest.raises(ValueError):
            catalog.remove_type(NULL_TYPE)

    def test_duplicate_rejected(self, catalog):
        with pytest.raises(ValueError):
            catalog.add_type(SemanticType("city", "geographic"))

    def test_history_snapshots(self, catalog):
        v_before = catalog.version
        names_before = catalog.names()
        catalog.add_type(SemanticType("orcid", "user-defined"))
        assert catalog.names_at(v_before) == names_before
        assert "orcid" in catalog.names_at(catalog.version)

    def test_round_trip(self, catalog):
        catalog.add_type(SemanticType("orcid", "user-defined"))
        again = TypeCatalog.from_dict(catalog.to_dict())
        assert again.names() == catalog.names()
        assert again.version == catalog.version

    def test_type_names_must_be_lowercase(self):
        with pytest.raises(ValueError):
            SemanticType("City", "geographic")


class TestPrediction:
    def test_abstention_shape_enforced(self):
        with pytest.raises(ValueError):
            Prediction("t", 0, "city", 0.5, "none")
        Prediction("t", 0, NULL_TYPE, 0.0, "none")  # the only valid "none"

    def test_confidence_range(self):
        with pytest.raises(ValueError):
            Prediction("t", 0, "city", 1.5, "header")


class TestLabeledColumn:
    def test_weak_requires_cycle(self):
        with pytest.raises(ValueError):
            LabeledColumn(np.zeros(4), "city", "weak", cycle=0)

    def test_content_hash_depends_on_embedding_and_type(self):
        a = LabeledColumn(np.ones(4), "city")
        b = LabeledColumn(np.ones(4), "gender")
        c = LabeledColumn(np.ones(4), "city")
        assert a.content_hash() != b.content_hash()
        assert a.content_hash() == c.content_hash()


class TestBuildCorpus:
    def _labeled(self, type_name, n, table="t"):
        return [
            (Column("h", (f"{type_name}{i}a", f"{type_name}{i}b"), table), type_name)
            for i in range(n)
        ]

    def test_null_cap_exact(self, catalog, embedder):
        labeled = self._labeled(NULL_TYPE, 400)
        corpus = build_corpus(labeled, catalog, embedder, null_cap=250)
        assert corpus.type_counts()[NULL_TYPE] == 250

    def test_below_cap_all_retained(self, catalog, embedder):
        corpus = build_corpus(self._labeled("city", 10), catalog, embedder, cap=250)
        assert corpus.type_counts()["city"] == 10

    def test_deterministic(self, catalog, embedder):
        labeled = self._labeled("city", 300) + self._labeled(NULL_TYPE, 300)
        a = build_corpus(labeled, catalog, embedder, seed=5)
        b = build_corpus(labeled, catalog, embedder, seed=5)
        assert [it.content_hash() for it in a.items] == [it.content_hash() for it in b.items]

    def test_unknown_type_rejected(self, catalog, embedder):
        with pytest.raises(CatalogMismatchError):
            build_corpus(self._labeled("isbn", 1), catalog, embedder)

    def test_extended_append_only(self, catalog, embedder):
        corpus = build_corpus(self._labeled("city", 3), catalog, embedder)
        more = [LabeledColumn(np.ones(64) / 8.0, "city", "example", cycle=1)]
        grown = corpus.extended(more, catalog.version)
        assert len(grown.items) == 4
        assert len(corpus.items) == 3  # original untouched


class TestParseDelimited:
    def test_basic(self):
        t = parse_delimited("a,b\n1,2\n3,4\n", "t")
        assert t.n_rows == 2
        assert t.columns[0].values == ("1", "3")
        assert [c.header for c in t.columns] == ["a", "b"]

    def test_ragged_row_reports_index(self):
        with pytest.raises(IngestError, match="row 2"):
            parse_delimited("a,b\n1,2\n3\n", "t")

    def test_needs_data_row(self):
        with pytest.raises(IngestError):
            parse_delimited("a,b\n", "t")

    def test_quoted_fields(self):
        t = parse_delimited('a,b\n"x,y",2\n', "t")
        assert t.columns[0].values == ("x,y",)

    def test_custom_delimiter(self):
        t = parse_delimited("a;b\n1;2\n", "t", delimiter=";")
        assert t.columns[1].values == ("2",)

    def test_missing_cells_kept_as_empty(self):
        t = parse_delimited("a,b\n1,\n", "t")
        assert t.columns[1].values == ("",)
