import numpy as np
import pytest

from adatyper.core import Column, Table, TypeCatalog
from adatyper.embed import EmbedderConfig, ReferenceEmbedder


@pytest.fixture(scope="session")
def embedder():
    # small dimension keeps the suite fast; behavior is dimension-agnostic
    return ReferenceEmbedder(EmbedderConfig(dimension=64))


@pytest.fixture
def catalog():
    return TypeCatalog.default()


@pytest.fixture
def city_column():
    return Column("city", ("amsterdam", "utrecht", "rotterdam"), "t1")


def make_table(table_id, cols):
    return Table(table_id, tuple(Column(h, tuple(v), table_id) for h, v in cols))


@pytest.fixture(scope="session")
def unit_vectors():
    def make(n, d, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal((n, d))
        return x / np.linalg.norm(x, axis=1, keepdims=True)

    return make
