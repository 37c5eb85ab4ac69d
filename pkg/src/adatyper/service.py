"""HTTP service exposing prediction and feedback-driven adaptation.

All endpoints live under /v1. Prediction requests are read-only against an
atomic snapshot of the current components; adaptation holds an exclusive
lock (a second concurrent feedback gets 409) and swaps the model atomically
on completion. Every response echoes the model version so clients can tell
which model produced a prediction.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from fastapi import FastAPI, Request, HTTPException
from fastapi.responses import JSONResponse

from adatyper.adapt import Feedback, AdaptOptions, adapt, adapt_dictionary, adapt_regex
from adatyper.config import RunConfig
from adatyper.core import (
    Column,
    Table,
    TypeCatalog,
    SemanticType,
    NULL_TYPE,
    build_corpus,
    parse_delimited,
)
from adatyper.errors import AdaTyperError, IngestError, LoadError
from adatyper.embed import get_embedder
from adatyper.evalkit import generate_synthetic_corpus, default_generators
from adatyper.index import build_index
from adatyper.learn import train_forest
from adatyper.match import starter_rules
from adatyper.pipeline import Predictor
from adatyper.store import SystemStore


@dataclass
class Snapshot:
    """Immutable view of the components a prediction runs against."""

    cycle: int
    catalog: TypeCatalog
    forest: object
    dictionary: object
    rules: list
    index: object


class System:
    """Owns the mutable state; predictions read a snapshot, adaptation swaps it."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.store = SystemStore(config.data_dir)
        self.embedder = get_embedder(config.embedder)
        self._adapt_lock = threading.Lock()
        self._swap_lock = threading.Lock()
        self.started_at = time.time()
        self.predictions_served = 0
        if self.store.exists():
            self._load()
        else:
            self._bootstrap()

    # -- lifecycle ---------------------------------------------------------

    def _bootstrap(self):
        """First run: train the initial predictor on a seeded demo corpus."""
        catalog = TypeCatalog.default()
        demo = generate_synthetic_corpus(
            {t: g for t, g in default_generators("a").items() if t in catalog},
            n_tables=40,
            seed=self.config.seed,
            table_prefix="bootstrap",
        )
        corpus = build_corpus(demo.labeled_columns(), catalog, self.embedder, seed=self.config.seed)
        forest = train_forest(corpus, self.config.forest)
        items = []
        for table in demo.tables:
            for i, col in enumerate(table.columns):
                emb = self.embedder.embed_column(col)
                if not emb.is_zero:
                    items.append((emb.vector, {"column_id": f"{table.id}#{i}"}))
        index = build_index(items, self.config.hnsw, dimension=self.embedder.dimension)
        dictionary = adapt_bootstrap_dictionary(demo)
        rules = starter_rules(catalog)

        self.cycle = 0
        self.catalog = catalog
        self.corpus = corpus
        self.forest = forest
        self.index = index
        self.dictionary = dictionary
        self.rules = rules
        self._persist_all()

    def _persist_all(self):
        self.store.save_catalog(self.catalog)
        self.store.save_corpus(self.corpus, self.cycle)
        self.store.save_forest(self.forest, self.cycle)
        self.store.save_index(self.index, self.cycle)
        self.store.save_dictionary(self.dictionary)
        self.store.save_rules(self.rules)
        self.store.write_manifest(self.cycle, self.config, self.catalog.version)

    def _load(self):
        manifest = self.store.read_manifest()
        self.cycle = manifest["cycle"]
        self.catalog = self.store.load_catalog()
        self.corpus = self.store.load_corpus(self.cycle)
        self.forest = self.store.load_forest(self.cycle, self.embedder.dimension)
        self.index = self.store.load_index(self.cycle, self.embedder.dimension)
        self.dictionary = self.store.load_dictionary()
        self.rules = self.store.load_rules()

    # -- prediction --------------------------------------------------------

    def snapshot(self) -> Snapshot:
        with self._swap_lock:
            return Snapshot(self.cycle, self.catalog, self.forest, self.dictionary, list(self.rules), self.index)

    def predict(self, table: Table) -> tuple[list, int]:
        snap = self.snapshot()
        predictor = Predictor(
            snap.catalog,
            self.embedder,
            snap.rules,
            snap.dictionary,
            snap.forest,
            self.config.pipeline_config(),
        )
        preds = predictor.predict_table(table)
        self.predictions_served += len(preds)
        return preds, snap.cycle

    # -- adaptation --------------------------------------------------------

    def apply_feedback(self, table: Table, column_index: int, corrected_type: str,
                       is_new_type: bool, user_regex: str | None) -> dict:
        if not self._adapt_lock.acquire(blocking=False):
            raise BusyError("an adaptation cycle is already in progress")
        try:
            column = table.columns[column_index]
            fb = Feedback(column, corrected_type, is_new_type, user_regex)
            catalog, corpus, forest, report = adapt(
                fb,
                self.index,
                self.corpus,
                self.catalog,
                self.config.forest,
                self.embedder,
                AdaptOptions(k=self.config.adapt_k),
                cycle=self.cycle + 1,
            )
            dictionary = self.dictionary
            adapt_dictionary(fb, dictionary, top_m=10)
            rules = adapt_regex(fb, self.rules)
            with self._swap_lock:
                self.cycle += 1
                self.catalog = catalog
                self.corpus = corpus
                self.forest = forest
                self.dictionary = dictionary
                self.rules = rules
            self._persist_all()
            report_dict = report.to_dict()
            self.store.save_history_entry(self.cycle, report_dict)
            return report_dict
        finally:
            self._adapt_lock.release()

    def state(self) -> dict:
        return {
            "catalog_version": self.catalog.version,
            "model_version": self.cycle,
            "index_version": self.cycle,
            "index_size": len(self.index),
            "cycle": self.cycle,
            "uptime_seconds": time.time() - self.started_at,
            "predictions_served": self.predictions_served,
            "n_history_entries": len(self.store.load_history()),
        }


class BusyError(AdaTyperError):
    pass


def adapt_bootstrap_dictionary(demo):
    from adatyper.match import populate_dictionary

    return populate_dictionary(demo.labeled_columns(), top_k=50)


def create_app(config: RunConfig | None = None, system: System | None = None) -> FastAPI:
    config = config or RunConfig()
    app = FastAPI(title="adatyper", version="0.1.0")
    sys_obj = system or System(config)
    app.state.system = sys_obj

    @app.exception_handler(AdaTyperError)
    async def adatyper_error_handler(request: Request, exc: AdaTyperError):
        status = 409 if isinstance(exc, BusyError) else 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def _predictions_payload(table: Table):
        preds, model_version = sys_obj.predict(table)
        return {
            "table_id": table.id,
            "model_version": model_version,
            "catalog_version": sys_obj.catalog.version,
            "predictions": [
                {**p.to_dict(), "header": table.columns[p.column_index].header} for p in preds
            ],
        }

    @app.post("/v1/tables")
    async def upload_table(request: Request):
        content_type = request.headers.get("content-type", "")
        body = await request.body()
        try:
            if "application/json" in content_type:
                import json as _json

                payload = _json.loads(body)
                table_id = payload.get("id") or f"table-{len(sys_obj.store.table_ids()):05d}"
                if "csv" in payload:
                    table = parse_delimited(payload["csv"], table_id, payload.get("delimiter", config.delimiter))
                elif "columns" in payload:
                    cols = tuple(
                        Column(c["header"], tuple(str(v) for v in c["values"]), table_id)
                        for c in payload["columns"]
                    )
                    table = Table(table_id, cols)
                else:
                    raise IngestError("JSON body needs either 'csv' or 'columns'")
            else:
                table_id = f"table-{len(sys_obj.store.table_ids()):05d}"
                table = parse_delimited(body.decode("utf-8"), table_id, config.delimiter)
        except (IngestError, ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=f"cannot parse table: {exc}")
        sys_obj.store.save_table(table)
        return _predictions_payload(table)

    @app.get("/v1/predictions/{table_id}")
    async def get_predictions(table_id: str):
        table = sys_obj.store.load_table(table_id)
        if table is None:
            raise HTTPException(status_code=404, detail=f"unknown table {table_id!r}")
        return _predictions_payload(table)

    @app.post("/v1/feedback")
    async def post_feedback(payload: dict):
        table_id = payload.get("table_id")
        table = sys_obj.store.load_table(table_id) if table_id else None
        if table is None:
            raise HTTPException(status_code=404, detail=f"unknown table {table_id!r}")
        column_index = int(payload["column_index"])
        if not 0 <= column_index < len(table.columns):
            raise HTTPException(status_code=422, detail=f"column index {column_index} out of range")
        report = sys_obj.apply_feedback(
            table,
            column_index,
            str(payload["corrected_type"]).lower(),
            bool(payload.get("new_type", False)),
            payload.get("regex"),
        )
        return {"report": report, "model_version": sys_obj.cycle, "catalog_version": sys_obj.catalog.version}

    @app.get("/v1/catalog")
    async def get_catalog():
        return {
            "version": sys_obj.catalog.version,
            "types": [
                {"name": t.name, "category": t.category} for t in sys_obj.catalog.types
            ],
        }

    @app.post("/v1/types")
    async def register_type(payload: dict):
        name = str(payload["name"]).lower()
        category = payload.get("category", "user-defined")
        if name in sys_obj.catalog:
            raise HTTPException(status_code=409, detail=f"type {name!r} already exists")
        version = sys_obj.catalog.add_type(SemanticType(name, category))
        sys_obj.store.save_catalog(sys_obj.catalog)
        return {"name": name, "catalog_version": version}

    @app.get("/v1/state")
    async def get_state():
        return sys_obj.state()

    @app.get("/v1/history")
    async def get_history():
        return {"history": sys_obj.store.load_history()}

    return app


def serve(config: RunConfig):
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
