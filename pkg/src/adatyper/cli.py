"""Command-line entry points.

Conventions: stdout carries only data (JSON/JSONL/CSV); diagnostics go to
stderr. Exit codes: 0 success, 1 validation error, 2 runtime error. Every
artifact-producing command echoes its config into the run directory so the
run is reproducible.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from adatyper.adapt import Feedback, AdaptOptions, adapt as run_adapt, adapt_dictionary, adapt_regex
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
from adatyper.evalkit import (
    AdaptationExperimentConfig,
    aggregate_column_annotations,
    annotations_from_jsonl,
    calibrate_threshold,
    collect_estimator_results,
    default_generators,
    filter_workers,
    generate_synthetic_corpus,
    run_adaptation_experiment,
)
from adatyper.index import HnswConfig, build_index, benchmark_index
from adatyper.learn import train_forest
from adatyper.match import starter_rules, populate_dictionary
from adatyper.pipeline import Predictor, ESTIMATOR_ORDER
from adatyper.store import SystemStore


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(config_path: str | None) -> RunConfig:
    try:
        return RunConfig.load(config_path)
    except (OSError, json.JSONDecodeError, TypeError) as exc:
        _fail(f"cannot load config: {exc}")


def read_labeled_corpus(path: Path) -> list[tuple[Column, str]]:
    """Labeled corpus JSONL: one table per line,
    {"table_id": ..., "columns": [{"header", "values", "type"}]}."""
    labeled = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            table_id = rec["table_id"]
            for c in rec["columns"]:
                labeled.append(
                    (Column(c["header"], tuple(str(v) for v in c["values"]), table_id), c["type"])
                )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise IngestError(f"{path}:{lineno}: {exc}") from exc
    return labeled


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON run-config file")
@click.pass_context
def main(ctx, config_path):
    """Adaptive semantic column type detection."""
    ctx.obj = _load_config(config_path)


@main.command()
@click.option("--corpus", "corpus_path", type=click.Path(exists=True), default=None,
              help="labeled corpus JSONL; omit to train on the built-in synthetic demo corpus")
@click.option("--data-dir", default=None, help="artifact output directory (overrides config)")
@click.option("--seed", type=int, default=None)
@click.pass_obj
def train(cfg: RunConfig, corpus_path, data_dir, seed):
    """Train the predictor and write versioned artifacts plus a manifest."""
    if data_dir:
        cfg.data_dir = data_dir
    if seed is not None:
        cfg.seed = seed
    embedder = get_embedder(cfg.embedder)
    catalog = TypeCatalog.default()
    try:
        if corpus_path:
            labeled = read_labeled_corpus(Path(corpus_path))
            for _c, t in labeled:
                if t not in catalog and t != NULL_TYPE:
                    catalog.add_type(SemanticType(t, "user-defined"))
        else:
            demo = generate_synthetic_corpus(
                {t: g for t, g in default_generators("a").items() if t in catalog},
                n_tables=40,
                seed=cfg.seed,
                table_prefix="train",
            )
            labeled = demo.labeled_columns()
        corpus = build_corpus(labeled, catalog, embedder, seed=cfg.seed)
        forest = train_forest(corpus, cfg.forest)
        items = []
        for i, (col, _t) in enumerate(labeled):
            emb = embedder.embed_column(col)
            if not emb.is_zero:
                items.append((emb.vector, {"column_id": f"{col.source_table_id}#{i}"}))
        index = build_index(items, cfg.hnsw, dimension=embedder.dimension)
        dictionary = populate_dictionary(labeled, top_k=50)
        rules = starter_rules(catalog)
    except AdaTyperError as exc:
        _fail(str(exc))
    store = SystemStore(cfg.data_dir)
    store.save_catalog(catalog)
    store.save_corpus(corpus, 0)
    store.save_forest(forest, 0)
    store.save_index(index, 0)
    store.save_dictionary(dictionary)
    store.save_rules(rules)
    store.write_manifest(0, cfg, catalog.version)
    cfg.save(Path(cfg.data_dir) / "config.json")
    click.echo(json.dumps({
        "data_dir": cfg.data_dir,
        "model_version": 0,
        "catalog_version": catalog.version,
        "index_version": 0,
        "corpus_items": len(corpus.items),
        "classes": list(forest.class_index),
    }))


def _load_system(cfg: RunConfig):
    store = SystemStore(cfg.data_dir)
    if not store.exists():
        _fail(f"no trained artifacts in {cfg.data_dir!r}; run `adatyper train` first")
    try:
        manifest = store.read_manifest()
        cycle = manifest["cycle"]
        embedder = get_embedder(cfg.embedder)
        catalog = store.load_catalog()
        corpus = store.load_corpus(cycle)
        forest = store.load_forest(cycle, embedder.dimension)
        index = store.load_index(cycle, embedder.dimension)
        dictionary = store.load_dictionary()
        rules = store.load_rules()
    except (LoadError, OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(f"cannot load artifacts: {exc}", code=2)
    return store, cycle, embedder, catalog, corpus, forest, index, dictionary, rules


@main.command()
@click.argument("table_path", type=click.Path(exists=True))
@click.option("--delimiter", default=None)
@click.pass_obj
def predict(cfg: RunConfig, table_path, delimiter):
    """Predict column types for a delimited table; JSON lines on stdout."""
    store, cycle, embedder, catalog, _corpus, forest, _index, dictionary, rules = _load_system(cfg)
    try:
        table = parse_delimited(
            Path(table_path).read_text(), Path(table_path).stem, delimiter or cfg.delimiter
        )
    except IngestError as exc:
        _fail(str(exc))
    predictor = Predictor(catalog, embedder, rules, dictionary, forest, cfg.pipeline_config())
    for p in predictor.predict_table(table):
        rec = p.to_dict()
        rec["header"] = table.columns[p.column_index].header
        click.echo(json.dumps(rec))


@main.command("adapt")
@click.argument("table_path", type=click.Path(exists=True))
@click.argument("column_index", type=int)
@click.argument("corrected_type")
@click.option("--new-type", is_flag=True, help="register the type as a new user-defined type")
@click.option("--regex", default=None, help="user-provided pattern for the corrected type")
@click.option("--k", type=int, default=None, help="neighbors to retrieve for weak labels")
@click.pass_obj
def adapt_cmd(cfg: RunConfig, table_path, column_index, corrected_type, new_type, regex, k):
    """Run one adaptation cycle from a corrected column; report on stdout."""
    store, cycle, embedder, catalog, corpus, forest, index, dictionary, rules = _load_system(cfg)
    try:
        table = parse_delimited(Path(table_path).read_text(), Path(table_path).stem, cfg.delimiter)
        if not 0 <= column_index < len(table.columns):
            raise AdaTyperError(f"column index {column_index} out of range")
        fb = Feedback(table.columns[column_index], corrected_type.lower(), new_type, regex)
        catalog, corpus, forest, report = run_adapt(
            fb, index, corpus, catalog, cfg.forest, embedder,
            AdaptOptions(k=k or cfg.adapt_k), cycle=cycle + 1,
        )
        dictionary = adapt_dictionary(fb, dictionary)
        rules = adapt_regex(fb, rules)
    except (AdaTyperError, IngestError, ValueError) as exc:
        _fail(str(exc))
    new_cycle = cycle + 1
    store.save_catalog(catalog)
    store.save_corpus(corpus, new_cycle)
    store.save_forest(forest, new_cycle)
    store.save_index(index, new_cycle)
    store.save_dictionary(dictionary)
    store.save_rules(rules)
    store.write_manifest(new_cycle, cfg, catalog.version)
    store.save_history_entry(new_cycle, report.to_dict())
    click.echo(json.dumps(report.to_dict()))


@main.command()
@click.argument("holdout_path", type=click.Path(exists=True))
@click.option("--target-fpr", type=float, default=0.03, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None, help="write thresholds JSON here as well")
@click.pass_obj
def calibrate(cfg: RunConfig, holdout_path, target_fpr, out_path):
    """Calibrate per-estimator thresholds on a labeled holdout (JSONL)."""
    store, cycle, embedder, catalog, _corpus, forest, _index, dictionary, rules = _load_system(cfg)
    try:
        labeled = read_labeled_corpus(Path(holdout_path))
    except IngestError as exc:
        _fail(str(exc))
    tables, gold = _labeled_to_tables(labeled)
    predictor = Predictor(catalog, embedder, rules, dictionary, forest, cfg.pipeline_config())
    thresholds = {}
    detail = {}
    n_types = len(catalog.names(include_null=False))
    for estimator in ESTIMATOR_ORDER:
        results = collect_estimator_results(predictor, estimator, tables, gold)
        cal = calibrate_threshold(results, target_fpr, n_types)
        thresholds[estimator] = cal.tau
        detail[estimator] = {
            "tau": cal.tau,
            "tpr": cal.point.tpr,
            "fpr": cal.point.fpr,
            "satisfied": cal.satisfied,
        }
    output = {"target_fpr": target_fpr, "thresholds": thresholds, "detail": detail}
    if out_path:
        Path(out_path).write_text(json.dumps(output, indent=2))
    click.echo(json.dumps(output))


def _labeled_to_tables(labeled):
    """Group labeled columns back into per-source tables (ragged groups are
    split into single-column tables)."""
    tables = []
    gold = {}
    by_table: dict[str, list[tuple[Column, str]]] = {}
    for col, t in labeled:
        by_table.setdefault(col.source_table_id or "t", []).append((col, t))
    for table_id, cols in by_table.items():
        lengths = {len(c.values) for c, _ in cols}
        if len(lengths) == 1:
            table = Table(table_id, tuple(c for c, _ in cols))
            tables.append(table)
            for i, (_c, t) in enumerate(cols):
                gold[(table_id, i)] = t
        else:
            for j, (c, t) in enumerate(cols):
                tid = f"{table_id}-{j}"
                tables.append(Table(tid, (Column(c.header, c.values, tid),)))
                gold[(tid, 0)] = t
    return tables, gold


@main.command("bench-index")
@click.option("--m", "m_values", multiple=True, type=int, default=(4, 8, 16))
@click.option("--ef", "ef_values", multiple=True, type=int, default=(10, 50, 100))
@click.option("--ef-construction", "efc_values", multiple=True, type=int, default=(50,))
@click.option("--n-elements", type=int, default=2000, show_default=True)
@click.option("--dimension", type=int, default=64, show_default=True)
@click.option("--runs", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0)
def bench_index(m_values, ef_values, efc_values, n_elements, dimension, runs, seed):
    """Recall/latency/memory benchmark over an HNSW hyperparameter grid (CSV)."""
    grid = [
        HnswConfig(M=m, ef_construction=efc, ef_search=ef)
        for m in m_values
        for efc in efc_values
        for ef in ef_values
    ]
    rows = benchmark_index(grid, n_elements=n_elements, dimension=dimension, runs=runs, seed=seed)
    cols = ["M", "ef_construction", "ef_search", "selection", "recall", "query_ms", "build_s", "memory_bytes"]
    click.echo(",".join(cols))
    for row in rows:
        click.echo(",".join(str(row[c]) for c in cols))


@main.group()
def experiment():
    """Reproductions of the evaluation procedures at desk scale."""


@experiment.command("adapt-eval")
@click.option("--out-dir", type=click.Path(), default="adaptation-experiment", show_default=True)
@click.option("--cycles", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=7, show_default=True)
def adapt_eval(out_dir, cycles, seed):
    """Adaptation-over-cycles experiment with dictionary/regex baselines."""
    cfg = AdaptationExperimentConfig(cycles=cycles, seed=seed)
    summary = run_adaptation_experiment(cfg, out_dir=out_dir)
    click.echo(json.dumps(summary["mean_f1_final"] | {"mean_delta_f1": summary["mean_delta_f1"]}))
    click.echo(f"artifacts written to {out_dir}", err=True)


@main.command("aggregate-annotations")
@click.argument("annotations_path", type=click.Path(exists=True))
@click.option("--min-vote", type=int, default=1, show_default=True)
@click.option("--top-k", type=int, default=3, show_default=True,
              help="worker filter: keep workers with 'null' in their top-k labels")
@click.option("--no-filter", is_flag=True, help="skip the worker filter")
def aggregate_annotations_cmd(annotations_path, min_vote, top_k, no_filter):
    """Aggregate crowd annotations into per-column gold labels (JSONL)."""
    try:
        annotations = annotations_from_jsonl(Path(annotations_path).read_text())
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        _fail(f"cannot parse annotations: {exc}")
    if not no_filter:
        annotations = filter_workers(annotations, top_k)
    gold = aggregate_column_annotations(annotations, min_vote)
    for (table_id, column_index), label in sorted(gold.items()):
        click.echo(json.dumps({"table": table_id, "column": column_index, "type": label}))


@main.command()
@click.option("--port", type=int, default=None)
@click.option("--host", default=None)
@click.option("--data-dir", default=None)
@click.pass_obj
def serve(cfg: RunConfig, port, host, data_dir):
    """Run the HTTP service (trains a demo system on first start)."""
    if port is not None:
        cfg.port = port
    if host is not None:
        cfg.host = host
    if data_dir is not None:
        cfg.data_dir = data_dir
    from adatyper.service import serve as _serve

    click.echo(f"serving on http://{cfg.host}:{cfg.port} (data dir: {cfg.data_dir})", err=True)
    _serve(cfg)


if __name__ == "__main__":
    main()
