"""Calibration, metrics, annotation aggregation, baselines, synthetic data.

Everything here is seeded and deterministic: a full experiment is
reproducible from (config, seed) alone.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from collections import Counter
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from adatyper.core import (
    Column,
    Table,
    TypeCatalog,
    SemanticType,
    Prediction,
    TrainingCorpus,
    NULL_TYPE,
    build_corpus,
)
from adatyper.errors import AdaTyperError, LeakageError
from adatyper.index import HnswConfig, build_index
from adatyper.learn import ForestConfig, train_forest
from adatyper.match import (
    EstimatorResult,
    RegexRule,
    ValueDictionary,
    populate_dictionary,
)
from adatyper.pipeline import Predictor, PipelineConfig, ESTIMATOR_ORDER
from adatyper.adapt import Feedback, AdaptOptions, adapt, adapt_dictionary


# --------------------------------------------------------------------------
# ROC sweep / threshold calibration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RocPoint:
    tau: float
    tpr: float
    fpr: float


@dataclass
class CalibrationResult:
    tau: float
    point: RocPoint
    curve: list[RocPoint]
    satisfied: bool  # False if no tau met the target (tau forced to 1)


def roc_sweep(results: list[tuple[EstimatorResult, str]], n_types: int) -> list[RocPoint]:
    """TPR/FPR at every observed confidence value, sorted by ascending tau.

    TPR: correct non-null emissions over non-null gold columns.
    FPR: micro one-vs-rest false positives -- every emission of type t on a
    column whose gold is not t (including null-gold columns) -- over the
    number of evaluated columns, i.e. the fraction of columns that receive a
    wrong label at this tau.
    """
    n = len(results)
    positives = sum(1 for _r, gold in results if gold != NULL_TYPE)
    negatives = n
    taus = sorted({r.confidence for r, _ in results if r.type_name != NULL_TYPE} | {0.0, 1.0})
    curve = []
    for tau in taus:
        tp = fp = 0
        for r, gold in results:
            emitted = r.type_name != NULL_TYPE and r.confidence >= tau
            if not emitted:
                continue
            if r.type_name == gold:
                tp += 1
            else:
                fp += 1
        tpr = tp / positives if positives else 0.0
        fpr = fp / negatives if negatives else 0.0
        curve.append(RocPoint(tau, tpr, fpr))
    return curve


def calibrate_threshold(
    results: list[tuple[EstimatorResult, str]],
    target_fpr: float = 0.03,
    n_types: int = 10,
) -> CalibrationResult:
    """Maximal TPR subject to FPR <= target; among equal-TPR qualifying
    points the one with the lowest FPR (largest tau) wins -- same recall,
    fewest false positives. Returns tau=1 with a warning when nothing
    qualifies."""
    curve = roc_sweep(results, n_types)
    qualifying = [p for p in curve if p.fpr <= target_fpr]
    if not qualifying:
        warnings.warn(f"no threshold achieves FPR <= {target_fpr}; falling back to tau=1")
        return CalibrationResult(1.0, RocPoint(1.0, 0.0, 0.0), curve, satisfied=False)
    best = max(qualifying, key=lambda p: (p.tpr, -p.fpr, p.tau))
    return CalibrationResult(best.tau, best, curve, satisfied=True)


def collect_estimator_results(
    predictor: Predictor,
    estimator: str,
    tables: list[Table],
    gold: dict[tuple[str, int], str],
) -> list[tuple[EstimatorResult, str]]:
    """Run a single estimator (ungated) over all gold-labeled columns."""
    out = []
    for table in tables:
        for i, col in enumerate(table.columns):
            ref = (table.id, i)
            if ref not in gold:
                continue
            r = predictor._run_estimator(estimator, col)
            if r is None:
                r = EstimatorResult(NULL_TYPE, 0.0, estimator)
            out.append((r, gold[ref]))
    return out


# --------------------------------------------------------------------------
# Multi-class scoring
# --------------------------------------------------------------------------

@dataclass
class ScoreReport:
    per_type: dict[str, dict]
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float

    def to_dict(self) -> dict:
        return asdict(self)


def score(predictions: list[Prediction], gold: dict[tuple[str, int], str]) -> ScoreReport:
    """Per-type and support-weighted precision/recall/F1.

    Null-gold columns feed precision denominators (a prediction on them is a
    false positive) but carry no weight in the averages.
    """
    pred_by_ref = {(p.table_id, p.column_index): p for p in predictions}
    if set(pred_by_ref) != set(gold):
        missing = set(gold) ^ set(pred_by_ref)
        raise AdaTyperError(f"prediction/gold column refs differ on {sorted(missing)[:5]}")
    types = sorted({t for t in gold.values() if t != NULL_TYPE})
    per_type = {}
    for t in types:
        tp = fp = fn = 0
        for ref, g in gold.items():
            p = pred_by_ref[ref]
            predicted_t = p.estimator != "none" and p.type_name == t
            if predicted_t and g == t:
                tp += 1
            elif predicted_t and g != t:
                fp += 1
            elif not predicted_t and g == t:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_type[t] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": sum(1 for g in gold.values() if g == t),
        }
    total = sum(v["support"] for v in per_type.values())
    if total:
        wp = sum(v["precision"] * v["support"] for v in per_type.values()) / total
        wr = sum(v["recall"] * v["support"] for v in per_type.values()) / total
        wf = sum(v["f1"] * v["support"] for v in per_type.values()) / total
    else:
        wp = wr = wf = 0.0
    return ScoreReport(per_type, wp, wr, wf)


# --------------------------------------------------------------------------
# Annotation aggregation and quality control
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Annotation:
    table_id: str
    column_index: int
    worker_id: str
    label: str

    def __post_init__(self):
        if self.label != self.label.lower():
            raise ValueError(f"labels must be lowercase: {self.label!r}")

    @property
    def column_ref(self) -> tuple[str, int]:
        return (self.table_id, self.column_index)


def aggregate_annotations(labels: list[str], min_vote: int = 1) -> str:
    """Most frequent label if its count reaches min_vote; ties abstain to null."""
    if not labels:
        raise ValueError("need at least one annotation")
    counts = Counter(labels)
    top = counts.most_common()
    best_count = top[0][1]
    leaders = [l for l, c in top if c == best_count]
    if len(leaders) > 1 or best_count < min_vote:
        return NULL_TYPE
    return leaders[0]


def aggregate_column_annotations(
    annotations: list[Annotation], min_vote: int = 1
) -> dict[tuple[str, int], str]:
    by_ref: dict[tuple[str, int], list[str]] = {}
    for a in annotations:
        by_ref.setdefault(a.column_ref, []).append(a.label)
    return {ref: aggregate_annotations(labels, min_vote) for ref, labels in by_ref.items()}


def filter_workers(annotations: list[Annotation], k: int = 3) -> list[Annotation]:
    """Drop workers whose top-k most common labels exclude 'null' (random clickers)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    by_worker: dict[str, Counter] = {}
    for a in annotations:
        by_worker.setdefault(a.worker_id, Counter())[a.label] += 1
    keep = set()
    for worker, counts in by_worker.items():
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        top_k = {label for label, _ in ranked[:k]}
        if NULL_TYPE in top_k:
            keep.add(worker)
    return [a for a in annotations if a.worker_id in keep]


def honeypot_score(
    annotations: list[Annotation], gold: dict[tuple[str, int], str]
) -> dict[str, dict]:
    """Per-worker precision/recall/f1 on columns with known ground truth."""
    by_worker: dict[str, list[Annotation]] = {}
    for a in annotations:
        if a.column_ref in gold:
            by_worker.setdefault(a.worker_id, []).append(a)
    out = {}
    for worker, anns in sorted(by_worker.items()):
        refs = {a.column_ref for a in anns}
        preds = [
            Prediction(a.table_id, a.column_index, a.label, 1.0, "header")
            if a.label != NULL_TYPE
            else Prediction(a.table_id, a.column_index, NULL_TYPE, 0.0, "none")
            for a in anns
        ]
        report = score(preds, {r: gold[r] for r in refs})
        out[worker] = {
            "precision": report.weighted_precision,
            "recall": report.weighted_recall,
            "f1": report.weighted_f1,
            "n_columns": len(refs),
        }
    return out


def cohort_report(
    annotations: list[Annotation],
    gold: dict[tuple[str, int], str],
    cohort_of: dict[str, str],
) -> list[dict]:
    """Annotation-quality table per experiment design (cohort of workers)."""
    rows = []
    cohorts = sorted(set(cohort_of.values()))
    per_worker = honeypot_score(annotations, gold)
    for cohort in cohorts:
        workers = [w for w, c in cohort_of.items() if c == cohort and w in per_worker]
        if not workers:
            continue
        rows.append(
            {
                "cohort": cohort,
                "precision": float(np.mean([per_worker[w]["precision"] for w in workers])),
                "recall": float(np.mean([per_worker[w]["recall"] for w in workers])),
                "f1": float(np.mean([per_worker[w]["f1"] for w in workers])),
                "n_workers": len(workers),
            }
        )
    return rows


def annotations_to_jsonl(annotations: list[Annotation]) -> str:
    return "".join(
        json.dumps(
            {"table": a.table_id, "column": a.column_index, "worker": a.worker_id, "label": a.label}
        )
        + "\n"
        for a in annotations
    )


def annotations_from_jsonl(text: str) -> list[Annotation]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append(Annotation(rec["table"], int(rec["column"]), rec["worker"], rec["label"]))
    return out


# --------------------------------------------------------------------------
# Synthetic corpus generation
# --------------------------------------------------------------------------

_CITIES_A = ["amsterdam", "rotterdam", "utrecht", "eindhoven", "groningen", "haarlem", "arnhem", "breda", "nijmegen", "tilburg"]
_CITIES_B = ["boston", "seattle", "denver", "austin", "portland", "chicago", "atlanta", "houston", "phoenix", "detroit"]
_COUNTRIES = ["netherlands", "germany", "france", "spain", "italy", "portugal", "belgium", "austria", "poland", "sweden", "norway", "denmark"]
_FIRST_NAMES_A = ["emma", "liam", "olivia", "noah", "sophia", "mason", "isabella", "lucas", "mia", "ethan"]
_FIRST_NAMES_B = ["wout", "daan", "sanne", "bram", "femke", "jesse", "lotte", "sven", "anouk", "thijs"]
_LAST_NAMES = ["smith", "jansen", "garcia", "mueller", "rossi", "silva", "novak", "dubois", "larsen", "kowalski"]
_COMPANIES = ["acme corp", "globex", "initech", "umbrella ltd", "stark industries", "wayne enterprises", "wonka co", "tyrell corp", "cyberdyne", "hooli"]
_PRODUCTS = ["widget", "gadget", "sprocket", "gizmo", "doohickey", "contraption", "apparatus", "fixture", "implement", "device"]
_STREETS = ["main st", "oak ave", "elm dr", "maple rd", "cedar ln", "pine ct", "birch blvd", "walnut way"]
_DOMAINS = ["example.com", "mail.org", "post.net", "corp.io"]
_GENDER_A = ["male", "female"]
_GENDER_B = ["m", "f"]
_NOISE_WORDS = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "theta", "kappa", "lambda", "sigma", "omega", "vortex", "quartz", "nebula", "zenith"]


def _pick(rng, vocab):
    return vocab[int(rng.integers(0, len(vocab)))]


def default_generators(variant: str = "a") -> dict:
    """Per-type value generators; variant 'b' shifts the vocabulary-backed
    types (city, gender, first name) to a disjoint distribution."""
    cities = _CITIES_A if variant == "a" else _CITIES_B
    names = _FIRST_NAMES_A if variant == "a" else _FIRST_NAMES_B
    genders = _GENDER_A if variant == "a" else _GENDER_B
    return {
        "city": lambda rng: _pick(rng, cities),
        "country": lambda rng: _pick(rng, _COUNTRIES),
        "postal code": lambda rng: f"{rng.integers(10000, 99999)}",
        "address": lambda rng: f"{rng.integers(1, 999)} {_pick(rng, _STREETS)}",
        "date": lambda rng: f"{rng.integers(1990, 2026)}-{rng.integers(1, 13):02d}-{rng.integers(1, 29):02d}",
        "year": lambda rng: f"{rng.integers(1950, 2026)}",
        "first name": lambda rng: _pick(rng, names),
        "last name": lambda rng: _pick(rng, _LAST_NAMES),
        "gender": lambda rng: _pick(rng, genders),
        "email": lambda rng: f"{_pick(rng, names)}.{_pick(rng, _LAST_NAMES)}@{_pick(rng, _DOMAINS)}",
        "phone number": lambda rng: f"+{rng.integers(1, 99)} {rng.integers(100, 999)} {rng.integers(100, 999)} {rng.integers(1000, 9999)}",
        "company name": lambda rng: _pick(rng, _COMPANIES),
        "product": lambda rng: _pick(rng, _PRODUCTS),
    }


def _noise_value(rng) -> str:
    kind = rng.integers(0, 3)
    if kind == 0:
        return _pick(rng, _NOISE_WORDS)
    if kind == 1:
        return f"{_pick(rng, _NOISE_WORDS)}-{rng.integers(0, 10000)}"
    return "".join(chr(97 + int(c)) for c in rng.integers(0, 26, size=8))


_GENERIC_HEADERS = ["field", "value", "bits", "attr", "info", "blob", "item", "col"]


@dataclass
class SyntheticCorpus:
    tables: list[Table]
    gold: dict[tuple[str, int], str]
    manifest: dict

    def labeled_columns(self) -> list[tuple[Column, str]]:
        out = []
        for table in self.tables:
            for i, col in enumerate(table.columns):
                out.append((col, self.gold[(table.id, i)]))
        return out

    def columns_of_type(self, type_name: str) -> list[tuple[Table, int, Column]]:
        out = []
        for table in self.tables:
            for i, col in enumerate(table.columns):
                if self.gold[(table.id, i)] == type_name:
                    out.append((table, i, col))
        return out


def generate_synthetic_corpus(
    generators: dict | None = None,
    n_tables: int = 50,
    seed: int = 0,
    null_columns_per_table: tuple[int, int] = (1, 3),
    typed_columns_per_table: tuple[int, int] = (2, 5),
    rows: tuple[int, int] = (15, 30),
    informative_header_prob: float = 0.5,
    misleading_header_prob: float = 0.0,
    table_prefix: str = "synth",
    types: list[str] | None = None,
) -> SyntheticCorpus:
    """Seeded table generator: typed columns drawn from the per-type value
    generators plus background noise columns labeled 'null'."""
    generators = generators if generators is not None else default_generators()
    if types is None:
        types = sorted(generators)
    if len(types) < 1:
        raise ValueError("need at least one generator type")
    rng = np.random.default_rng(seed)
    tables: list[Table] = []
    gold: dict[tuple[str, int], str] = {}
    for t_idx in range(n_tables):
        table_id = f"{table_prefix}-{t_idx:04d}"
        n_rows = int(rng.integers(rows[0], rows[1] + 1))
        n_typed = int(rng.integers(typed_columns_per_table[0], typed_columns_per_table[1] + 1))
        n_null = int(rng.integers(null_columns_per_table[0], null_columns_per_table[1] + 1))
        chosen = [types[int(i)] for i in rng.integers(0, len(types), size=n_typed)]
        cols = []
        labels = []
        for type_name in chosen:
            gen = generators[type_name]
            values = tuple(gen(rng) for _ in range(n_rows))
            u = rng.random()
            if u < informative_header_prob:
                header = type_name.replace(" ", "_")
            elif u < informative_header_prob + misleading_header_prob and len(types) > 1:
                # occasionally a column carries another type's name, as
                # mislabeled real-world tables do
                other = [t for t in types if t != type_name]
                header = _pick(rng, other).replace(" ", "_")
            else:
                header = _pick(rng, _GENERIC_HEADERS)
            cols.append(Column(header, values, table_id))
            labels.append(type_name)
        for _ in range(n_null):
            values = tuple(_noise_value(rng) for _ in range(n_rows))
            header = _pick(rng, _GENERIC_HEADERS)
            cols.append(Column(header, values, table_id))
            labels.append(NULL_TYPE)
        # shuffle column order
        order = rng.permutation(len(cols))
        cols = [cols[i] for i in order]
        labels = [labels[i] for i in order]
        table = Table(table_id, tuple(cols))
        tables.append(table)
        for i, lab in enumerate(labels):
            gold[(table_id, i)] = lab
    manifest = {
        "seed": seed,
        "n_tables": n_tables,
        "types": list(types),
        "n_columns": len(gold),
        "type_counts": dict(Counter(gold.values())),
    }
    return SyntheticCorpus(tables, gold, manifest)


# --------------------------------------------------------------------------
# Adaptation experiment (new types + shifted types vs baselines)
# --------------------------------------------------------------------------

@dataclass
class AdaptationExperimentConfig:
    new_types: tuple[str, ...] = ("first name", "postal code", "city", "gender")
    unseen_types: tuple[str, ...] = ("first name", "postal code")
    cycles: int = 5
    seed: int = 7
    k_retrieval: int = 5
    forest: ForestConfig = field(default_factory=lambda: ForestConfig(n_trees=30, max_depth=12, seed=3))
    hnsw: HnswConfig = field(default_factory=lambda: HnswConfig(M=8, ef_construction=50, ef_search=50, seed=2))
    dictionary_baseline_top_k: int = 10
    n_train_tables: int = 60
    n_pool_tables: int = 60
    n_eval_tables: int = 40


#: Fixed "retrieved from the web" patterns for the regex baseline; only some
#: new types have a usable pattern, mirroring that many types are not
#: regex-expressible.
REGEX_BASELINE_PATTERNS = {
    "postal code": r"\d{5}",
    "gender": r"(?i)m|f|male|female",
}


def run_adaptation_experiment(
    cfg: AdaptationExperimentConfig | None = None,
    embedder=None,
    out_dir: str | Path | None = None,
) -> dict:
    """Per-cycle, per-type metrics for the adaptive system and both baselines.

    Four target types: two unseen (out-of-distribution) and two existing in
    the seed catalog but with shifted value distributions. Each type gets an
    independent run: one example column per cycle, weak labels retrieved from
    a pool of target-distribution columns, classifier retrained per cycle.
    """
    from adatyper.embed import ReferenceEmbedder, EmbedderConfig
    from adatyper.match import match_regex, match_dictionary

    cfg = cfg or AdaptationExperimentConfig()
    embedder = embedder or ReferenceEmbedder(EmbedderConfig(dimension=128))

    seed_types = [t for t in sorted(default_generators()) if t not in cfg.unseen_types]

    # Training distribution (variant a), restricted to the seed catalog types.
    train = generate_synthetic_corpus(
        default_generators("a"),
        n_tables=cfg.n_train_tables,
        seed=cfg.seed,
        types=seed_types,
        table_prefix="train",
    )
    # Target-distribution pool backing the ANN index (variant b, all types,
    # anonymous headers: retrieval works on values alone).
    pool = generate_synthetic_corpus(
        default_generators("b"),
        n_tables=cfg.n_pool_tables,
        seed=cfg.seed + 1,
        informative_header_prob=0.0,
        table_prefix="pool",
    )
    # Evaluation set from the target distribution, headers uninformative so
    # improvements are attributable to adaptation.
    eval_corpus = generate_synthetic_corpus(
        default_generators("b"),
        n_tables=cfg.n_eval_tables,
        seed=cfg.seed + 2,
        informative_header_prob=0.0,
        table_prefix="eval",
    )
    # Example columns, one per cycle per type, from the target distribution.
    examples = generate_synthetic_corpus(
        default_generators("b"),
        n_tables=cfg.cycles * 4,
        seed=cfg.seed + 3,
        informative_header_prob=0.0,
        table_prefix="examples",
        types=list(cfg.new_types),
    )

    eval_ids = {t.id for t in eval_corpus.tables}
    results: dict[str, dict] = {}

    for target_type in cfg.new_types:
        example_cols = [c for _t, _i, c in examples.columns_of_type(target_type)][: cfg.cycles]
        if len(example_cols) < cfg.cycles:
            raise AdaTyperError(f"not enough example columns generated for {target_type!r}")
        for col in example_cols:
            if col.source_table_id in eval_ids:
                raise LeakageError(f"example column from eval table {col.source_table_id}")

        catalog = TypeCatalog(
            [SemanticType(t, "user-defined") for t in seed_types]
        )
        corpus = build_corpus(train.labeled_columns(), catalog, embedder, seed=cfg.seed)
        forest = train_forest(corpus, cfg.forest)
        index = build_index(
            [
                (embedder.embed_column(col).vector, {"column_id": f"{t.id}#{i}"})
                for t, i, col in _all_columns(pool.tables)
                if not embedder.embed_column(col).is_zero
            ],
            cfg.hnsw,
        )
        dictionary = ValueDictionary()
        rules: list[RegexRule] = []
        predictor = Predictor(catalog, embedder, rules, dictionary, forest)

        # dictionary baseline state: examples seen so far
        seen_examples: list[tuple[Column, str]] = []
        baseline_regex_rules = (
            [RegexRule(target_type, REGEX_BASELINE_PATTERNS[target_type])]
            if target_type in REGEX_BASELINE_PATTERNS
            else []
        )

        per_cycle = []
        for cycle in range(cfg.cycles + 1):
            if cycle > 0:
                col = example_cols[cycle - 1]
                fb = Feedback(col, target_type, is_new_type=target_type not in catalog)
                catalog, corpus, forest, report = adapt(
                    fb,
                    index,
                    corpus,
                    catalog,
                    cfg.forest,
                    embedder,
                    AdaptOptions(k=cfg.k_retrieval),
                    cycle=cycle,
                )
                adapt_dictionary(fb, dictionary, top_m=10)
                predictor = Predictor(catalog, embedder, rules, dictionary, forest)
                seen_examples.append((col, target_type))

            # adaptive system
            preds = []
            for table in eval_corpus.tables:
                preds.extend(predictor.predict_table(table))
            gold = _restrict_gold(eval_corpus.gold, target_type)
            ada = score(_restrict_preds(preds, gold), gold)

            # dictionary baseline: dictionary matcher alone over examples so far
            if seen_examples:
                bdict = populate_dictionary(seen_examples, cfg.dictionary_baseline_top_k)
            else:
                bdict = ValueDictionary()
            dict_preds = _matcher_predictions(
                eval_corpus.tables, lambda c: match_dictionary(c, bdict), PipelineConfig().tau_dictionary
            )
            bdict_score = score(_restrict_preds(dict_preds, gold), gold)

            # regex baseline: fixed pattern set
            regex_preds = _matcher_predictions(
                eval_corpus.tables,
                lambda c: match_regex(c, baseline_regex_rules),
                PipelineConfig().tau_regex,
            )
            bregex_score = score(_restrict_preds(regex_preds, gold), gold)

            per_cycle.append(
                {
                    "cycle": cycle,
                    "adatyper": _type_metrics(ada, target_type),
                    "dictionary_baseline": _type_metrics(bdict_score, target_type),
                    "regex_baseline": _type_metrics(bregex_score, target_type),
                }
            )
        results[target_type] = {
            "cycles": per_cycle,
            "delta_f1": per_cycle[-1]["adatyper"]["f1"] - per_cycle[0]["adatyper"]["f1"],
        }

    summary = {
        "config": {
            "new_types": list(cfg.new_types),
            "unseen_types": list(cfg.unseen_types),
            "cycles": cfg.cycles,
            "seed": cfg.seed,
            "k_retrieval": cfg.k_retrieval,
        },
        "per_type": results,
        "mean_delta_f1": float(np.mean([r["delta_f1"] for r in results.values()])),
        "mean_f1_final": {
            method: float(
                np.mean(
                    [results[t]["cycles"][-1][method]["f1"] for t in cfg.new_types]
                )
            )
            for method in ("adatyper", "dictionary_baseline", "regex_baseline")
        },
    }
    if out_dir is not None:
        _emit_experiment_artifacts(summary, Path(out_dir))
    return summary


def _all_columns(tables: list[Table]):
    for t in tables:
        for i, c in enumerate(t.columns):
            yield t, i, c


def _restrict_gold(gold: dict, target_type: str) -> dict:
    """Gold restricted to the one-vs-rest view of the target type: columns of
    the target type keep their label, all others count as null context."""
    return {
        ref: (t if t == target_type else NULL_TYPE) for ref, t in gold.items()
    }


def _restrict_preds(preds: list[Prediction], gold: dict) -> list[Prediction]:
    return [p for p in preds if (p.table_id, p.column_index) in gold]


def _type_metrics(report: ScoreReport, type_name: str) -> dict:
    m = report.per_type.get(type_name, {"precision": 0.0, "recall": 0.0, "f1": 0.0, "support": 0})
    return {k: m[k] for k in ("precision", "recall", "f1")}


def _matcher_predictions(tables: list[Table], matcher, tau: float) -> list[Prediction]:
    preds = []
    for table in tables:
        for i, col in enumerate(table.columns):
            r = matcher(col)
            if r.type_name != NULL_TYPE and r.confidence >= tau:
                preds.append(Prediction(table.id, i, r.type_name, r.confidence, r.estimator))
            else:
                preds.append(Prediction(table.id, i, NULL_TYPE, 0.0, "none"))
    return preds


def _emit_experiment_artifacts(summary: dict, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "adaptation_summary.json").write_text(json.dumps(summary, indent=2))
    # per-cycle curves, one row per (type, cycle, method)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["type", "cycle", "method", "precision", "recall", "f1"])
    for type_name, res in summary["per_type"].items():
        for row in res["cycles"]:
            for method in ("adatyper", "dictionary_baseline", "regex_baseline"):
                m = row[method]
                w.writerow([type_name, row["cycle"], method, m["precision"], m["recall"], m["f1"]])
    (out_dir / "adaptation_curves.csv").write_text(buf.getvalue())
    # final-cycle delta table
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["type", "regex_f1", "dictionary_f1", "adatyper_f1_initial", "adatyper_f1_final", "delta_f1"])
    for type_name, res in summary["per_type"].items():
        first = res["cycles"][0]["adatyper"]["f1"]
        last = res["cycles"][-1]
        w.writerow(
            [
                type_name,
                last["regex_baseline"]["f1"],
                last["dictionary_baseline"]["f1"],
                first,
                last["adatyper"]["f1"],
                res["delta_f1"],
            ]
        )
    (out_dir / "adaptation_deltas.csv").write_text(buf.getvalue())
