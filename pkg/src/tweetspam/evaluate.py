"""Confusion-matrix metrics, cross-validated evaluation, grid search on a
held-aside tuning subset, and the feature-extraction timing benchmark.

The spam class is the positive class everywhere, matching how results are
reported. Folds are processed in fold-id order so aggregated reports are
deterministic.
"""

from __future__ import annotations

import itertools
import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import text as text_mod
from .classify import ClassifierSpec, make_spec, train_model
from .corpus import SPAM, LabeledCorpus, stratified_kfold
from .errors import ConfigError
from .features import (
    CHI2_FRACTION,
    DEFAULT_MIN_DF,
    FeatureConfig,
    ResourceBundle,
    SpamPhraseMatcher,
    build_vocabulary,
    content_features,
    default_resources,
    fit_pipeline,
    ngram_tokens,
    ngram_vectorize,
    parse_feature_config,
    pos_counts,
    prepare_records,
    sentiment_features,
    user_features,
)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float


def confusion(gold, predicted) -> ConfusionMatrix:
    """Count confusion cells with spam as the positive class."""
    if len(gold) != len(predicted):
        raise ValueError(
            f"gold and predicted lengths differ ({len(gold)} vs {len(predicted)})"
        )
    tp = fp = fn = tn = 0
    for g, p in zip(gold, predicted):
        g_spam = g == SPAM or g == 1
        p_spam = p == SPAM or p == 1
        if g_spam and p_spam:
            tp += 1
        elif g_spam:
            fn += 1
        elif p_spam:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def prf1(cm: ConfusionMatrix) -> Metrics:
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp > 0 else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn > 0 else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return Metrics(precision=precision, recall=recall, f1=f1)


@dataclass(frozen=True)
class FoldResult:
    cm: ConfusionMatrix
    metrics: Metrics


@dataclass
class EvalReport:
    config: dict
    seed: int
    k: int
    folds: list[FoldResult]
    mean: Metrics
    std: Metrics
    timings: dict | None = None


def _aggregate(folds: list[FoldResult]) -> tuple[Metrics, Metrics]:
    def stats(name):
        values = [getattr(f.metrics, name) for f in folds]
        mean = float(np.mean(values))
        std = float(np.std(values))  # population std over the k folds
        return mean, std

    p_mean, p_std = stats("precision")
    r_mean, r_std = stats("recall")
    f_mean, f_std = stats("f1")
    return (
        Metrics(precision=p_mean, recall=r_mean, f1=f_mean),
        Metrics(precision=p_std, recall=r_std, f1=f_std),
    )


def _labels_array(corpus: LabeledCorpus) -> np.ndarray:
    return np.asarray(
        [1 if r.label == SPAM else 0 for r in corpus.records], dtype=np.int64
    )


def cross_validate(
    corpus: LabeledCorpus,
    feature_config: str | FeatureConfig,
    spec: ClassifierSpec,
    k: int,
    seed: int,
    resources: ResourceBundle | None = None,
    min_df: int = DEFAULT_MIN_DF,
    select_fraction: float = CHI2_FRACTION,
    trainer=None,
    capture: list | None = None,
) -> EvalReport:
    """k-fold cross validation with per-fold pipeline fitting.

    The vocabulary, scaler, and (for the linear SVM) chi-square mask are
    fitted on each fold's training split only, so held-out records never
    influence fitted state. `trainer` swaps in a stub classifier for
    tests; `capture` collects (fold, pipeline) pairs for leakage checks.
    """
    corpus.require_labeled()
    if isinstance(feature_config, str):
        feature_config = parse_feature_config(feature_config)
    if resources is None:
        resources = default_resources()

    y_all = _labels_array(corpus)
    timings = {"prepare_s": 0.0, "fit_s": 0.0, "train_s": 0.0, "predict_s": 0.0}

    t0 = time.perf_counter()
    prepared = prepare_records(corpus.records, resources)
    timings["prepare_s"] = time.perf_counter() - t0

    plan = stratified_kfold(corpus, k, seed)
    folds: list[FoldResult] = []
    for fold in range(k):
        train_idx, test_idx = plan.fold_indices(fold)
        train_prepared = [prepared[i] for i in train_idx]
        test_prepared = [prepared[i] for i in test_idx]
        y_train = y_all[train_idx]
        y_test = y_all[test_idx]

        t0 = time.perf_counter()
        pipeline = fit_pipeline(
            train_prepared,
            y_train,
            feature_config,
            min_df=min_df,
            select_fraction=select_fraction if spec.kind == "linear_svm" else None,
        )
        timings["fit_s"] += time.perf_counter() - t0
        if capture is not None:
            capture.append((fold, pipeline))

        t0 = time.perf_counter()
        if trainer is not None:
            X_raw_tr, X_scaled_tr = pipeline.matrices(train_prepared)
            predict_fn = trainer(X_raw_tr, X_scaled_tr, y_train, pipeline)
            timings["train_s"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            X_raw_te, X_scaled_te = pipeline.matrices(test_prepared)
            pred = np.asarray(predict_fn(X_raw_te, X_scaled_te, test_idx))
        else:
            X_raw_tr, X_scaled_tr = pipeline.matrices(train_prepared)
            model = train_model(spec, pipeline, X_raw_tr, X_scaled_tr, y_train)
            timings["train_s"] += time.perf_counter() - t0
            t0 = time.perf_counter()
            X_raw_te, X_scaled_te = pipeline.matrices(test_prepared)
            pred, _ = model.predict_matrix(X_raw_te, X_scaled_te)
        timings["predict_s"] += time.perf_counter() - t0

        cm = confusion(y_test, pred)
        folds.append(FoldResult(cm=cm, metrics=prf1(cm)))

    mean, std = _aggregate(folds)
    config = {
        "features": feature_config.to_string(),
        "classifier": spec.kind,
        "hyperparameters": dict(spec.hyperparameters),
        "classifier_seed": spec.seed,
        "k": k,
        "min_df": min_df,
    }
    if spec.kind == "linear_svm":
        config["chi2_fraction"] = select_fraction
    return EvalReport(
        config=config, seed=seed, k=k, folds=folds, mean=mean, std=std, timings=timings
    )


def report_to_dict(report: EvalReport, include_timings: bool = False) -> dict:
    """Report-file form. Timings are wall-clock and break byte-level
    reproducibility, so they serialize as null unless asked for."""
    return {
        "config": report.config,
        "seed": report.seed,
        "folds": [
            {
                "tp": f.cm.tp,
                "fp": f.cm.fp,
                "fn": f.cm.fn,
                "tn": f.cm.tn,
                "precision": f.metrics.precision,
                "recall": f.metrics.recall,
                "f1": f.metrics.f1,
            }
            for f in report.folds
        ],
        "mean": {
            "precision": report.mean.precision,
            "recall": report.mean.recall,
            "f1": report.mean.f1,
        },
        "std": {
            "precision": report.std.precision,
            "recall": report.std.recall,
            "f1": report.std.f1,
        },
        "timings": report.timings if include_timings else None,
    }


# ---------------------------------------------------------------------------
# grid search


@dataclass
class GridResult:
    points: list[tuple[dict, float]]  # (hyperparameters, mean F1) in grid order
    best_params: dict
    best_f1: float
    subset_indices: tuple[int, ...]
    tune_fraction: float
    k: int
    seed: int


def _tuning_subset(corpus: LabeledCorpus, tune_fraction: float, seed: int) -> list[int]:
    """Stratified seeded subset: ceil(fraction * n) indices per class."""
    by_label: dict[str, list[int]] = {}
    for index, record in enumerate(corpus.records):
        by_label.setdefault(record.label, []).append(index)
    rng = np.random.default_rng(seed)
    chosen: list[int] = []
    for label in sorted(by_label):
        indices = by_label[label]
        n_take = min(len(indices), math.ceil(tune_fraction * len(indices)))
        picks = rng.choice(len(indices), size=n_take, replace=False)
        chosen.extend(indices[i] for i in picks)
    chosen.sort()
    return chosen


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product of hyperparameter values, in file order."""
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("grid must be a non-empty map of hyperparameter arrays")
    names = list(grid)
    for name in names:
        if not isinstance(grid[name], list) or not grid[name]:
            raise ConfigError(f"grid entry {name!r} must be a non-empty array")
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


def grid_search(
    corpus: LabeledCorpus,
    feature_config: str | FeatureConfig,
    kind: str,
    grid: dict,
    tune_fraction: float,
    k: int,
    seed: int,
    resources: ResourceBundle | None = None,
    min_df: int = DEFAULT_MIN_DF,
) -> GridResult:
    """Cross-validate every grid point on a stratified tuning subset.

    The best point is the highest mean F1, ties resolved by earliest grid
    order. Subset indices are reported so the final evaluation can exclude
    (default) or include them.
    """
    corpus.require_labeled()
    if not 0.0 < tune_fraction <= 1.0:
        raise ConfigError(f"tune_fraction must be in (0, 1], got {tune_fraction}")
    subset = _tuning_subset(corpus, tune_fraction, seed)
    sub_corpus = LabeledCorpus(records=tuple(corpus.records[i] for i in subset))
    points: list[tuple[dict, float]] = []
    best_params: dict | None = None
    best_f1 = -1.0
    for params in expand_grid(grid):
        spec = make_spec(kind, params, seed=seed)
        report = cross_validate(
            sub_corpus, feature_config, spec, k, seed, resources=resources, min_df=min_df
        )
        points.append((params, report.mean.f1))
        if report.mean.f1 > best_f1:
            best_f1 = report.mean.f1
            best_params = params
    return GridResult(
        points=points,
        best_params=best_params,
        best_f1=best_f1,
        subset_indices=tuple(subset),
        tune_fraction=tune_fraction,
        k=k,
        seed=seed,
    )


def grid_result_to_dict(result: GridResult) -> dict:
    return {
        "points": [{"hyperparameters": p, "mean_f1": f} for p, f in result.points],
        "best": {"hyperparameters": result.best_params, "mean_f1": result.best_f1},
        "tuning_subset": {
            "fraction": result.tune_fraction,
            "indices": list(result.subset_indices),
        },
        "k": result.k,
        "seed": result.seed,
    }


# ---------------------------------------------------------------------------
# feature-timing benchmark


BENCH_FAMILIES = (
    "user_features",
    "ngram",
    "sentiment_features",
    "spam_words",
    "pos_counts",
    "content_full",
    "content_without_spam_words",
    "content_without_pos",
)


def bench_features(
    corpus: LabeledCorpus,
    feature_set: str | None = None,
    repetitions: int = 5,
    resources: ResourceBundle | None = None,
    min_df: int = DEFAULT_MIN_DF,
) -> dict:
    """Median wall-clock (over repetitions) per feature family, normalized
    to seconds per 1000 tweets.

    Corpora smaller than 1000 tweets are padded by cycling (and the report
    says so). Fitting the n-gram vocabulary is untimed; the row measures
    extraction with a prefitted vocabulary.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if resources is None:
        resources = default_resources()

    records = list(corpus.records)
    if not records:
        raise ConfigError("benchmark needs a non-empty corpus")
    padded = len(records) < 1000
    while len(records) < 1000:
        records.extend(records[: 1000 - len(records)])
    n = len(records)

    families = list(BENCH_FAMILIES)
    if feature_set is not None:
        config = parse_feature_config(feature_set)
        families = []
        if config.user:
            families.append("user_features")
        if config.ngram:
            families.append("ngram")
        if config.sentiment:
            families.append("sentiment_features")
        if config.content:
            families.extend(
                ("spam_words", "pos_counts", "content_full",
                 "content_without_spam_words", "content_without_pos")
            )
        if not families:
            raise ConfigError(f"feature set {feature_set!r} selects nothing to bench")

    # untimed shared setup
    normalized = [text_mod.preprocess(r.text) for r in records]
    tokens = [text_mod.tokenize(nt) for nt in normalized]
    streams = [ngram_tokens(toks) for toks in tokens]
    word_lists = [
        [t.surface.lower() for t in toks if t.kind == "word"] for toks in tokens
    ]
    matcher = SpamPhraseMatcher(resources.spam_phrases)
    vocab = None
    if "ngram" in families:
        vocab = build_vocabulary(streams, (1, 2), min_df=min_df)

    def run_user():
        for record in records:
            user_features(record)

    def run_ngram():
        for record in records:
            toks = text_mod.tokenize(text_mod.preprocess(record.text))
            ngram_vectorize(ngram_tokens(toks), vocab, "tf")

    def run_sentiment():
        for record in records:
            toks = text_mod.tokenize(text_mod.preprocess(record.text))
            sentiment_features(
                text_mod.strip_for_sentiment(toks), resources.sentiment_lexicons
            )

    def run_spam_words():
        for words in word_lists:
            matcher.count(words)

    def run_pos():
        for toks in tokens:
            pos_counts(text_mod.pos_tag(toks))

    def make_content_runner(include_spam: bool, include_pos: bool):
        def run():
            for record in records:
                nt = text_mod.preprocess(record.text)
                toks = text_mod.tokenize(nt)
                tags = text_mod.pos_tag(toks)
                content_features(
                    record,
                    toks,
                    tags,
                    matcher,
                    normalized=nt,
                    include_spam_words=include_spam,
                    include_pos=include_pos,
                )
        return run

    runners = {
        "user_features": run_user,
        "ngram": run_ngram,
        "sentiment_features": run_sentiment,
        "spam_words": run_spam_words,
        "pos_counts": run_pos,
        "content_full": make_content_runner(True, True),
        "content_without_spam_words": make_content_runner(False, True),
        "content_without_pos": make_content_runner(True, False),
    }

    samples: dict[str, list[float]] = {family: [] for family in families}
    for _ in range(repetitions):
        for family in families:
            start = time.perf_counter()
            runners[family]()
            samples[family].append(time.perf_counter() - start)

    per_1000 = {
        family: statistics.median(times) * 1000.0 / n
        for family, times in samples.items()
    }
    return {
        "n_tweets": n,
        "padded": padded,
        "repetitions": repetitions,
        "seconds_per_1000": per_1000,
    }
