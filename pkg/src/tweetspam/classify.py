"""Five from-scratch classifiers behind one train/predict contract, plus
versioned model serialization that bundles the fitted feature pipeline.

Class encoding is fixed throughout: 0 = ham, 1 = spam. Scores are spam
confidences in [0, 1]; a score of exactly 0.5 resolves to ham except where
a classifier's own tie rule (KNN summed distance, forest training
majority) says otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .corpus import HAM, SPAM, TweetRecord
from .errors import ChecksumError, ConfigError, ModelFormatError, VersionError
from .features import FittedPipeline, ResourceBundle, default_resources, prepare_record
from .serialize import atomic_write_text, canonical_json, sha256_hex

FORMAT_VERSION = 1

KINDS = ("bernoulli_nb", "knn", "linear_svm", "decision_tree", "random_forest")

CLASSIFIER_ALIASES = {
    "nb": "bernoulli_nb",
    "bernoulli_nb": "bernoulli_nb",
    "knn": "knn",
    "svm": "linear_svm",
    "linear_svm": "linear_svm",
    "tree": "decision_tree",
    "dt": "decision_tree",
    "decision_tree": "decision_tree",
    "rf": "random_forest",
    "forest": "random_forest",
    "random_forest": "random_forest",
}

DEFAULT_HYPERPARAMETERS = {
    "bernoulli_nb": {"alpha": 1.0},
    "knn": {"k": 5},
    "linear_svm": {"C": 1.0, "epochs": 50},
    "decision_tree": {"max_depth": None, "min_samples_split": 2},
    "random_forest": {
        "n_trees": 100,
        "max_depth": None,
        "min_samples_split": 2,
        "feature_subsample": None,
    },
}

# Trees work on dense columns; matrices up to this many cells are densified
# wholesale, larger ones are sliced per node.
_DENSE_CELL_LIMIT = 50_000_000


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str
    hyperparameters: dict
    seed: int = 42


@dataclass(frozen=True)
class Prediction:
    label: str  # "spam" | "ham"
    score: float  # spam confidence in [0, 1]


def _check_positive(params, name, integer=False):
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"hyperparameter '{name}' must be a number")
    if integer and not isinstance(value, int):
        raise ConfigError(f"hyperparameter '{name}' must be an integer")
    if value <= 0:
        raise ConfigError(f"hyperparameter '{name}' must be > 0")


def make_spec(kind: str, hyperparameters: dict | None = None, seed: int = 42) -> ClassifierSpec:
    """Build a validated spec, merging user values over per-kind defaults."""
    kind = CLASSIFIER_ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ConfigError(f"unknown classifier kind {kind!r}")
    params = dict(DEFAULT_HYPERPARAMETERS[kind])
    for name, value in (hyperparameters or {}).items():
        if name not in params:
            raise ConfigError(f"unknown hyperparameter {name!r} for {kind}")
        params[name] = value
    if kind == "bernoulli_nb":
        _check_positive(params, "alpha")
    elif kind == "knn":
        _check_positive(params, "k", integer=True)
    elif kind == "linear_svm":
        _check_positive(params, "C")
        _check_positive(params, "epochs", integer=True)
    else:
        if kind == "random_forest":
            _check_positive(params, "n_trees", integer=True)
            if params["feature_subsample"] is not None:
                _check_positive(params, "feature_subsample", integer=True)
        if params["max_depth"] is not None:
            _check_positive(params, "max_depth", integer=True)
        _check_positive(params, "min_samples_split", integer=True)
        if params["min_samples_split"] < 2:
            raise ConfigError("hyperparameter 'min_samples_split' must be >= 2")
    return ClassifierSpec(kind=kind, hyperparameters=params, seed=seed)


# ---------------------------------------------------------------------------
# shared helpers


def _as_csr(X) -> sp.csr_matrix:
    return X.tocsr() if sp.issparse(X) else sp.csr_matrix(np.asarray(X, dtype=np.float64))


def _maybe_dense(X):
    if isinstance(X, np.ndarray):
        return np.asarray(X, dtype=np.float64)
    if X.shape[0] * X.shape[1] <= _DENSE_CELL_LIMIT:
        return np.asarray(X.todense(), dtype=np.float64)
    return X.tocsr()


def _binarize(X):
    """value > 0 -> 1 (negatives and zeros -> 0), on unscaled features."""
    if sp.issparse(X):
        Xb = X.tocsr(copy=True)
        Xb.data = (Xb.data > 0).astype(np.float64)
        Xb.eliminate_zeros()
        return Xb
    return (np.asarray(X) > 0).astype(np.float64)


def _row_squares(X) -> np.ndarray:
    if sp.issparse(X):
        return np.asarray(X.multiply(X).sum(axis=1)).reshape(-1)
    return (X * X).sum(axis=1)


# ---------------------------------------------------------------------------
# Bernoulli naive Bayes


def _fit_nb(X_raw, y: np.ndarray, alpha: float) -> dict:
    Xb = _binarize(X_raw)
    n = y.shape[0]
    log_prior = np.empty(2)
    log_p1 = np.empty((2, Xb.shape[1]))
    log_p0 = np.empty((2, Xb.shape[1]))
    for cls in (0, 1):
        rows = np.flatnonzero(y == cls)
        if rows.size == 0:
            raise ValueError("training data must contain both classes")
        counts = np.asarray(Xb[rows].sum(axis=0)).reshape(-1)
        p1 = (counts + alpha) / (rows.size + 2.0 * alpha)
        log_prior[cls] = math.log(rows.size / n)
        log_p1[cls] = np.log(p1)
        log_p0[cls] = np.log1p(-p1)
    return {"log_prior": log_prior, "log_p1": log_p1, "log_p0": log_p0}


def _nb_posteriors(params: dict, X_raw) -> np.ndarray:
    """Class posteriors including absent-feature likelihood terms."""
    Xb = _binarize(X_raw)
    n = Xb.shape[0]
    jll = np.empty((n, 2))
    for cls in (0, 1):
        base = params["log_prior"][cls] + params["log_p0"][cls].sum()
        delta = params["log_p1"][cls] - params["log_p0"][cls]
        jll[:, cls] = base + (Xb @ delta)
    shift = jll.max(axis=1, keepdims=True)
    posterior = np.exp(jll - shift)
    posterior /= posterior.sum(axis=1, keepdims=True)
    return posterior


# ---------------------------------------------------------------------------
# k-nearest neighbours


def _knn_predict(params: dict, X_scaled, k: int):
    Xtr = params["train"]
    ytr = params["labels"]
    Xq = _as_csr(X_scaled)
    cross = (Xq @ Xtr.T).toarray()
    d2 = _row_squares(Xq)[:, None] + _row_squares(Xtr)[None, :] - 2.0 * cross
    labels = np.empty(Xq.shape[0], dtype=np.int64)
    scores = np.empty(Xq.shape[0])
    for i in range(Xq.shape[0]):
        # stable sort: equal distances resolve to the lower training index
        nearest = np.argsort(d2[i], kind="stable")[:k]
        near_labels = ytr[nearest]
        spam_votes = int(near_labels.sum())
        ham_votes = k - spam_votes
        if spam_votes != ham_votes:
            label = 1 if spam_votes > ham_votes else 0
        else:
            spam_sum = d2[i][nearest[near_labels == 1]].sum()
            ham_sum = d2[i][nearest[near_labels == 0]].sum()
            # vote tie: smaller summed distance wins; equal sums -> ham
            label = 1 if spam_sum < ham_sum else 0
        labels[i] = label
        scores[i] = spam_votes / k
    return labels, scores


# ---------------------------------------------------------------------------
# linear SVM (hinge loss + L2, epoch-wise seeded subgradient descent)


def _svm_objective(X: sp.csr_matrix, y_signed: np.ndarray, w: np.ndarray, b: float, lam: float) -> float:
    margins = 1.0 - y_signed * (X @ w + b)
    hinge = np.maximum(0.0, margins).mean()
    return 0.5 * lam * float(w @ w) + float(hinge)


def _fit_svm(X_scaled, y: np.ndarray, C: float, epochs: int, seed: int) -> dict:
    X = _as_csr(X_scaled)
    if not np.all(np.isfinite(X.data)):
        raise ValueError("SVM training requires finite feature values")
    n, d = X.shape
    lam = 1.0 / (C * n)
    y_signed = np.where(y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    indptr, indices, data = X.indptr, X.indices, X.data
    # w is kept as s * v so the per-step shrink is O(1)
    v = np.zeros(d)
    s = 1.0
    b = 0.0
    t = 0
    objective = [_svm_objective(X, y_signed, np.zeros(d), 0.0, lam)]
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            lo, hi = indptr[i], indptr[i + 1]
            cols = indices[lo:hi]
            vals = data[lo:hi]
            margin = y_signed[i] * (s * float(v[cols] @ vals) + b)
            if t > 1:
                s *= 1.0 - 1.0 / t  # at t=1 the shrink zeroes an already-zero w
            if margin < 1.0:
                v[cols] += (eta * y_signed[i] / s) * vals
                b += eta * y_signed[i]
        objective.append(_svm_objective(X, y_signed, s * v, b, lam))
    return {"weights": s * v, "bias": b, "objective": np.asarray(objective)}


# ---------------------------------------------------------------------------
# CART trees and random forest


def _column_block(X, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    if isinstance(X, np.ndarray):
        return X[np.ix_(rows, cols)]
    return np.asarray(X[rows][:, cols].todense())


def _best_split(X, y: np.ndarray, rows: np.ndarray, cols: np.ndarray):
    """Best (column, threshold, weighted Gini) over candidate columns.

    Thresholds are midpoints of consecutive distinct sorted values. Ties
    break toward the lower column index, then the lower threshold. Returns
    None when every candidate column is constant on these rows.
    """
    m = rows.shape[0]
    if m < 2:
        return None
    A = _column_block(X, rows, cols)
    y_node = y[rows].astype(np.float64)
    order = np.argsort(A, axis=0, kind="stable")
    svals = np.take_along_axis(A, order, axis=0)
    spam_cum = np.cumsum(y_node[order], axis=0)
    nl = np.arange(1, m, dtype=np.float64)[:, None]
    ls = spam_cum[:-1]
    lh = nl - ls
    nr = m - nl
    rs = spam_cum[-1] - ls
    rh = nr - rs
    gini_left = 1.0 - (ls / nl) ** 2 - (lh / nl) ** 2
    gini_right = 1.0 - (rs / nr) ** 2 - (rh / nr) ** 2
    weighted = (nl * gini_left + nr * gini_right) / m
    weighted = np.where(svals[1:] > svals[:-1], weighted, np.inf)
    best = None
    for j in range(A.shape[1]):
        column = weighted[:, j]
        i = int(np.argmin(column))  # first minimum -> lowest threshold
        score = column[i]
        if not np.isfinite(score):
            continue
        if best is None or score < best[0]:
            threshold = (svals[i, j] + svals[i + 1, j]) / 2.0
            best = (float(score), int(cols[j]), float(threshold))
    if best is None:
        return None
    return best[1], best[2], best[0]


def _column_values(X, rows: np.ndarray, col: int) -> np.ndarray:
    if isinstance(X, np.ndarray):
        return X[rows, col]
    return np.asarray(X[rows][:, [col]].todense()).reshape(-1)


def _grow_tree(
    X,
    y: np.ndarray,
    rows: np.ndarray,
    max_depth: int | None,
    min_samples_split: int,
    rng: np.random.Generator | None = None,
    n_candidates: int | None = None,
) -> dict:
    """Grow a CART tree greedily by Gini reduction; nodes in preorder.

    When `rng`/`n_candidates` are given, each split samples that many
    candidate columns without replacement (random-forest mode); sampling
    is skipped entirely when n_candidates covers every column, which makes
    the degenerate forest identical to the plain tree.
    """
    d = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    count_ham: list[int] = []
    count_spam: list[int] = []

    def new_node(node_rows: np.ndarray) -> int:
        index = len(feature)
        spam = int(y[node_rows].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        count_ham.append(node_rows.shape[0] - spam)
        count_spam.append(spam)
        return index

    stack = [(new_node(rows), rows, 0)]
    while stack:
        node, node_rows, depth = stack.pop()
        m = node_rows.shape[0]
        spam = count_spam[node]
        if spam == 0 or spam == m:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if m < min_samples_split:
            continue
        if rng is not None and n_candidates is not None and n_candidates < d:
            cols = np.sort(rng.choice(d, size=n_candidates, replace=False))
        else:
            cols = np.arange(d)
        found = _best_split(X, y, node_rows, cols)
        if found is None:
            continue
        col, thr, weighted = found
        parent_gini = 1.0 - (spam / m) ** 2 - ((m - spam) / m) ** 2
        if not weighted < parent_gini:
            continue  # no impurity improvement
        go_left = _column_values(X, node_rows, col) <= thr
        if not go_left.any() or go_left.all():
            continue  # degenerate threshold between adjacent doubles
        left_rows = node_rows[go_left]
        right_rows = node_rows[~go_left]
        feature[node] = col
        threshold[node] = thr
        left_index = new_node(left_rows)
        right_index = new_node(right_rows)
        left[node] = left_index
        right[node] = right_index
        stack.append((right_index, right_rows, depth + 1))
        stack.append((left_index, left_rows, depth + 1))

    return {
        "feature": np.asarray(feature, dtype=np.int64),
        "threshold": np.asarray(threshold, dtype=np.float64),
        "left": np.asarray(left, dtype=np.int64),
        "right": np.asarray(right, dtype=np.int64),
        "count_ham": np.asarray(count_ham, dtype=np.int64),
        "count_spam": np.asarray(count_spam, dtype=np.int64),
    }


def _tree_leaves(nodes: dict, X) -> np.ndarray:
    """Leaf node index for every row of X."""
    feature = nodes["feature"]
    threshold = nodes["threshold"]
    left = nodes["left"]
    right = nodes["right"]
    n = X.shape[0]
    if isinstance(X, np.ndarray):
        position = np.zeros(n, dtype=np.int64)
        active = np.flatnonzero(feature[position] >= 0)
        while active.size:
            current = position[active]
            values = X[active, feature[current]]
            position[active] = np.where(
                values <= threshold[current], left[current], right[current]
            )
            active = active[feature[position[active]] >= 0]
        return position
    X = X.tocsr()
    indptr, indices, data = X.indptr, X.indices, X.data
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        cols = indices[indptr[i] : indptr[i + 1]]
        vals = data[indptr[i] : indptr[i + 1]]
        node = 0
        while feature[node] >= 0:
            j = np.searchsorted(cols, feature[node])
            value = vals[j] if j < cols.size and cols[j] == feature[node] else 0.0
            node = left[node] if value <= threshold[node] else right[node]
        out[i] = node
    return out


def _tree_predict(nodes: dict, X):
    leaves = _tree_leaves(nodes, X)
    spam = nodes["count_spam"][leaves].astype(np.float64)
    ham = nodes["count_ham"][leaves].astype(np.float64)
    scores = spam / (spam + ham)
    labels = (spam > ham).astype(np.int64)  # leaf tie -> ham
    return labels, scores


def _fit_forest(X, y, spec: ClassifierSpec, bootstrap: bool = True) -> dict:
    params = spec.hyperparameters
    n, d = X.shape
    n_candidates = params["feature_subsample"]
    if n_candidates is None:
        n_candidates = max(1, math.floor(math.sqrt(d)))
    trees = []
    for child_seed in np.random.SeedSequence(spec.seed).spawn(params["n_trees"]):
        rng = np.random.default_rng(child_seed)
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        trees.append(
            _grow_tree(
                X,
                y,
                rows,
                params["max_depth"],
                params["min_samples_split"],
                rng=rng,
                n_candidates=n_candidates,
            )
        )
    majority = 1 if 2 * int(y.sum()) > n else 0  # tie -> ham
    return {"trees": trees, "majority_label": majority}


def _forest_predict(params: dict, X):
    trees = params["trees"]
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for nodes in trees:
        labels, _ = _tree_predict(nodes, X)
        votes += labels
    scores = votes / len(trees)
    labels = np.where(
        votes * 2 > len(trees),
        1,
        np.where(votes * 2 < len(trees), 0, params["majority_label"]),
    ).astype(np.int64)
    return labels, scores


# ---------------------------------------------------------------------------
# trained model


@dataclass
class TrainedModel:
    spec: ClassifierSpec
    pipeline: FittedPipeline
    parameters: dict
    format_version: int = FORMAT_VERSION

    def predict_matrix(self, X_raw, X_scaled):
        """(labels, scores) for pre-featurized design matrices."""
        kind = self.spec.kind
        if kind == "bernoulli_nb":
            posterior = _nb_posteriors(self.parameters, X_raw)
            scores = posterior[:, 1]
            labels = (scores > 0.5).astype(np.int64)
            return labels, scores
        if kind == "knn":
            return _knn_predict(self.parameters, X_scaled, self.spec.hyperparameters["k"])
        if kind == "linear_svm":
            X = X_scaled
            if self.pipeline.mask is not None:
                X = _as_csr(X)[:, self.pipeline.mask.kept]
            margin = _as_csr(X) @ self.parameters["weights"] + self.parameters["bias"]
            scores = 1.0 / (1.0 + np.exp(-margin))
            labels = (margin > 0).astype(np.int64)  # zero margin -> ham
            return labels, scores
        X = _maybe_dense(X_scaled)
        if kind == "decision_tree":
            return _tree_predict(self.parameters["nodes"], X)
        if kind == "random_forest":
            return _forest_predict(self.parameters, X)
        raise ConfigError(f"unknown classifier kind {kind!r}")


def train_model(
    spec: ClassifierSpec,
    pipeline: FittedPipeline,
    X_raw,
    X_scaled,
    y: np.ndarray,
    bootstrap: bool = True,
) -> TrainedModel:
    """Train one classifier on featurized training data.

    `bootstrap` is a test hook for the forest degeneracy check; production
    paths always leave it on.
    """
    y = np.asarray(y, dtype=np.int64)
    kind = spec.kind
    if kind == "bernoulli_nb":
        params = _fit_nb(X_raw, y, spec.hyperparameters["alpha"])
    elif kind == "knn":
        k = spec.hyperparameters["k"]
        if k > X_scaled.shape[0]:
            raise ValueError(f"k={k} exceeds {X_scaled.shape[0]} training examples")
        params = {"train": _as_csr(X_scaled), "labels": y}
    elif kind == "linear_svm":
        if np.unique(y).size < 2:
            raise ValueError("training data must contain both classes")
        X = _as_csr(X_scaled)
        if pipeline.mask is not None:
            X = X[:, pipeline.mask.kept]
        params = _fit_svm(
            X, y, spec.hyperparameters["C"], spec.hyperparameters["epochs"], spec.seed
        )
    elif kind == "decision_tree":
        X = _maybe_dense(X_scaled)
        params = {
            "nodes": _grow_tree(
                X,
                y,
                np.arange(X.shape[0]),
                spec.hyperparameters["max_depth"],
                spec.hyperparameters["min_samples_split"],
            )
        }
    elif kind == "random_forest":
        params = _fit_forest(_maybe_dense(X_scaled), y, spec, bootstrap=bootstrap)
    else:
        raise ConfigError(f"unknown classifier kind {kind!r}")
    return TrainedModel(spec=spec, pipeline=pipeline, parameters=params)


# ---------------------------------------------------------------------------
# raw-record prediction


def predict(model: TrainedModel, record: TweetRecord, resources: ResourceBundle | None = None) -> Prediction:
    return predict_records(model, [record], resources)[0]


def predict_records(
    model: TrainedModel, records, resources: ResourceBundle | None = None
) -> list[Prediction]:
    """Featurize raw records with the stored pipeline and classify them.

    Out-of-vocabulary terms are ignored and out-of-range dense values are
    clipped by the scaler, so prediction never fails on unseen content.
    """
    if resources is None:
        resources = default_resources()
    prepared = [prepare_record(r, resources) for r in records]
    X_raw, X_scaled = model.pipeline.matrices(prepared)
    labels, scores = model.predict_matrix(X_raw, X_scaled)
    return [
        Prediction(label=SPAM if lab == 1 else HAM, score=float(score))
        for lab, score in zip(labels, scores)
    ]


# ---------------------------------------------------------------------------
# serialization


def _csr_to_dict(X: sp.csr_matrix) -> dict:
    X = X.tocsr()
    return {
        "shape": [int(X.shape[0]), int(X.shape[1])],
        "indptr": X.indptr.tolist(),
        "indices": X.indices.tolist(),
        "data": X.data.tolist(),
    }


def _csr_from_dict(obj: dict) -> sp.csr_matrix:
    return sp.csr_matrix(
        (
            np.asarray(obj["data"], dtype=np.float64),
            np.asarray(obj["indices"], dtype=np.int32),
            np.asarray(obj["indptr"], dtype=np.int32),
        ),
        shape=tuple(obj["shape"]),
    )


def _nodes_to_dict(nodes: dict) -> dict:
    return {name: array.tolist() for name, array in nodes.items()}


def _nodes_from_dict(obj: dict) -> dict:
    return {
        "feature": np.asarray(obj["feature"], dtype=np.int64),
        "threshold": np.asarray(obj["threshold"], dtype=np.float64),
        "left": np.asarray(obj["left"], dtype=np.int64),
        "right": np.asarray(obj["right"], dtype=np.int64),
        "count_ham": np.asarray(obj["count_ham"], dtype=np.int64),
        "count_spam": np.asarray(obj["count_spam"], dtype=np.int64),
    }


def _parameters_to_dict(kind: str, params: dict) -> dict:
    if kind == "bernoulli_nb":
        return {
            "log_prior": params["log_prior"].tolist(),
            "log_p1": params["log_p1"].tolist(),
            "log_p0": params["log_p0"].tolist(),
        }
    if kind == "knn":
        return {"train": _csr_to_dict(params["train"]), "labels": params["labels"].tolist()}
    if kind == "linear_svm":
        return {
            "weights": params["weights"].tolist(),
            "bias": float(params["bias"]),
            "objective": params["objective"].tolist(),
        }
    if kind == "decision_tree":
        return {"nodes": _nodes_to_dict(params["nodes"])}
    if kind == "random_forest":
        return {
            "trees": [_nodes_to_dict(t) for t in params["trees"]],
            "majority_label": int(params["majority_label"]),
        }
    raise ConfigError(f"unknown classifier kind {kind!r}")


def _parameters_from_dict(kind: str, obj: dict) -> dict:
    if kind == "bernoulli_nb":
        return {
            "log_prior": np.asarray(obj["log_prior"], dtype=np.float64),
            "log_p1": np.asarray(obj["log_p1"], dtype=np.float64),
            "log_p0": np.asarray(obj["log_p0"], dtype=np.float64),
        }
    if kind == "knn":
        return {
            "train": _csr_from_dict(obj["train"]),
            "labels": np.asarray(obj["labels"], dtype=np.int64),
        }
    if kind == "linear_svm":
        return {
            "weights": np.asarray(obj["weights"], dtype=np.float64),
            "bias": float(obj["bias"]),
            "objective": np.asarray(obj["objective"], dtype=np.float64),
        }
    if kind == "decision_tree":
        return {"nodes": _nodes_from_dict(obj["nodes"])}
    if kind == "random_forest":
        return {
            "trees": [_nodes_from_dict(t) for t in obj["trees"]],
            "majority_label": int(obj["majority_label"]),
        }
    raise ConfigError(f"unknown classifier kind {kind!r}")


def model_payload(model: TrainedModel) -> dict:
    return {
        "format_version": model.format_version,
        "spec": {
            "kind": model.spec.kind,
            "hyperparameters": dict(model.spec.hyperparameters),
            "seed": model.spec.seed,
        },
        "pipeline": model.pipeline.to_dict(),
        "parameters": _parameters_to_dict(model.spec.kind, model.parameters),
    }


def model_to_text(model: TrainedModel) -> str:
    payload = model_payload(model)
    checksum = sha256_hex(canonical_json(payload).encode("utf-8"))
    document = dict(payload, checksum=checksum)
    return canonical_json(document) + "\n"


def save_model(model: TrainedModel, path: str) -> None:
    atomic_write_text(path, model_to_text(model))


def load_model(path: str) -> TrainedModel:
    """Load a model file, verifying checksum and format version."""
    with open(path, "r", encoding="utf-8") as handle:
        raw = handle.read()
    try:
        document = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ModelFormatError("model file must contain a JSON object")
    missing = {"format_version", "spec", "pipeline", "parameters", "checksum"} - set(document)
    if missing:
        raise ModelFormatError(f"model file missing fields: {sorted(missing)}")
    stored_checksum = document["checksum"]
    payload = {k: v for k, v in document.items() if k != "checksum"}
    actual = sha256_hex(canonical_json(payload).encode("utf-8"))
    if actual != stored_checksum:
        raise ChecksumError(
            f"model checksum mismatch: stored {stored_checksum[:12]}..., "
            f"computed {actual[:12]}..."
        )
    version = document["format_version"]
    if version != FORMAT_VERSION:
        raise VersionError(
            f"model format_version {version} is not supported (expected {FORMAT_VERSION})"
        )
    spec_obj = document["spec"]
    spec = make_spec(
        spec_obj["kind"], spec_obj.get("hyperparameters"), seed=spec_obj.get("seed", 42)
    )
    pipeline = FittedPipeline.from_dict(document["pipeline"])
    parameters = _parameters_from_dict(spec.kind, document["parameters"])
    return TrainedModel(
        spec=spec, pipeline=pipeline, parameters=parameters, format_version=version
    )
