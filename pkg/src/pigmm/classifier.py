"""Generative classification: one mixture per class, combined by Bayes' rule."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from pigmm import kernels
from pigmm.data import CLASS_ORDER, Label
from pigmm.errors import (
    EmptyDatasetError,
    InsufficientDataError,
    InvalidParameterError,
    LabelError,
    SchemaError,
)
from pigmm.features import FeaturePipeline, fit_pipeline
from pigmm.mixture import EmConfig, fit_em, select_components
from pigmm.rng import derive_seed

INCONCLUSIVE = Label.INCONCLUSIVE.value


@dataclass(frozen=True)
class ClassifierConfig:
    components: int | str = "auto"
    candidates: tuple = (1, 2, 3)
    em: EmConfig = field(default_factory=EmConfig)
    priors: str = "empirical"
    energy: object = None
    standardize: bool = True
    features: tuple | None = None
    reject_threshold: float | None = None

    def __post_init__(self):
        if self.priors not in ("empirical", "uniform"):
            raise InvalidParameterError(f"priors must be 'empirical' or 'uniform', got {self.priors!r}")
        if self.components != "auto" and (not isinstance(self.components, int) or self.components < 1):
            raise InvalidParameterError(f"components must be a positive int or 'auto', got {self.components!r}")
        _check_threshold(self.reject_threshold)


def _check_threshold(t):
    if t is not None and not 0.0 <= t <= 1.0:
        raise InvalidParameterError(f"reject threshold must lie in [0, 1], got {t}")


@dataclass(frozen=True)
class PosteriorVector:
    values: np.ndarray
    log_evidence: float


@dataclass(frozen=True)
class GenerativeClassifier:
    classes: tuple
    models: tuple
    priors: np.ndarray
    pipeline: FeaturePipeline
    reject_threshold: float | None = None
    fill_values: dict = field(default_factory=dict)

    def __post_init__(self):
        priors = np.array(self.priors, dtype=np.float64, copy=True).reshape(-1)
        priors.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "models", tuple(self.models))
        if len(self.classes) < 2:
            raise InvalidParameterError("a classifier needs at least two classes")
        if len(self.models) != len(self.classes) or priors.size != len(self.classes):
            raise InvalidParameterError("need one model and one prior per class")
        if np.any(priors < 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise InvalidParameterError(f"priors must be non-negative and sum to 1, got {priors}")
        if len({m.dim for m in self.models}) != 1:
            raise SchemaError("class models disagree on feature dimension")
        _check_threshold(self.reject_threshold)

    @property
    def input_columns(self):
        return self.pipeline.input_columns

    def with_threshold(self, threshold):
        _check_threshold(threshold)
        return GenerativeClassifier(self.classes, self.models, self.priors, self.pipeline,
                                    threshold, self.fill_values)

    def class_log_scores(self, Z):
        """log Phi_k(z) + log P(C_k) for transformed rows ``Z``: shape (n, K)."""
        scores = np.empty((Z.shape[0], len(self.classes)))
        for k, (model, prior) in enumerate(zip(self.models, self.priors)):
            scores[:, k] = model.log_density(Z) + (math.log(prior) if prior > 0 else -np.inf)
        return scores

    def log_scores(self, X_raw):
        return self.class_log_scores(np.asarray(self.pipeline.transform(X_raw)))

    def predict_proba(self, X_raw):
        """Posterior matrix (n, K) and the log evidence per row."""
        return posteriors_from_scores(self.log_scores(X_raw))

    def predict(self, X_raw, threshold=None):
        """Decisions for raw rows; ``threshold`` overrides the stored reject threshold."""
        _check_threshold(threshold)
        probs, _ = self.predict_proba(X_raw)
        t = self.reject_threshold if threshold is None else threshold
        return decide(probs, self.classes, t)


def posteriors_from_scores(log_scores):
    """Softmax over class log-scores: exactly the Bayes ratio, computed stably."""
    probs, lse = kernels.normalize_log_rows(np.atleast_2d(log_scores))
    return probs, lse


def decide(probs, classes, threshold=None):
    """Argmax with ties to the earliest class; below-threshold maxima are inconclusive."""
    probs = np.atleast_2d(probs)
    idx = np.argmax(probs, axis=1)
    out = np.array([classes[i] for i in idx], dtype=object)
    if threshold is not None:
        out[probs[np.arange(len(idx)), idx] < threshold] = INCONCLUSIVE
    return out


def posterior(x, clf):
    probs, lse = clf.predict_proba(np.asarray(x, dtype=np.float64).reshape(1, -1)
                                   if not isinstance(x, dict) else x)
    return PosteriorVector(probs[0], float(lse[0]))


def classify(x, clf):
    probs, _ = clf.predict_proba(np.asarray(x, dtype=np.float64).reshape(1, -1)
                                 if not isinstance(x, dict) else x)
    return decide(probs, clf.classes, clf.reject_threshold)[0]


def _fit_class(Z, label, k, config):
    n, d = Z.shape
    floor = d + 1
    em = replace(config.em, seed=derive_seed(config.em.seed, "classes", k))
    if config.components == "auto":
        candidates = [m for m in config.candidates if m * floor <= n]
        if not candidates:
            raise InsufficientDataError(
                f"class {label!r} has {n} rows; at least {floor} needed for one component in d={d}"
            )
        best, _, models = select_components(Z, candidates, em)
        return models[best]
    M = config.components
    if n < M * floor:
        raise InsufficientDataError(
            f"class {label!r} has {n} rows; {M} components in d={d} need at least {M * floor}"
        )
    return fit_em(Z, M, em)


def fit_classifier(X_raw, labels, columns, config=None, classes=None):
    """Train on a raw feature matrix with arbitrary class labels.

    ``classes`` fixes the class order (used for tie-breaking); by default the
    labels are taken in order of first appearance.
    """
    config = config or ClassifierConfig()
    X_raw = np.asarray(X_raw, dtype=np.float64)
    labels = np.asarray(labels, dtype=object)
    if classes is None:
        classes = tuple(dict.fromkeys(labels.tolist()))
    classes = tuple(classes)
    if len(classes) < 2:
        raise LabelError(f"training needs at least two classes, got {list(classes)}")
    columns = tuple(columns)
    if config.features is not None:
        missing = [c for c in config.features if c not in columns]
        if missing:
            raise SchemaError(f"unknown feature columns {missing}")
        keep = [columns.index(c) for c in config.features]
        X_raw, columns = X_raw[:, keep], tuple(config.features)

    pipeline = fit_pipeline(X_raw, columns, config.energy, config.standardize)
    Z = np.asarray(pipeline.transform(X_raw))
    d = Z.shape[1]
    models, counts = [], []
    for k, label in enumerate(classes):
        mask = labels == label
        n_k = int(mask.sum())
        if n_k < d + 2:
            raise InsufficientDataError(
                f"class {label!r} has {n_k} rows; at least d + 2 = {d + 2} required"
            )
        models.append(_fit_class(Z[mask], label, k, config))
        counts.append(n_k)
    if config.priors == "uniform":
        priors = np.full(len(classes), 1.0 / len(classes))
    else:
        priors = np.asarray(counts, dtype=np.float64) / sum(counts)
    fill = {c: float(v) for c, v in zip(columns, np.median(X_raw, axis=0))}
    return GenerativeClassifier(classes, models, priors, pipeline, config.reject_threshold, fill)


def train_classifier(dataset, config=None):
    """Fit per-class mixtures on the defect / no-defect rows of ``dataset``.

    Inconclusive and unlabeled rows are excluded. Class order is
    (no_defect, defect).
    """
    usable = dataset.trainable
    present = tuple(c for c in CLASS_ORDER if np.any(dataset.labels[usable] == c))
    if len(present) < 2:
        raise LabelError(f"training needs both defect and no_defect rows, found {list(present)}")
    return fit_classifier(dataset.rows[usable], dataset.labels[usable], dataset.names,
                          config, classes=present)


@dataclass(frozen=True)
class MetricsReport:
    classes: tuple
    n_rows: int
    n_evaluated: int
    n_rejected: int
    n_excluded_labels: int
    accuracy: float | None
    precision: dict
    recall: dict
    confusion: tuple
    mean_nll: float

    def to_dict(self):
        return {
            "classes": list(self.classes),
            "n_rows": self.n_rows,
            "n_evaluated": self.n_evaluated,
            "n_rejected": self.n_rejected,
            "n_excluded_labels": self.n_excluded_labels,
            "accuracy": self.accuracy,
            "precision": dict(self.precision),
            "recall": dict(self.recall),
            "confusion": [list(r) for r in self.confusion],
            "mean_nll": self.mean_nll,
        }


def evaluate(clf, dataset, threshold=None):
    """Score predictions against labels.

    Rows whose label is not one of the classifier's classes (inconclusive,
    unlabeled) are counted in ``n_excluded_labels`` and left out of every metric.
    Rejected predictions are counted in ``n_rejected`` and left out of accuracy,
    precision, recall and the confusion matrix, but still enter the mean
    negative log-likelihood. Accuracy is ``None`` when nothing was accepted.
    """
    _check_threshold(threshold)
    if dataset.n == 0:
        raise EmptyDatasetError("evaluation set is empty")
    X = dataset.select(clf.input_columns).rows if dataset.names != clf.input_columns \
        else dataset.rows
    labels = dataset.labels
    usable = np.isin(labels, clf.classes)
    if not usable.any():
        raise LabelError("no rows carry one of the classifier's class labels")
    scores = clf.log_scores(X[usable])
    probs, lse = posteriors_from_scores(scores)
    truth = np.array([clf.classes.index(l) for l in labels[usable]])
    log_post_true = scores[np.arange(truth.size), truth] - lse
    t = clf.reject_threshold if threshold is None else threshold
    decisions = decide(probs, clf.classes, t)
    accepted = decisions != INCONCLUSIVE
    K = len(clf.classes)
    confusion = np.zeros((K, K), dtype=int)
    pred_idx = np.array([clf.classes.index(p) if p != INCONCLUSIVE else -1 for p in decisions])
    for t_i, p_i in zip(truth[accepted], pred_idx[accepted]):
        confusion[t_i, p_i] += 1
    n_acc = int(accepted.sum())
    accuracy = float(np.trace(confusion) / n_acc) if n_acc else None
    precision, recall = {}, {}
    for k, c in enumerate(clf.classes):
        col, row = confusion[:, k].sum(), confusion[k, :].sum()
        precision[c] = float(confusion[k, k] / col) if col else None
        recall[c] = float(confusion[k, k] / row) if row else None
    return MetricsReport(
        classes=clf.classes,
        n_rows=dataset.n,
        n_evaluated=n_acc,
        n_rejected=int((~accepted).sum()),
        n_excluded_labels=int((~usable).sum()),
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        confusion=tuple(tuple(int(v) for v in r) for r in confusion),
        mean_nll=float(-np.mean(log_post_true)) + 0.0,
    )


def decision_boundary_grid(clf, axis_x, axis_y, bounds, resolution, fill=None):
    """Posterior and decision on a resolution x resolution lattice over two raw columns.

    ``bounds`` is ``(xmin, xmax, ymin, ymax)``. Every other raw column is held at
    ``fill[col]``, defaulting to the training median. Rows run over x fastest.
    Returns ``(x, y, probs, decisions, fill_used)``.
    """
    cols = clf.input_columns
    for c in (axis_x, axis_y):
        if c not in cols:
            raise SchemaError(f"unknown column {c!r}; model columns are {list(cols)}")
    if axis_x == axis_y:
        raise SchemaError("grid axes must be two distinct columns")
    if not isinstance(resolution, (int, np.integer)) or resolution < 1:
        raise InvalidParameterError(f"resolution must be a positive integer, got {resolution!r}")
    fill = dict(fill or {})
    unknown = [c for c in fill if c not in cols]
    if unknown:
        raise SchemaError(f"unknown fill columns {unknown}")
    fill_used = {c: float(fill.get(c, clf.fill_values.get(c, 0.0)))
                 for c in cols if c not in (axis_x, axis_y)}
    xmin, xmax, ymin, ymax = map(float, bounds)
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, resolution), np.linspace(ymin, ymax, resolution))
    gx, gy = gx.ravel(), gy.ravel()
    X = np.empty((gx.size, len(cols)))
    for j, c in enumerate(cols):
        X[:, j] = gx if c == axis_x else gy if c == axis_y else fill_used[c]
    probs, _ = clf.predict_proba(X)
    decisions = decide(probs, clf.classes, clf.reject_threshold)
    return gx, gy, probs, decisions, fill_used
