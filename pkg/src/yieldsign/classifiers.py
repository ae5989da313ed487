"""Base classifier suite, cross-validation, and grid search.

Six classifier kinds are registered out of the box (LDA with Ledoit-Wolf
shrinkage, ridge, L2 logistic regression, KNN, random forest, gradient
boosting). Each is a scikit-learn estimator constructed behind a
:class:`ClassifierSpec`, so everything composes with the wider
ecosystem while training, prediction, cross-validation and grid search
stay deterministic under a single integer seed. The registry is open:
``register_kind`` adds new kinds without touching callers.
"""

from __future__ import annotations

import hashlib
import pickle
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Callable

import numpy as np
from sklearn.discriminant_analysis import LinearDiscriminantAnalysis
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier
from sklearn.linear_model import LogisticRegression, RidgeClassifier
from sklearn.model_selection import StratifiedKFold
from sklearn.neighbors import KNeighborsClassifier

from .errors import DataError
from .ingest import Dataset
from .validation import check_feature_matrix

MODEL_FORMAT_VERSION = 1


def derive_seed(seed: int, *parts) -> int:
    """Stable sub-seed from a root seed and context labels.

    Uses a cryptographic digest rather than ``hash()`` so the stream is
    identical across processes and sessions, which keeps parallel and
    serial runs byte-identical.
    """
    text = ":".join([str(seed)] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:4], "big")


@dataclass(frozen=True)
class ClassifierSpec:
    """A classifier kind plus hyperparameter overrides."""

    kind: str
    hyperparams: tuple[tuple[str, Any], ...] = ()

    @classmethod
    def make(cls, kind: str, **hyperparams) -> "ClassifierSpec":
        return cls(kind=kind, hyperparams=tuple(sorted(hyperparams.items())))

    def params(self) -> dict[str, Any]:
        return dict(self.hyperparams)

    def merged(self, **overrides) -> "ClassifierSpec":
        merged = self.params()
        merged.update(overrides)
        return ClassifierSpec.make(self.kind, **merged)

    def describe(self) -> str:
        if not self.hyperparams:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in self.hyperparams)
        return f"{self.kind}({inner})"


@dataclass
class TrainedModel:
    """A fitted estimator with its spec, feature space, and provenance."""

    spec: ClassifierSpec
    estimator: Any
    feature_names: list[str]
    train_provenance: tuple[str, str]

    def save(self, path: str | Path) -> None:
        payload = {
            "format": "yieldsign-trained-model",
            "version": MODEL_FORMAT_VERSION,
            "spec": self.spec,
            "estimator": self.estimator,
            "feature_names": self.feature_names,
            "train_provenance": self.train_provenance,
        }
        Path(path).write_bytes(pickle.dumps(payload))

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        payload = pickle.loads(Path(path).read_bytes())
        if payload.get("format") != "yieldsign-trained-model":
            raise DataError(f"{path}: not a trained-model file")
        if payload.get("version") != MODEL_FORMAT_VERSION:
            raise DataError(f"{path}: unsupported model format version {payload.get('version')}")
        return cls(
            spec=payload["spec"],
            estimator=payload["estimator"],
            feature_names=payload["feature_names"],
            train_provenance=tuple(payload["train_provenance"]),
        )


@dataclass
class CvReport:
    spec: ClassifierSpec
    fold_hit_rates: list[float]
    seed: int

    @property
    def mean_hit_rate(self) -> float:
        return float(np.mean(self.fold_hit_rates))


@dataclass
class KindEntry:
    build: Callable[[dict, int], Any]
    defaults: dict[str, Any]
    validate: Callable[[dict], None]
    needs_both_classes: bool = True
    supports_importance: bool = False
    check_data: Callable[[dict, Any], None] | None = None


def _validate_knn(params: dict) -> None:
    k = params["n_neighbors"]
    if k < 1 or k % 2 == 0:
        raise DataError(f"KNN n_neighbors must be odd and >= 1, got {k}")


def _validate_trees(params: dict) -> None:
    if params["max_depth"] < 1:
        raise DataError(f"max_depth must be >= 1, got {params['max_depth']}")
    if params["n_estimators"] < 1:
        raise DataError(f"n_estimators must be >= 1, got {params['n_estimators']}")


def _validate_positive(name: str) -> Callable[[dict], None]:
    def check(params: dict) -> None:
        if params[name] <= 0:
            raise DataError(f"{name} must be positive, got {params[name]}")

    return check


def _validate_lda(params: dict) -> None:
    s = params["shrinkage"]
    if s == "auto":
        return
    try:
        ok = 0 <= float(s) <= 1
    except (TypeError, ValueError):
        ok = False
    if not ok:
        raise DataError(f"LDA shrinkage must be 'auto' or in [0, 1], got {s!r}")


REGISTRY: dict[str, KindEntry] = {}


def register_kind(
    kind: str,
    build: Callable[[dict, int], Any],
    defaults: dict[str, Any],
    validate: Callable[[dict], None] = lambda params: None,
    needs_both_classes: bool = True,
    supports_importance: bool = False,
    check_data: Callable[[dict, Any], None] | None = None,
) -> None:
    REGISTRY[kind] = KindEntry(
        build, defaults, validate, needs_both_classes, supports_importance, check_data
    )


def _check_knn_data(params: dict, data) -> None:
    if params["n_neighbors"] > len(data):
        raise DataError(
            f"KNN n_neighbors={params['n_neighbors']} exceeds the "
            f"{len(data)} training rows"
        )


register_kind(
    "LDA",
    lambda p, seed: LinearDiscriminantAnalysis(
        solver="eigen", shrinkage=None if p["shrinkage"] == 0 else p["shrinkage"]
    ),
    defaults={"shrinkage": "auto"},
    validate=_validate_lda,
)
register_kind(
    "Ridge",
    lambda p, seed: RidgeClassifier(alpha=p["alpha"]),
    defaults={"alpha": 1.0},
    validate=_validate_positive("alpha"),
)
register_kind(
    "LogisticRegression",
    lambda p, seed: LogisticRegression(
        penalty="l2", C=p["C"], tol=1e-6, max_iter=10_000
    ),
    defaults={"C": 1.0},
    validate=_validate_positive("C"),
)
register_kind(
    "KNN",
    lambda p, seed: KNeighborsClassifier(
        n_neighbors=p["n_neighbors"], metric="euclidean", algorithm="brute"
    ),
    defaults={"n_neighbors": 9},
    validate=_validate_knn,
    needs_both_classes=False,
    check_data=_check_knn_data,
)
register_kind(
    "RandomForest",
    lambda p, seed: RandomForestClassifier(
        n_estimators=p["n_estimators"],
        max_depth=p["max_depth"],
        min_samples_split=p["min_samples_split"],
        min_samples_leaf=p["min_samples_leaf"],
        max_features="sqrt",
        criterion="gini",
        bootstrap=True,
        random_state=seed,
    ),
    defaults={"n_estimators": 200, "max_depth": 4, "min_samples_split": 5, "min_samples_leaf": 3},
    validate=_validate_trees,
    supports_importance=True,
)
register_kind(
    "GradientBoosting",
    lambda p, seed: GradientBoostingClassifier(
        loss="log_loss",
        n_estimators=p["n_estimators"],
        max_depth=p["max_depth"],
        min_samples_split=p["min_samples_split"],
        min_samples_leaf=p["min_samples_leaf"],
        max_features="sqrt",
        random_state=seed,
    ),
    defaults={"n_estimators": 200, "max_depth": 4, "min_samples_split": 5, "min_samples_leaf": 3},
    validate=_validate_trees,
    supports_importance=True,
)

DEFAULT_REGISTRY_SPECS = tuple(ClassifierSpec.make(kind) for kind in REGISTRY)

DEFAULT_GRIDS: dict[str, dict[str, list]] = {
    "LDA": {"shrinkage": ["auto", 0.1]},
    "Ridge": {"alpha": [0.1, 1.0, 10.0]},
    "LogisticRegression": {"C": [0.1, 1.0, 10.0]},
    "KNN": {"n_neighbors": [5, 9, 15]},
    "RandomForest": {"max_depth": [3, 4, 5], "n_estimators": [100, 200]},
    "GradientBoosting": {"max_depth": [3, 4, 5], "n_estimators": [100, 200]},
}


def resolve_params(spec: ClassifierSpec) -> dict[str, Any]:
    """Spec hyperparameters over kind defaults, validated."""
    entry = REGISTRY.get(spec.kind)
    if entry is None:
        raise DataError(f"unknown classifier kind {spec.kind!r}")
    params = dict(entry.defaults)
    unknown = set(spec.params()) - set(params)
    if unknown:
        raise DataError(f"{spec.kind}: unknown hyperparameters {sorted(unknown)}")
    params.update(spec.params())
    entry.validate(params)
    return params


def train(spec: ClassifierSpec, data: Dataset, seed: int) -> TrainedModel:
    """Fit one classifier; same (spec, data, seed) always gives the same model."""
    entry = REGISTRY.get(spec.kind)
    if entry is None:
        raise DataError(f"unknown classifier kind {spec.kind!r}")
    params = resolve_params(spec)
    if len(data) == 0:
        raise DataError(f"{spec.kind}: empty training data")
    if entry.needs_both_classes and len(np.unique(data.y)) < 2:
        raise DataError(
            f"{spec.kind}: training data for {data.country}/{data.cycle} has a single class"
        )
    if entry.check_data is not None:
        entry.check_data(params, data)
    estimator = entry.build(params, seed)
    estimator.fit(data.X, data.y)
    return TrainedModel(
        spec=spec,
        estimator=estimator,
        feature_names=data.feature_names.copy(),
        train_provenance=(data.country, data.cycle),
    )


def predict(model: TrainedModel, X) -> np.ndarray:
    """Predict +1/-1 labels; score ties resolve to +1."""
    X = check_feature_matrix(X, n_features=len(model.feature_names))
    est = model.estimator
    classes = getattr(est, "classes_", None)
    if classes is not None and len(classes) == 1:
        return np.full(len(X), int(classes[0]), dtype=int)
    if hasattr(est, "decision_function"):
        scores = est.decision_function(X)
        return np.where(scores >= 0, 1, -1).astype(int)
    proba = est.predict_proba(X)
    positive = proba[:, list(classes).index(1)]
    return np.where(positive >= 0.5, 1, -1).astype(int)


def predict_one(model: TrainedModel, x) -> int:
    return int(predict(model, np.asarray(x, dtype=float).reshape(1, -1))[0])


def hit_rate_of(model: TrainedModel, data: Dataset) -> float:
    return float(np.mean(predict(model, data.X) == data.y))


def _stratified_folds(y: np.ndarray, k: int, seed: int):
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return list(splitter.split(np.zeros((len(y), 1)), y))


def _walk_forward_folds(n: int, k: int):
    # k test blocks over the tail; fold i trains on everything before its block.
    edges = np.linspace(0, n, k + 2).astype(int)
    folds = []
    for i in range(1, k + 1):
        train_idx = np.arange(0, edges[i])
        test_idx = np.arange(edges[i], edges[i + 1])
        folds.append((train_idx, test_idx))
    return folds


def cross_validate(
    spec: ClassifierSpec,
    data: Dataset,
    k: int = 5,
    seed: int = 0,
    mode: str = "stratified",
) -> CvReport:
    """k-fold cross-validation, deterministic under the seed.

    ``stratified`` (default) shuffles with class balance preserved;
    ``walk_forward`` keeps time order, training only on the past.
    """
    if k < 2:
        raise DataError(f"cross-validation needs k >= 2, got {k}")
    if mode not in ("stratified", "walk_forward"):
        raise DataError(f"unknown cv mode {mode!r}")
    counts = np.bincount((data.y == 1).astype(int), minlength=2)
    if counts.min() < k:
        raise DataError(
            f"{data.country}/{data.cycle}: minority class has {int(counts.min())} "
            f"rows, fewer than k={k} folds"
        )
    if mode == "stratified":
        # Split depends on the seed only, so every spec is ranked on the
        # same folds.
        folds = _stratified_folds(data.y, k, derive_seed(seed, "split"))
    else:
        folds = _walk_forward_folds(len(data), k)

    rates = []
    for fold_no, (train_idx, test_idx) in enumerate(folds):
        fold_data = Dataset(
            months=data.months[train_idx],
            X=data.X[train_idx],
            y=data.y[train_idx],
            feature_names=data.feature_names,
            country=data.country,
            cycle=data.cycle,
        )
        model = train(spec, fold_data, derive_seed(seed, spec.describe(), fold_no))
        rates.append(float(np.mean(predict(model, data.X[test_idx]) == data.y[test_idx])))
    return CvReport(spec=spec, fold_hit_rates=rates, seed=seed)


def grid_search(
    kind: str,
    grid: dict[str, list],
    data: Dataset,
    k: int = 5,
    seed: int = 0,
    mode: str = "stratified",
) -> tuple[ClassifierSpec, TrainedModel, CvReport]:
    """Exhaustive grid search by mean CV hit rate.

    Candidates are enumerated in the deterministic order given by the
    grid mapping (first key varies slowest); ties keep the earliest
    candidate. The winner is refit on the full dataset.
    """
    if not grid:
        raise DataError(f"{kind}: empty hyperparameter grid")
    names = list(grid)
    best: tuple[ClassifierSpec, CvReport] | None = None
    for combo in product(*(grid[name] for name in names)):
        spec = ClassifierSpec.make(kind, **dict(zip(names, combo)))
        report = cross_validate(spec, data, k=k, seed=seed, mode=mode)
        if best is None or report.mean_hit_rate > best[1].mean_hit_rate:
            best = (spec, report)
    spec, report = best
    model = train(spec, data, derive_seed(seed, "final", spec.describe()))
    return spec, model, report


def feature_importance(model: TrainedModel) -> dict[str, float]:
    """Normalised impurity-decrease importances of a tree-ensemble model."""
    entry = REGISTRY.get(model.spec.kind)
    if entry is None or not entry.supports_importance:
        raise DataError(f"{model.spec.kind} does not expose feature importances")
    importances = np.asarray(model.estimator.feature_importances_, dtype=float)
    total = importances.sum()
    if total > 0:
        importances = importances / total
    return {name: float(v) for name, v in zip(model.feature_names, importances)}
