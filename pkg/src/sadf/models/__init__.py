"""The five supervised classifiers and their evaluation helpers."""

from .forest import RandomForest
from .knn import KNearestNeighbors
from .metrics import (
    METRICS_HEADER,
    EvalMetrics,
    confusion_counts,
    evaluate,
    metrics_csv_row,
    metrics_from_predictions,
)
from .multiclass import predict_categories, train_per_category
from .naive_bayes import GaussianNaiveBayes
from .svm import PegasosSVM
from .tree import DecisionTree, gini_impurity

MODEL_REGISTRY = {
    "nb": GaussianNaiveBayes,
    "dt": DecisionTree,
    "rf": RandomForest,
    "svm": PegasosSVM,
    "knn": KNearestNeighbors,
}

# Models safe to fan out across the worker pool; KNN stays single-worker
# because shipping its stored training set to every worker defeats the pool.
POOLED_MODELS = frozenset({"nb", "dt", "rf", "svm"})


def make_model(model_id: str, **hyperparameters):
    """Instantiate a classifier by its short id with optional overrides."""
    try:
        cls = MODEL_REGISTRY[model_id]
    except KeyError:
        raise ValueError(
            f"unknown model id {model_id!r}; expected one of {sorted(MODEL_REGISTRY)}"
        ) from None
    return cls(**hyperparameters)


def model_id_of(model) -> str:
    for model_id, cls in MODEL_REGISTRY.items():
        if type(model) is cls:
            return model_id
    raise ValueError(f"unregistered model type {type(model).__name__}")


__all__ = [
    "DecisionTree",
    "EvalMetrics",
    "GaussianNaiveBayes",
    "KNearestNeighbors",
    "METRICS_HEADER",
    "MODEL_REGISTRY",
    "POOLED_MODELS",
    "PegasosSVM",
    "RandomForest",
    "confusion_counts",
    "evaluate",
    "gini_impurity",
    "make_model",
    "metrics_csv_row",
    "metrics_from_predictions",
    "model_id_of",
    "predict_categories",
    "train_per_category",
]
