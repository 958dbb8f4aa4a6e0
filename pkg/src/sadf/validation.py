"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError


def as_matrix(X) -> np.ndarray:
    """Coerce X to a 2-D float64 array of finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D feature matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("feature matrix contains NaN or infinite entries")
    return X


def as_labels(y, n_rows: int) -> np.ndarray:
    """Coerce y to a 1-D int64 array of 0/1 labels matching n_rows."""
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_rows:
        raise ValueError(f"labels must be 1-D with {n_rows} entries, got shape {y.shape}")
    y = y.astype(np.int64)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be binary (0 or 1)")
    return y


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} is not fitted; call fit() before predict()"
        )


def check_dimension(estimator, X: np.ndarray) -> None:
    expected = getattr(estimator, "n_features_in_", None)
    if expected is not None and X.shape[1] != expected:
        raise DimensionMismatchError(
            f"{type(estimator).__name__} was fitted with {expected} features, "
            f"input has {X.shape[1]}"
        )
