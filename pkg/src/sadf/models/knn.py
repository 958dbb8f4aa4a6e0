"""K-nearest-neighbors classifier over stored training vectors."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import as_labels, as_matrix, check_dimension, check_fitted


class KNearestNeighbors(BaseEstimator, ClassifierMixin):
    """Euclidean-distance majority vote over the k nearest stored points.

    Neighbor ranking breaks distance ties by training index (stable sort);
    a tied vote resolves to class 0, the conservative no-alarm choice.
    Distances are computed blockwise via the expansion
    ``|a - b|^2 = |a|^2 - 2 a.b + |b|^2`` to bound memory.
    """

    def __init__(self, k: int = 5, block_size: int = 1024):
        self.k = k
        self.block_size = block_size

    def fit(self, X, y) -> "KNearestNeighbors":
        X = as_matrix(X)
        y = as_labels(y, len(X))
        if not 1 <= self.k <= len(X):
            raise ValueError(f"k must lie in [1, {len(X)}], got {self.k}")
        self.n_features_in_ = X.shape[1]
        self.X_ = X.copy()
        self.y_ = y.copy()
        self._sq_norms = (self.X_ * self.X_).sum(axis=1)
        return self

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "X_")
        X = as_matrix(X)
        check_dimension(self, X)
        out = np.empty(len(X), dtype=np.int64)
        k = self.k
        for start in range(0, len(X), self.block_size):
            block = X[start : start + self.block_size]
            d2 = (block * block).sum(axis=1)[:, None] - 2.0 * (block @ self.X_.T) + self._sq_norms
            order = np.argsort(d2, axis=1, kind="stable")[:, :k]
            attack_votes = self.y_[order].sum(axis=1)
            out[start : start + len(block)] = (2 * attack_votes > k).astype(np.int64)
        return out
