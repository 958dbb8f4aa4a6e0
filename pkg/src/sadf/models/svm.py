"""Linear SVM trained by primal stochastic subgradient descent."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..errors import SingleClassTrainingError
from ..validation import as_labels, as_matrix, check_dimension, check_fitted


class PegasosSVM(BaseEstimator, ClassifierMixin):
    """Hinge-loss linear classifier with L2 regularization.

    One sample per step with learning rate 1/(lam * t); each epoch visits the
    training set in a fresh deterministic shuffle drawn from ``seed``. The
    bias is learned as an always-one augmented feature, so it shares the
    regularizer; the stored model keeps ``weights_`` and ``bias_`` separate.
    Labels are mapped 0 -> -1 and 1 -> +1 internally; the decision rule is
    strict (score must exceed 0 to flag an attack), so a zero model predicts
    the normal class everywhere.
    """

    def __init__(self, lam: float = 1e-4, epochs: int = 5, seed: int = 0):
        self.lam = lam
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y) -> "PegasosSVM":
        X = as_matrix(X)
        y = as_labels(y, len(X))
        n, d = X.shape
        self.n_features_in_ = d
        if self.epochs > 0 and (y == y[0]).all():
            raise SingleClassTrainingError("SVM training needs both classes present")
        signs = np.where(y == 1, 1.0, -1.0)
        w = np.zeros(d + 1)  # [weights..., bias]
        rng = np.random.default_rng(self.seed)
        lam = float(self.lam)
        t = 0
        objective: list[float] = []
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (lam * t)
                margin = signs[i] * (X[i] @ w[:d] + w[d])
                w *= 1.0 - eta * lam
                if margin < 1.0:
                    w[:d] += eta * signs[i] * X[i]
                    w[d] += eta * signs[i]
            objective.append(self._objective(X, signs, w))
        self.weights_ = w[:d].copy()
        self.bias_ = float(w[d])
        self.objective_history_ = objective
        if not np.isfinite(self.weights_).all() or not np.isfinite(self.bias_):
            raise FloatingPointError("SVM weights diverged; lower lam or epochs")
        return self

    def _objective(self, X, signs, w) -> float:
        d = X.shape[1]
        margins = signs * (X @ w[:d] + w[d])
        hinge = np.maximum(0.0, 1.0 - margins).mean()
        return float(hinge + 0.5 * self.lam * (w @ w))

    def decision_function(self, X) -> np.ndarray:
        check_fitted(self, "weights_")
        X = as_matrix(X)
        check_dimension(self, X)
        return X @ self.weights_ + self.bias_

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0.0).astype(np.int64)
