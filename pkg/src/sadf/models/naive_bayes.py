"""Gaussian naive Bayes over dense feature vectors."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import as_labels, as_matrix, check_dimension, check_fitted


class GaussianNaiveBayes(BaseEstimator, ClassifierMixin):
    """Per-class Gaussian likelihoods with log-space priors.

    Class-conditional means and standard deviations use the population
    formula; sigmas are floored at ``sigma_floor`` so no feature divides by
    zero. Training data with a single class degrades to a prior-only model
    (``single_class_`` is set and a warning is emitted).
    """

    def __init__(self, sigma_floor: float = 1e-9):
        self.sigma_floor = sigma_floor

    def fit(self, X, y) -> "GaussianNaiveBayes":
        X = as_matrix(X)
        y = as_labels(y, len(X))
        n, d = X.shape
        self.n_features_in_ = d
        self.classes_ = np.array([0, 1])
        self.means_ = np.zeros((2, d))
        self.sigmas_ = np.ones((2, d))
        counts = np.array([(y == 0).sum(), (y == 1).sum()], dtype=np.float64)
        self.single_class_ = bool((counts == 0).any())
        if self.single_class_:
            warnings.warn(
                "training data contains a single class; model degrades to priors only",
                RuntimeWarning,
                stacklevel=2,
            )
        self.priors_ = counts / n
        with np.errstate(divide="ignore"):
            self.log_priors_ = np.log(self.priors_)
        for c in (0, 1):
            if counts[c] == 0:
                continue
            Xc = X[y == c]
            self.means_[c] = Xc.mean(axis=0)
            self.sigmas_[c] = np.maximum(Xc.std(axis=0), self.sigma_floor)
        return self

    def _log_scores(self, X: np.ndarray) -> np.ndarray:
        scores = np.empty((len(X), 2))
        for c in (0, 1):
            if self.priors_[c] == 0.0:
                scores[:, c] = -np.inf
                continue
            mu, sigma = self.means_[c], self.sigmas_[c]
            z = (X - mu) / sigma
            log_pdf = -0.5 * (z * z) - np.log(sigma) - 0.5 * np.log(2.0 * np.pi)
            scores[:, c] = self.log_priors_[c] + log_pdf.sum(axis=1)
        return scores

    def predict_proba(self, X) -> np.ndarray:
        """Exp-normalized posterior over classes; rows sum to 1."""
        check_fitted(self, "priors_")
        X = as_matrix(X)
        check_dimension(self, X)
        scores = self._log_scores(X)
        shifted = scores - scores.max(axis=1, keepdims=True)
        probs = np.exp(shifted)
        return probs / probs.sum(axis=1, keepdims=True)

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "priors_")
        X = as_matrix(X)
        check_dimension(self, X)
        scores = self._log_scores(X)
        # argmax takes the first maximum, so exact ties fall to class 0
        return scores.argmax(axis=1).astype(np.int64)
