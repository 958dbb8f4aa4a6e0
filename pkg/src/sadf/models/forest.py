"""Random forest of CART trees with reproducible per-tree seeding."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import multiprocessing
import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import as_labels, as_matrix, check_dimension, check_fitted
from .tree import DecisionTree

_fit_context: dict = {}


def _init_fit_worker(X, y, params):
    _fit_context["X"] = X
    _fit_context["y"] = y
    _fit_context["params"] = params


def _fit_one_tree(tree_seed: int) -> DecisionTree:
    X, y = _fit_context["X"], _fit_context["y"]
    params = _fit_context["params"]
    return _grow_tree(X, y, tree_seed, **params)


def _grow_tree(X, y, tree_seed, max_depth, min_leaf, mtry, bootstrap) -> DecisionTree:
    rng = np.random.default_rng(tree_seed)
    if bootstrap:
        sample = rng.integers(0, len(X), size=len(X))
        Xs, ys = X[sample], y[sample]
    else:
        Xs, ys = X, y
    tree = DecisionTree(max_depth=max_depth, min_leaf=min_leaf, mtry=mtry)
    return tree._fit(Xs, ys, rng)


class RandomForest(BaseEstimator, ClassifierMixin):
    """Bagged CART trees voting by majority; ties go to class 0.

    Tree i draws its bootstrap sample and per-split feature subsets from a
    generator seeded with ``seed + i``, so the forest is identical no matter
    how many processes fit it. With ``mtry`` equal to the full width,
    ``bootstrap=False`` and one tree, predictions reduce exactly to a single
    :class:`DecisionTree`.
    """

    def __init__(self, n_trees: int = 25, max_depth: int | None = 16, min_leaf: int = 5,
                 mtry: int | None = None, seed: int = 0, bootstrap: bool = True,
                 n_jobs: int = 1):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.mtry = mtry
        self.seed = seed
        self.bootstrap = bootstrap
        self.n_jobs = n_jobs

    def fit(self, X, y) -> "RandomForest":
        X = as_matrix(X)
        y = as_labels(y, len(X))
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        d = X.shape[1]
        mtry = self.mtry if self.mtry is not None else max(1, math.ceil(math.sqrt(d)))
        if not 1 <= mtry <= d:
            raise ValueError(f"mtry must lie in [1, {d}], got {mtry}")
        self.n_features_in_ = d
        self.mtry_ = mtry
        params = dict(max_depth=self.max_depth, min_leaf=self.min_leaf,
                      mtry=mtry, bootstrap=self.bootstrap)
        seeds = [self.seed + i for i in range(self.n_trees)]
        if self.n_jobs > 1:
            ctx = multiprocessing.get_context("fork")
            with ProcessPoolExecutor(
                max_workers=self.n_jobs, mp_context=ctx,
                initializer=_init_fit_worker, initargs=(X, y, params),
            ) as pool:
                self.trees_ = list(pool.map(_fit_one_tree, seeds))
        else:
            self.trees_ = [_grow_tree(X, y, s, **params) for s in seeds]
        return self

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "trees_")
        X = as_matrix(X)
        check_dimension(self, X)
        votes = np.zeros(len(X), dtype=np.int64)
        for tree in self.trees_:
            votes += tree.predict(X)
        return (2 * votes > len(self.trees_)).astype(np.int64)
