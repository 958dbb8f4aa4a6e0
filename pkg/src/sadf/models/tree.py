"""Greedy binary CART classifier with Gini impurity."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..validation import as_labels, as_matrix, check_dimension, check_fitted


def gini_impurity(counts: np.ndarray) -> float:
    """1 - sum(p_c^2) over class proportions."""
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - (p * p).sum())


class DecisionTree(BaseEstimator, ClassifierMixin):
    """Binary CART: greedy Gini splits at midpoints between distinct values.

    Growth stops at class purity, ``max_depth``, or when no split leaves
    ``min_leaf`` rows on both sides. Splits with zero impurity gain are still
    taken when valid, which is what lets structured problems with an
    uninformative root (XOR-like data) be solved at depth 2. Ties between
    candidate splits resolve to the lowest feature index, then the lowest
    threshold, so refits are reproducible.

    ``mtry`` restricts each split to a random feature subset and exists for
    the forest; plain trees consider every feature.
    """

    def __init__(self, max_depth: int | None = 16, min_leaf: int = 5,
                 mtry: int | None = None, random_state: int | None = None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.mtry = mtry
        self.random_state = random_state

    def fit(self, X, y) -> "DecisionTree":
        X = as_matrix(X)
        y = as_labels(y, len(X))
        rng = np.random.default_rng(self.random_state)
        return self._fit(X, y, rng)

    def _fit(self, X: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> "DecisionTree":
        if len(X) == 0:
            raise ValueError("cannot fit a tree on zero rows")
        n, d = X.shape
        self.n_features_in_ = d
        min_leaf = max(1, int(self.min_leaf))
        mtry = self.mtry if self.mtry is not None else d
        mtry = max(1, min(mtry, d))
        is_binary = (np.isin(X, (0.0, 1.0))).all(axis=0)

        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        leaf_class: list[int] = []
        value: list[tuple[int, int]] = []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            leaf_class.append(-1)
            value.append((0, 0))
            return len(feature) - 1

        # LIFO stack; the left child is pushed last so it is grown first.
        stack: list[tuple[np.ndarray, int, int, bool]] = [(np.arange(n), 0, -1, False)]
        while stack:
            idx, depth, parent, is_left = stack.pop()
            nid = new_node()
            if parent >= 0:
                if is_left:
                    left[parent] = nid
                else:
                    right[parent] = nid
            ysub = y[idx]
            n1 = int(ysub.sum())
            n0 = len(idx) - n1
            value[nid] = (n0, n1)

            splittable = (
                n0 > 0
                and n1 > 0
                and len(idx) >= 2 * min_leaf
                and (self.max_depth is None or depth < self.max_depth)
            )
            split = None
            if splittable:
                if mtry < d:
                    candidates = np.sort(rng.choice(d, size=mtry, replace=False))
                else:
                    candidates = np.arange(d)
                split = self._best_split(X, y, idx, ysub, candidates, is_binary, min_leaf)
            if split is None:
                leaf_class[nid] = 1 if n1 > n0 else 0
                continue

            _, f, thr = split
            feature[nid] = f
            threshold[nid] = thr
            mask = X[idx, f] <= thr
            stack.append((idx[~mask], depth + 1, nid, False))
            stack.append((idx[mask], depth + 1, nid, True))

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold, dtype=np.float64)
        self.children_left_ = np.array(left, dtype=np.int64)
        self.children_right_ = np.array(right, dtype=np.int64)
        self.leaf_class_ = np.array(leaf_class, dtype=np.int64)
        self.value_ = np.array(value, dtype=np.int64)
        self.n_nodes_ = len(feature)
        return self

    def _best_split(
        self,
        X: np.ndarray,
        y: np.ndarray,
        idx: np.ndarray,
        ysub: np.ndarray,
        candidates: np.ndarray,
        is_binary: np.ndarray,
        min_leaf: int,
    ) -> tuple[float, int, float] | None:
        n = len(idx)
        total1 = float(ysub.sum())
        best: tuple[float, int, float] | None = None

        bin_feats = candidates[is_binary[candidates]]
        if len(bin_feats):
            sub = X[np.ix_(idx, bin_feats)]
            ones = sub.sum(axis=0)
            ones1 = ysub.astype(np.float64) @ sub
            zeros = n - ones
            zeros1 = total1 - ones1
            valid = (ones >= min_leaf) & (zeros >= min_leaf)
            if valid.any():
                with np.errstate(divide="ignore", invalid="ignore"):
                    g_one = 1.0 - (ones1**2 + (ones - ones1) ** 2) / ones**2
                    g_zero = 1.0 - (zeros1**2 + (zeros - zeros1) ** 2) / zeros**2
                    weighted = (ones * g_one + zeros * g_zero) / n
                weighted = np.where(valid, weighted, np.inf)
                j = int(np.argmin(weighted))
                # among equal ginis prefer the lowest feature index
                ties = np.flatnonzero(weighted == weighted[j])
                j = int(ties[np.argmin(bin_feats[ties])])
                best = (float(weighted[j]), int(bin_feats[j]), 0.5)

        for f in candidates[~is_binary[candidates]]:
            col = X[idx, f]
            order = np.argsort(col, kind="stable")
            sv = col[order]
            sy = ysub[order]
            boundaries = np.flatnonzero(sv[1:] != sv[:-1]) + 1
            if len(boundaries) == 0:
                continue
            left_n = boundaries.astype(np.float64)
            right_n = n - left_n
            keep = (left_n >= min_leaf) & (right_n >= min_leaf)
            if not keep.any():
                continue
            cum1 = np.cumsum(sy)
            left1 = cum1[boundaries - 1].astype(np.float64)
            right1 = total1 - left1
            g_left = 1.0 - (left1**2 + (left_n - left1) ** 2) / left_n**2
            g_right = 1.0 - (right1**2 + (right_n - right1) ** 2) / right_n**2
            weighted = (left_n * g_left + right_n * g_right) / n
            weighted = np.where(keep, weighted, np.inf)
            i = int(np.argmin(weighted))  # first minimum = lowest threshold
            b = boundaries[i]
            thr = (sv[b - 1] + sv[b]) / 2.0
            if thr >= sv[b]:
                # adjacent floats can collapse the midpoint onto the upper
                # value; fall back to the lower value so `<=` routes exactly
                thr = sv[b - 1]
            cand = (float(weighted[i]), int(f), float(thr))
            if best is None or cand < best:
                best = cand
        return best

    def predict(self, X) -> np.ndarray:
        check_fitted(self, "feature_")
        X = as_matrix(X)
        check_dimension(self, X)
        # level-synchronous traversal: every row advances one edge per pass
        node = np.zeros(len(X), dtype=np.int64)
        leaf_class = self.leaf_class_
        feature = self.feature_
        threshold = self.threshold_
        left = self.children_left_
        right = self.children_right_
        active = np.flatnonzero(leaf_class[node] < 0)
        while len(active):
            current = node[active]
            go_left = X[active, feature[current]] <= threshold[current]
            advanced = np.where(go_left, left[current], right[current])
            node[active] = advanced
            active = active[leaf_class[advanced] < 0]
        return leaf_class[node].copy()

    def decision_path_one(self, x: np.ndarray) -> list[int]:
        """Node ids visited from root to leaf for one input row."""
        check_fitted(self, "feature_")
        nid = 0
        path = [0]
        while self.leaf_class_[nid] < 0:
            if x[self.feature_[nid]] <= self.threshold_[nid]:
                nid = int(self.children_left_[nid])
            else:
                nid = int(self.children_right_[nid])
            path.append(nid)
        return path
