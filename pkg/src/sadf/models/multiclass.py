"""One-vs-rest training over attack categories, reusing the binary models."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


def train_per_category(X, categories: Sequence[str], factory: Callable) -> dict:
    """Fit one binary model per distinct category string.

    Each model treats its category as the positive class and everything else
    (including normal traffic, conventionally an empty category string) as
    negative. Returns a mapping category -> fitted model in sorted order.
    """
    cats = np.asarray(categories, dtype=object)
    names = sorted({c for c in cats if c not in ("", None)})
    models = {}
    for name in names:
        y = (cats == name).astype(np.int64)
        model = factory()
        models[name] = model.fit(X, y)
    return models


def predict_categories(models: dict, X) -> dict:
    """Per-category binary predictions for each fitted one-vs-rest model."""
    return {name: model.predict(X) for name, model in models.items()}
