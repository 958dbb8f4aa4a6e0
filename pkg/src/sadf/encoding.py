"""Feature encoding: one-hot vocabularies, feature hashing, standardization.

The :class:`FlowEncoder` is fitted on training records and turns rows into
dense numeric vectors plus a binary label. Per-feature policies:

* ``onehot``       - indicator over the training vocabulary (first-seen order)
* ``hash:<n>``     - indicator at a deterministic hash bucket in [0, n)
* ``standardize``  - (value - mean) / sigma with population sigma
* ``passthrough``  - raw numeric value
* ``drop``         - feature absent from the output

The hash function is 64-bit FNV-1a over the little-endian seed bytes followed
by the UTF-8 value bytes, reduced modulo the bucket count, so encodings are
reproducible across runs and platforms.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import multiprocessing
import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    EmptyTrainingError,
    MissingValueError,
    PolicyKindMismatchError,
    UnknownFeatureError,
)
from .schema import ATTACK_CATEGORY_NAME, LABEL_NAME, DatasetSchema, FlowRecord

SIGMA_FLOOR = 1e-9

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def hash_feature(value: str, buckets: int, seed: int = 0) -> int:
    """Deterministic bucket index in [0, buckets) for a feature value."""
    if buckets < 2:
        raise ValueError("buckets must be >= 2")
    h = _FNV_OFFSET
    for b in int(seed & _U64).to_bytes(8, "little") + str(value).encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h % buckets


def parse_policy(text: str) -> tuple[str, int | None]:
    """Split a policy string into (kind, buckets); buckets only for hash."""
    text = text.strip()
    if text.startswith("hash:"):
        buckets = int(text.split(":", 1)[1])
        if buckets < 2:
            raise ValueError(f"hash buckets must be >= 2, got {buckets}")
        return "hash", buckets
    if text in ("onehot", "standardize", "passthrough", "drop"):
        return text, None
    raise ValueError(f"unknown encoding policy {text!r}")


@dataclass(frozen=True)
class EncoderConfig:
    """Per-feature encoding policies plus the unknown-category rule and seed."""

    policies: Mapping[str, str]
    unknown: str = "zero"  # zero | hash
    seed: int = 0

    def __post_init__(self):
        if self.unknown not in ("zero", "hash"):
            raise ValueError("unknown-category policy must be 'zero' or 'hash'")
        for name, policy in self.policies.items():
            parse_policy(policy)
            if name in (LABEL_NAME, ATTACK_CATEGORY_NAME):
                raise ValueError(f"{name} is a label column and cannot carry a policy")

    def policy_for(self, name: str) -> str:
        return self.policies[name]

    def with_drops(self, drop_list: Sequence[str]) -> "EncoderConfig":
        policies = dict(self.policies)
        for name in drop_list:
            if name not in policies:
                raise UnknownFeatureError(f"cannot drop unknown feature {name!r}")
            policies[name] = "drop"
        return EncoderConfig(policies=policies, unknown=self.unknown, seed=self.seed)

    def validate_against(self, schema: DatasetSchema) -> None:
        expected = {
            f.name for f in schema.features if f.name not in (LABEL_NAME, ATTACK_CATEGORY_NAME)
        }
        missing = expected - set(self.policies)
        extra = set(self.policies) - expected
        if missing:
            raise ValueError(f"no policy for features: {sorted(missing)}")
        if extra:
            raise UnknownFeatureError(f"policies for unknown features: {sorted(extra)}")
        for f in schema.features:
            if f.name not in self.policies:
                continue
            kind, _ = parse_policy(self.policies[f.name])
            if kind in ("standardize", "passthrough") and f.kind == "categorical":
                raise PolicyKindMismatchError(
                    f"{kind} policy requires a numeric feature, {f.name} is categorical"
                )


# High-cardinality identifier columns default to hashing.
IDENTIFIER_FEATURES = frozenset({"srcip", "dstip", "sport", "dsport"})
DEFAULT_HASH_BUCKETS = 1024


def default_config(schema: DatasetSchema, seed: int = 0) -> EncoderConfig:
    """Default profile: hash identifiers, one-hot other categoricals,
    standardize numerics, pass binaries through."""
    policies: dict[str, str] = {}
    for f in schema.features:
        if f.name in (LABEL_NAME, ATTACK_CATEGORY_NAME):
            continue
        if f.name in IDENTIFIER_FEATURES:
            policies[f.name] = f"hash:{DEFAULT_HASH_BUCKETS}"
        elif f.kind == "categorical":
            policies[f.name] = "onehot"
        elif f.kind == "binary":
            policies[f.name] = "passthrough"
        else:
            policies[f.name] = "standardize"
    return EncoderConfig(policies=policies, seed=seed)


def select_features(config: EncoderConfig, drop_list: Sequence[str]) -> EncoderConfig:
    """Return a config with the listed features set to the drop policy."""
    return config.with_drops(drop_list)


@dataclass
class FeatureVector:
    """Encoded observation: dense vector, binary label, optional category."""

    x: np.ndarray
    y: int
    category: str | None = None


@dataclass
class _ColumnTable:
    """Internal columnar view of a record batch."""

    n: int
    numeric: dict[str, np.ndarray] = field(default_factory=dict)  # float64, NaN = missing
    categorical: dict[str, np.ndarray] = field(default_factory=dict)  # object, "" = missing
    y: np.ndarray | None = None
    categories: np.ndarray | None = None


# Spellings float() accepts that are not finite values; treated as missing.
_NONFINITE_TOKENS = (
    "nan", "-nan", "+nan", "inf", "-inf", "+inf", "infinity", "-infinity", "+infinity",
)


def _coerce_numeric(raw: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized numeric coercion of raw cells.

    Returns (values, bad): values has NaN for missing or non-finite cells,
    bad marks non-blank cells that do not parse at all.
    """
    series = pd.Series(raw, dtype=object)
    values = pd.to_numeric(series, errors="coerce").to_numpy(dtype=np.float64)
    bad = np.zeros(len(values), dtype=bool)
    unparsed = np.flatnonzero(np.isnan(values))
    for i in unparsed:
        # rare path: distinguish blank / non-finite spellings (missing) from
        # garbage (bad row); to_numeric already handled everything else
        text = str(raw[i]).strip()
        if text and text.lower() not in _NONFINITE_TOKENS:
            try:
                float(text)
            except ValueError:
                bad[i] = True
    nonfinite = ~np.isfinite(values)
    if nonfinite.any():
        values = values.copy()
        values[nonfinite] = np.nan
    return values, bad


def _string_view(values: np.ndarray) -> np.ndarray:
    """Canonical string form of a numeric column for categorical policies."""
    out = np.array([("" if np.isnan(v) else repr(float(v))) for v in values], dtype=object)
    return out


class FlowEncoder(BaseEstimator, TransformerMixin):
    """Schema-aware encoder with a fit/transform interface.

    Parameters
    ----------
    schema : DatasetSchema
        Column layout the incoming records conform to.
    config : EncoderConfig, optional
        Per-feature policies; defaults to :func:`default_config`.
    strict : bool
        When true, missing cells raise instead of encoding to zeros.

    Fitted attributes (trailing underscore) follow scikit-learn conventions:
    ``vocabularies_``, ``numeric_stats_``, ``layout_`` and ``dimension_``.
    """

    def __init__(self, schema: DatasetSchema, config: EncoderConfig | None = None,
                 strict: bool = False):
        self.schema = schema
        self.config = config
        self.strict = strict

    # -- fitting -----------------------------------------------------------

    def fit(self, records: Iterable[FlowRecord], y=None) -> "FlowEncoder":
        table = self._table_from_records(list(records))
        return self._fit_table(table)

    def fit_rows(self, rows: Sequence[Sequence[str]]) -> "FlowEncoder":
        """Fit directly from raw CSV cells (lenient: malformed rows dropped)."""
        table, _ = self._table_from_rows(rows)
        return self._fit_table(table)

    def fit_frame(self, frame: pd.DataFrame) -> "FlowEncoder":
        """Fit from a positionally-indexed typed frame (see transform_frame)."""
        table, _ = self._table_from_frame(frame)
        return self._fit_table(table)

    def _fit_table(self, table: _ColumnTable) -> "FlowEncoder":
        if table.n == 0:
            raise EmptyTrainingError("cannot fit an encoder on zero records")
        config = self.config if self.config is not None else default_config(self.schema)
        config.validate_against(self.schema)
        self.config_ = config
        self.vocabularies_: dict[str, tuple[str, ...]] = {}
        self.numeric_stats_: dict[str, tuple[float, float]] = {}
        layout: list[tuple[str, int, int]] = []
        start = 0
        for spec in self.schema.features:
            if spec.name in (LABEL_NAME, ATTACK_CATEGORY_NAME):
                continue
            kind, buckets = parse_policy(config.policy_for(spec.name))
            if kind == "drop":
                continue
            if kind == "onehot":
                col = self._categorical_column(table, spec.name)
                vocab: list[str] = []
                for value in pd.unique(col):
                    value = str(value).strip()
                    if value and value not in vocab:
                        vocab.append(value)
                self.vocabularies_[spec.name] = tuple(vocab)
                width = len(vocab)
            elif kind == "hash":
                width = buckets
            else:  # standardize | passthrough
                values = table.numeric[spec.name]
                if kind == "standardize":
                    finite = values[~np.isnan(values)]
                    mean = float(finite.mean()) if finite.size else 0.0
                    sigma = float(finite.std()) if finite.size else 0.0
                    self.numeric_stats_[spec.name] = (mean, max(sigma, SIGMA_FLOOR))
                width = 1
            layout.append((spec.name, start, start + width))
            start += width
        self.layout_ = tuple(layout)
        self.dimension_ = start
        return self

    # -- transforming ------------------------------------------------------

    def transform(self, records: Iterable[FlowRecord]) -> list[FeatureVector]:
        """Encode records in order; element i equals encode_record on record i."""
        records = list(records)
        X, y, cats = self.transform_records(records)
        return [
            FeatureVector(x=X[i], y=int(y[i]), category=None if cats is None else cats[i])
            for i in range(len(records))
        ]

    def transform_records(self, records: Sequence[FlowRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
        table = self._table_from_records(list(records))
        return self._encode_table(table), table.y, table.categories

    def transform_rows(
        self, rows: Sequence[Sequence[str]]
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray | None, int]:
        """Encode raw CSV cells; returns (X, y, categories, rows_rejected)."""
        table, rejected = self._table_from_rows(rows)
        return self._encode_table(table), table.y, table.categories, rejected

    def transform_frame(
        self, frame: pd.DataFrame
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray | None, int]:
        """Encode a typed frame: column i holds schema feature i, numeric
        features already float64 (NaN = missing), text features as objects.

        This is the accelerated bulk path; it shares the encoding kernel with
        the row-level routes, so well-formed data encodes identically.
        """
        table, rejected = self._table_from_frame(frame)
        return self._encode_table(table), table.y, table.categories, rejected

    def transform_one(self, record: FlowRecord) -> FeatureVector:
        return self.transform([record])[0]

    # -- internals ---------------------------------------------------------

    def _used_features(self) -> list:
        config = getattr(self, "config_", None) or self.config or default_config(self.schema)
        used = []
        for spec in self.schema.features:
            if spec.name in (LABEL_NAME, ATTACK_CATEGORY_NAME):
                continue
            kind, _ = parse_policy(config.policy_for(spec.name))
            if kind != "drop":
                used.append((spec, kind))
        return used

    def _categorical_column(self, table: _ColumnTable, name: str) -> np.ndarray:
        if name in table.categorical:
            return table.categorical[name]
        # Categorical policy over a numeric-kind feature: canonical float text.
        view = _string_view(table.numeric[name])
        table.categorical[name] = view
        return view

    def _table_from_records(self, records: list[FlowRecord]) -> _ColumnTable:
        schema = self.schema
        n = len(records)
        table = _ColumnTable(n=n)
        needed = {spec.name for spec, _ in self._used_features()}
        for idx, spec in enumerate(schema.features):
            if spec.name not in needed:
                continue
            cells = [r.values[idx] for r in records]
            if spec.kind in ("numeric", "binary"):
                table.numeric[spec.name] = np.array(
                    [np.nan if v is None else v for v in cells], dtype=np.float64
                )
            else:
                table.categorical[spec.name] = np.array(
                    ["" if v is None else str(v) for v in cells], dtype=object
                )
        label_idx = schema.label_index
        y = np.empty(n, dtype=np.int64)
        for i, r in enumerate(records):
            cell = r.values[label_idx]
            if cell is None:
                raise MissingValueError("record has no label cell")
            y[i] = schema.label_to_binary(str(cell)) if isinstance(cell, str) else int(cell)
            if y[i] not in (0, 1):
                raise ValueError(f"binary label out of range: {cell!r}")
        table.y = y
        cat_idx = schema.attack_category_index
        if cat_idx is not None:
            table.categories = np.array([str(r.values[cat_idx]) for r in records], dtype=object)
        return table

    def _table_from_rows(self, rows: Sequence[Sequence[str]]) -> tuple[_ColumnTable, int]:
        schema = self.schema
        width = len(schema)
        good = [r for r in rows if len(r) == width]
        rejected = len(rows) - len(good)
        if self.strict and rejected:
            raise MissingValueError(f"{rejected} rows with wrong column count under strict mode")
        if not good:
            table = _ColumnTable(n=0, y=np.empty(0, dtype=np.int64))
            return table, rejected
        columns = list(zip(*good))
        needed = {spec.name for spec, _ in self._used_features()}
        bad = np.zeros(len(good), dtype=bool)

        numeric: dict[str, np.ndarray] = {}
        categorical: dict[str, np.ndarray] = {}
        for idx, spec in enumerate(schema.features):
            if spec.name not in needed:
                continue
            if spec.kind in ("numeric", "binary"):
                values, col_bad = _coerce_numeric(columns[idx])
                numeric[spec.name] = values
                bad |= col_bad
            else:
                # raw cells; whitespace is normalized at the unique-value level
                categorical[spec.name] = np.array(columns[idx], dtype=object)

        label_raw = np.array(columns[schema.label_index], dtype=object)
        y, label_bad = self._binary_labels(label_raw)
        bad |= label_bad

        if bad.any():
            if self.strict:
                raise MissingValueError(f"{int(bad.sum())} malformed rows under strict mode")
            keep = ~bad
            rejected += int(bad.sum())
            numeric = {k: v[keep] for k, v in numeric.items()}
            categorical = {k: v[keep] for k, v in categorical.items()}
            y = y[keep]

        table = _ColumnTable(n=int(len(y)), numeric=numeric, categorical=categorical, y=y)
        cat_idx = schema.attack_category_index
        if cat_idx is not None:
            cats = np.array(columns[cat_idx], dtype=object)
            table.categories = cats[~bad] if bad.any() else cats
        return table, rejected

    def _binary_labels(self, raw: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map a raw label column to 0/1 plus a bad-row mask."""
        schema = self.schema
        if schema.dataset_id == "kdd99":
            codes, uniques = pd.factorize(raw)
            mapped = np.zeros(len(uniques), dtype=np.int64)
            bad_unique = np.zeros(len(uniques), dtype=bool)
            for i, u in enumerate(uniques):
                if not isinstance(u, str):
                    bad_unique[i] = True  # NaN padding from short rows
                    continue
                try:
                    mapped[i] = schema.label_to_binary(u)
                except (MissingValueError, ValueError):
                    bad_unique[i] = True
            return mapped[codes], (codes < 0) | bad_unique[np.maximum(codes, 0)]
        if raw.dtype == object:
            values, parse_bad = _coerce_numeric(raw)
        else:
            values, parse_bad = raw.astype(np.float64), np.zeros(len(raw), dtype=bool)
        bad = parse_bad | np.isnan(values) | ~np.isin(values, (0.0, 1.0))
        return np.nan_to_num(values).astype(np.int64), bad

    def _table_from_frame(self, frame: pd.DataFrame) -> tuple[_ColumnTable, int]:
        schema = self.schema
        if frame.shape[1] != len(schema):
            raise ValueError(
                f"frame has {frame.shape[1]} columns, schema {schema.dataset_id} "
                f"expects {len(schema)}"
            )
        needed = {spec.name for spec, _ in self._used_features()}
        numeric: dict[str, np.ndarray] = {}
        categorical: dict[str, np.ndarray] = {}
        for idx, spec in enumerate(schema.features):
            if spec.name not in needed:
                continue
            col = frame.iloc[:, idx]
            if spec.kind in ("numeric", "binary"):
                values = col.to_numpy(dtype=np.float64, copy=True)
                nonfinite = ~np.isfinite(values)
                if nonfinite.any():
                    values[nonfinite] = np.nan
                numeric[spec.name] = values
            else:
                categorical[spec.name] = col.to_numpy(dtype=object)

        label_col = frame.iloc[:, schema.label_index].to_numpy()
        y, bad = self._binary_labels(label_col)
        rejected = int(bad.sum())
        if rejected:
            if self.strict:
                raise MissingValueError(f"{rejected} malformed rows under strict mode")
            keep = ~bad
            numeric = {k: v[keep] for k, v in numeric.items()}
            categorical = {k: v[keep] for k, v in categorical.items()}
            y = y[keep]
        table = _ColumnTable(n=int(len(y)), numeric=numeric, categorical=categorical, y=y)
        cat_idx = schema.attack_category_index
        if cat_idx is not None:
            cats = frame.iloc[:, cat_idx].to_numpy(dtype=object)
            table.categories = cats[~bad] if rejected else cats
        return table, rejected

    def _encode_table(self, table: _ColumnTable) -> np.ndarray:
        if not hasattr(self, "layout_"):
            raise RuntimeError("encoder is not fitted")
        n = table.n
        X = np.zeros((n, self.dimension_), dtype=np.float64)
        if n == 0:
            return X
        config = self.config_
        rows = np.arange(n)
        for name, start, stop in self.layout_:
            kind, buckets = parse_policy(config.policy_for(name))
            if kind in ("standardize", "passthrough"):
                values = table.numeric[name]
                missing = np.isnan(values)
                if self.strict and missing.any():
                    raise MissingValueError(f"missing value in numeric feature {name}")
                if kind == "standardize":
                    mean, sigma = self.numeric_stats_[name]
                    out = (values - mean) / sigma
                else:
                    out = values
                out = np.where(missing, 0.0, out)
                X[:, start] = out
                continue

            width = stop - start
            if width == 0:
                continue
            col = self._categorical_column(table, name)
            codes, uniques = pd.factorize(col)
            uniques = [str(u).strip() for u in uniques]
            if self.strict and any(u == "" for u in uniques):
                raise MissingValueError(f"missing value in categorical feature {name}")
            bucket_of = np.full(len(uniques), -1, dtype=np.int64)
            if kind == "hash":
                for u_idx, u in enumerate(uniques):
                    if u == "" and config.unknown == "zero":
                        continue
                    bucket_of[u_idx] = hash_feature(u, width, config.seed)
            else:  # onehot
                vocab_index = {v: i for i, v in enumerate(self.vocabularies_[name])}
                for u_idx, u in enumerate(uniques):
                    if u in vocab_index:
                        bucket_of[u_idx] = vocab_index[u]
                    elif config.unknown == "hash" and u != "":
                        bucket_of[u_idx] = hash_feature(u, width, config.seed)
                    # unknown under zero policy, or missing: all-zero block
            target = bucket_of[codes]
            mask = target >= 0
            X[rows[mask], start + target[mask]] = 1.0
        return X


def fit_encoder(
    train_records: Iterable[FlowRecord],
    schema: DatasetSchema,
    config: EncoderConfig | None = None,
    strict: bool = False,
) -> FlowEncoder:
    """Fit a :class:`FlowEncoder` on training records."""
    return FlowEncoder(schema=schema, config=config, strict=strict).fit(train_records)


def encode_record(encoder: FlowEncoder, record: FlowRecord) -> FeatureVector:
    """Encode a single record against a fitted encoder."""
    return encoder.transform_one(record)


_worker_encoder: FlowEncoder | None = None


def _init_encode_worker(encoder: FlowEncoder) -> None:
    global _worker_encoder
    _worker_encoder = encoder


def _encode_block(records: list[FlowRecord]) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    return _worker_encoder.transform_records(records)


def encode_batch(
    encoder: FlowEncoder, records: Sequence[FlowRecord], workers: int = 1
) -> list[FeatureVector]:
    """Encode a batch, optionally fanning out across processes.

    Output order equals input order and is bit-identical for any worker count.
    """
    records = list(records)
    if workers <= 1 or len(records) < 2 * workers:
        return encoder.transform(records)
    blocks = np.array_split(np.arange(len(records)), workers)
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        max_workers=workers, mp_context=ctx,
        initializer=_init_encode_worker, initargs=(encoder,),
    ) as pool:
        parts = list(pool.map(_encode_block, ([records[i] for i in b] for b in blocks)))
    out: list[FeatureVector] = []
    for X, y, cats in parts:
        for i in range(len(y)):
            out.append(FeatureVector(x=X[i], y=int(y[i]), category=None if cats is None else cats[i]))
    return out
