"""Near-real-time detection loop over chunked traffic.

A detection run walks three sequential phases, each timed against the wall
clock so their sum accounts for the total:

1. load        - read the input file into memory
2. preprocess  - parse rows and encode them into the feature matrix
3. detect      - classify fixed-size chunks, raising a per-chunk alert
                 whenever the attack count reaches the threshold

The detect phase dispatches chunks to an in-process worker pool (forked
processes sharing the model and matrix copy-on-write). A sequencer emits
chunk reports in index order regardless of completion order, and per-chunk
work carries no cross-chunk state, so predictions, alerts and the aggregate
confusion are identical for any worker count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import multiprocessing
import shutil
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
import pandas as pd

from .encoding import FeatureVector, FlowEncoder
from .errors import (
    EncoderModelMismatchError,
    SinkWriteFailureError,
    SourceUnreadableError,
)
from .models import model_id_of
from .models.knn import KNearestNeighbors
from .schema import is_header_row

_PARSE_BLOCK_ROWS = 131072


@dataclass
class PhaseTimings:
    """Wall-clock decomposition of a run; phases are sequential stages."""

    load_distribute_s: float
    preprocess_s: float
    detect_s: float
    total_s: float


@dataclass
class Chunk:
    index: int
    vectors: list[FeatureVector]
    source_span: tuple[int, int]


@dataclass
class ChunkReport:
    chunk_index: int
    predictions: np.ndarray
    attack_count: int
    alert: bool
    detect_time_s: float
    source_span: tuple[int, int]


@dataclass
class DetectionRun:
    run_id: str
    reports: list[ChunkReport]
    confusion: tuple[int, int, int, int]  # tp, tn, fp, fn
    timings: PhaseTimings
    config: dict
    rows_rejected: int = 0

    @property
    def predictions(self) -> np.ndarray:
        if not self.reports:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([r.predictions for r in self.reports])

    @property
    def alert_count(self) -> int:
        return sum(1 for r in self.reports if r.alert)


def new_run_id() -> str:
    return time.strftime("%Y%m%dT%H%M%S") + "-" + uuid.uuid4().hex[:8]


def _chunk_ranges(n: int, chunk_size: int) -> list[tuple[int, int, int]]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    return [
        (index, start, min(start + chunk_size, n))
        for index, start in enumerate(range(0, n, chunk_size))
    ]


def chunk_stream(source: Iterable[FeatureVector], chunk_size: int) -> Iterator[Chunk]:
    """Group encoded records into fixed-size chunks, preserving order.

    Every chunk except possibly the last holds exactly ``chunk_size``
    records; concatenating the chunks reproduces the source.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    buffer: list[FeatureVector] = []
    index = 0
    row = 0
    for vector in source:
        buffer.append(vector)
        if len(buffer) == chunk_size:
            yield Chunk(index=index, vectors=buffer, source_span=(row, row + len(buffer) - 1))
            row += len(buffer)
            index += 1
            buffer = []
    if buffer:
        yield Chunk(index=index, vectors=buffer, source_span=(row, row + len(buffer) - 1))


class AlertSink:
    """Append-only newline-delimited alert log bound to one run id."""

    def __init__(self, path: str | Path, run_id: str):
        self.path = Path(path)
        self.run_id = run_id

    def append(self, report: ChunkReport, unix_ts: float | None = None) -> str:
        ts = int(time.time() if unix_ts is None else unix_ts)
        first, last = report.source_span
        line = f"{self.run_id},{report.chunk_index},{first},{last},{report.attack_count},{ts}"
        try:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        except OSError as err:
            raise SinkWriteFailureError(f"cannot append alert to {self.path}: {err}") from err
        return line


def raise_alert(report: ChunkReport, sink: AlertSink, unix_ts: float | None = None) -> str | None:
    """Append one alert line for an alerting chunk; quiet chunks write nothing."""
    if not report.alert:
        return None
    return sink.append(report, unix_ts=unix_ts)


_detect_state: dict = {}


def _init_detect_worker(model, X) -> None:
    _detect_state["model"] = model
    _detect_state["X"] = X


def _detect_chunk(task: tuple[int, int, int]) -> tuple[int, np.ndarray, float]:
    index, start, stop = task
    started = time.perf_counter()
    predictions = _detect_state["model"].predict(_detect_state["X"][start:stop])
    return index, predictions, time.perf_counter() - started


def detect_encoded(
    model,
    X: np.ndarray,
    chunk_size: int,
    workers: int = 1,
    alert_threshold: int = 1,
) -> list[ChunkReport]:
    """Classify an encoded matrix chunk by chunk, in chunk-index order."""
    if getattr(model, "n_features_in_", X.shape[1]) != X.shape[1]:
        raise EncoderModelMismatchError(
            f"model expects {model.n_features_in_} features, matrix has {X.shape[1]}"
        )
    ranges = _chunk_ranges(len(X), chunk_size)
    reports: list[ChunkReport] = []

    def finish(index: int, predictions: np.ndarray, detect_time: float) -> None:
        start, stop = ranges[index][1], ranges[index][2]
        attack_count = int(predictions.sum())
        reports.append(
            ChunkReport(
                chunk_index=index,
                predictions=predictions,
                attack_count=attack_count,
                alert=attack_count >= alert_threshold,
                detect_time_s=detect_time,
                source_span=(start, stop - 1),
            )
        )

    if workers <= 1:
        _init_detect_worker(model, X)
        for task in ranges:
            finish(*_detect_chunk(task))
        return reports

    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(
        max_workers=workers, mp_context=ctx,
        initializer=_init_detect_worker, initargs=(model, X),
    ) as pool:
        futures = [pool.submit(_detect_chunk, task) for task in ranges]
        # sequencer: consume in submission order so reports stay ordered
        for future in futures:
            finish(*future.result())
    return reports


def _confusion(y: np.ndarray, predictions: np.ndarray) -> tuple[int, int, int, int]:
    tp = int(((y == 1) & (predictions == 1)).sum())
    tn = int(((y == 0) & (predictions == 0)).sum())
    fp = int(((y == 0) & (predictions == 1)).sum())
    fn = int(((y == 1) & (predictions == 0)).sum())
    return tp, tn, fp, fn


def _load_text(path: str | Path) -> str:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return fh.read()
    except OSError as err:
        raise SourceUnreadableError(f"cannot read {path}: {err}") from err


def _typed_frame(text: str, schema, skip_header: bool) -> "pd.DataFrame":
    """Single-pass typed CSV parse: numeric features as float64, text as
    objects. Over-long rows are skipped; short rows NaN-pad the tail and get
    rejected later through their missing label (the last column)."""
    dtype: dict[int, object] = {}
    na_values: dict[int, list[str]] = {}
    for idx, spec in enumerate(schema.features):
        if spec.group != "labelled" and spec.kind in ("numeric", "binary"):
            dtype[idx] = np.float64
            na_values[idx] = [""]
        else:
            dtype[idx] = object
    if schema.dataset_id != "kdd99":
        dtype[schema.label_index] = np.float64
        na_values[schema.label_index] = [""]
    return pd.read_csv(
        io.StringIO(text), header=None, names=list(range(len(schema))),
        dtype=dtype, skiprows=1 if skip_header else 0,
        keep_default_na=False, na_values=na_values,
        skip_blank_lines=True, engine="c", on_bad_lines="skip",
    )


def _parse_and_encode(
    text: str, encoder: FlowEncoder
) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Parse CSV text and encode it; returns (X, y, rejected, had_header)."""
    newline = text.find("\n")
    first_cells = next(csv.reader([text[: newline if newline >= 0 else len(text)]]), [])
    had_header = is_header_row(first_cells, encoder.schema)

    try:
        frame = _typed_frame(text, encoder.schema, had_header)
    except (ValueError, TypeError, pd.errors.ParserError, pd.errors.EmptyDataError):
        frame = None  # odd cells or encodings: take the exact row-level route
    if frame is not None:
        X, y, _, _ = encoder.transform_frame(frame)
        data_rows = text.count("\n")
        if text and not text.endswith("\n"):
            data_rows += 1
        if had_header:
            data_rows -= 1
        return X, y, max(0, data_rows - len(y)), had_header

    reader = csv.reader(io.StringIO(text))
    x_parts: list[np.ndarray] = []
    y_parts: list[np.ndarray] = []
    rejected = 0
    block: list[Sequence[str]] = []

    def flush() -> None:
        nonlocal rejected
        if not block:
            return
        X_part, y_part, _, bad = encoder.transform_rows(block)
        x_parts.append(X_part)
        y_parts.append(y_part)
        rejected += bad
        block.clear()

    for row_no, row in enumerate(reader):
        if row_no == 0 and had_header:
            continue
        block.append(row)
        if len(block) >= _PARSE_BLOCK_ROWS:
            flush()
    flush()

    if x_parts:
        X = np.vstack(x_parts) if len(x_parts) > 1 else x_parts[0]
        y = np.concatenate(y_parts) if len(y_parts) > 1 else y_parts[0]
    else:
        X = np.zeros((0, encoder.dimension_))
        y = np.empty(0, dtype=np.int64)
    return X, y, rejected, had_header


def run_detection(
    model,
    encoder: FlowEncoder,
    source: str | Path,
    chunk_size: int = 300,
    workers: int = 1,
    alert_threshold: int = 1,
    alert_sink: AlertSink | None = None,
    annotate_path: str | Path | None = None,
    run_id: str | None = None,
) -> DetectionRun:
    """Run the full load / preprocess / detect pipeline over a CSV source."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if model.n_features_in_ != encoder.dimension_:
        raise EncoderModelMismatchError(
            f"model expects {model.n_features_in_} features, "
            f"encoder produces {encoder.dimension_}"
        )
    effective_workers = workers
    if isinstance(model, KNearestNeighbors) and workers > 1:
        # shipping the stored training set to every worker defeats the pool
        effective_workers = 1

    run_id = run_id or new_run_id()
    started = time.perf_counter()

    text = _load_text(source)
    load_s = time.perf_counter() - started

    t1 = time.perf_counter()
    X, y, rejected, had_header = _parse_and_encode(text, encoder)
    preprocess_s = time.perf_counter() - t1

    t2 = time.perf_counter()
    reports = detect_encoded(
        model, X, chunk_size=chunk_size, workers=effective_workers,
        alert_threshold=alert_threshold,
    )
    if alert_sink is not None:
        for report in reports:
            raise_alert(report, alert_sink)
    detect_s = time.perf_counter() - t2

    predictions = (
        np.concatenate([r.predictions for r in reports])
        if reports else np.empty(0, dtype=np.int64)
    )
    if annotate_path is not None:
        _write_annotated(text, predictions, encoder, had_header, annotate_path)

    total_s = time.perf_counter() - started
    timings = PhaseTimings(
        load_distribute_s=load_s, preprocess_s=preprocess_s,
        detect_s=detect_s, total_s=total_s,
    )
    config = {
        "model": model_id_of(model),
        "chunk_size": chunk_size,
        "workers": workers,
        "workers_effective": effective_workers,
        "alert_threshold": alert_threshold,
        "encoder_dimension": encoder.dimension_,
        "encoder_seed": encoder.config_.seed,
        "source": str(source),
        "rows": int(len(y)),
        "rows_rejected": rejected,
        "run_id": run_id,
    }
    return DetectionRun(
        run_id=run_id,
        reports=reports,
        confusion=_confusion(y, predictions),
        timings=timings,
        config=config,
        rows_rejected=rejected,
    )


def _write_annotated(
    text: str, predictions: np.ndarray, encoder: FlowEncoder,
    had_header: bool, path: str | Path,
) -> None:
    """Copy the accepted input rows with an appended 0/1 `predicted` column."""
    reader = csv.reader(io.StringIO(text))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        width = len(encoder.schema)
        next_pred = 0
        for row_no, row in enumerate(reader):
            if row_no == 0 and had_header:
                writer.writerow(row + ["predicted"])
                continue
            if len(row) != width:
                continue  # rejected rows carry no prediction
            if next_pred >= len(predictions):
                break
            writer.writerow(row + [str(int(predictions[next_pred]))])
            next_pred += 1


def archive_input(path: str | Path, log_dir: str | Path, run_id: str | None = None) -> Path:
    """Store a byte-identical copy of the input under a run-id directory.

    The copy's SHA-256 checksum is recorded alongside it. Each call gets a
    fresh run id, so archiving the same file twice yields two paths.
    """
    source = Path(path)
    digest = hashlib.sha256(source.read_bytes()).hexdigest()
    run_dir = Path(log_dir) / (run_id or new_run_id())
    run_dir.mkdir(parents=True, exist_ok=False)
    target = run_dir / source.name
    shutil.copy2(source, target)
    (run_dir / "checksum.sha256").write_text(f"{digest}  {source.name}\n", encoding="utf-8")
    return target
