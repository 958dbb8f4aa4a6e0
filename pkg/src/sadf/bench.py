"""Benchmark harness: ladders of input sizes, repeated timed runs, tables.

Absolute seconds are hardware-bound and not comparable across machines, so
reports carry environment metadata and the suite asserts shape properties
(monotone growth with record count, phase additivity) rather than absolute
values.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
import traceback
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoding import FlowEncoder
from .engine import PhaseTimings, run_detection
from .errors import InsufficientRowsError, SadfError
from .schema import DatasetSchema, is_header_row


@dataclass(frozen=True)
class BenchCase:
    model_id: str
    input_path: str
    record_count: int
    chunk_size: int
    workers: int
    repetitions: int = 3

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass
class BenchRow:
    case: BenchCase
    timings: PhaseTimings  # arithmetic mean over the repetitions
    throughput_pps: float
    raw: list[PhaseTimings] = field(default_factory=list)


def make_ladder(
    source_csv: str | Path,
    counts: list[int],
    out_dir: str | Path,
    schema: DatasetSchema | None = None,
) -> list[Path]:
    """Write one head-prefix file per count; each smaller file is a prefix
    of every larger one."""
    if not counts:
        raise ValueError("counts must be non-empty")
    if any(c < 1 for c in counts):
        raise ValueError("ladder counts must be positive")
    source_csv = Path(source_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    targets = {
        count: open(out_dir / f"{source_csv.stem}_{count}.csv", "w",
                    encoding="utf-8", newline="")
        for count in sorted(set(counts))
    }
    most = max(targets)
    written = 0
    try:
        with open(source_csv, encoding="utf-8", newline="") as fh:
            for line_no, line in enumerate(fh):
                if line_no == 0 and schema is not None:
                    cells = next(csv.reader([line]))
                    if is_header_row(cells, schema):
                        for handle in targets.values():
                            handle.write(line)
                        continue
                for count, handle in targets.items():
                    if written < count:
                        handle.write(line)
                written += 1
                if written >= most:
                    break
    finally:
        for handle in targets.values():
            handle.close()
    if written < most:
        for count in targets:
            (out_dir / f"{source_csv.stem}_{count}.csv").unlink(missing_ok=True)
        raise InsufficientRowsError(
            f"{source_csv} has {written} data rows, ladder needs {most}"
        )
    return [out_dir / f"{source_csv.stem}_{count}.csv" for count in counts]


def run_case(case: BenchCase, model, encoder: FlowEncoder) -> BenchRow:
    """Run one case for its configured repetitions and average the phases."""
    raw: list[PhaseTimings] = []
    rows = 0
    for _ in range(case.repetitions):
        run = run_detection(
            model, encoder, case.input_path,
            chunk_size=case.chunk_size, workers=case.workers,
        )
        raw.append(run.timings)
        rows = run.config["rows"]
    mean = PhaseTimings(
        load_distribute_s=float(np.mean([t.load_distribute_s for t in raw])),
        preprocess_s=float(np.mean([t.preprocess_s for t in raw])),
        detect_s=float(np.mean([t.detect_s for t in raw])),
        total_s=float(np.mean([t.total_s for t in raw])),
    )
    if rows == 0:
        raise SadfError(f"bench case over {case.input_path} classified zero rows")
    return BenchRow(case=case, timings=mean,
                    throughput_pps=rows / mean.total_s, raw=raw)


def run_bench(
    cases: list[BenchCase], artifacts: dict[str, tuple[object, FlowEncoder]]
) -> tuple[list[BenchRow], list[dict]]:
    """Run all cases strictly sequentially; a failing case is recorded and
    skipped, the suite continues."""
    rows: list[BenchRow] = []
    failures: list[dict] = []
    for case in cases:
        model, encoder = artifacts[case.model_id]
        try:
            rows.append(run_case(case, model, encoder))
        except Exception as err:  # noqa: BLE001 - a case must not kill the suite
            failures.append({
                "case": case.__dict__.copy(),
                "error": f"{type(err).__name__}: {err}",
                "traceback": traceback.format_exc(),
            })
    return rows, failures


_TABLES = {
    "detection_time": lambda row: row.timings.detect_s,
    "load_time": lambda row: row.timings.load_distribute_s,
    "preprocess_time": lambda row: row.timings.preprocess_s,
    "total_time": lambda row: row.timings.total_s,
    "throughput_pps": lambda row: row.throughput_pps,
}


def environment_metadata() -> dict:
    import multiprocessing

    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": multiprocessing.cpu_count(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
    }


def emit_tables(
    rows: list[BenchRow],
    out_dir: str | Path,
    formats: tuple[str, ...] = ("csv", "json"),
    meta_extra: dict | None = None,
) -> list[Path]:
    """Write one table per measured quantity: record count on the row axis,
    one column per model. Identical rows produce byte-identical files."""
    if not rows:
        raise ValueError("no bench rows to emit")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    models = sorted({row.case.model_id for row in rows})
    keys = sorted({(row.case.record_count, row.case.chunk_size, row.case.workers)
                   for row in rows})
    cells = {
        (row.case.record_count, row.case.chunk_size, row.case.workers,
         row.case.model_id): row
        for row in rows
    }
    written: list[Path] = []
    for table_name, getter in _TABLES.items():
        grid = []
        for count, chunk, workers in keys:
            entry: dict = {"record_count": count, "chunk_size": chunk, "workers": workers}
            for model_id in models:
                row = cells.get((count, chunk, workers, model_id))
                entry[model_id] = None if row is None else getter(row)
            grid.append(entry)
        if "csv" in formats:
            path = out_dir / f"{table_name}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["record_count", "chunk_size", "workers", *models])
                for entry in grid:
                    writer.writerow(
                        [entry["record_count"], entry["chunk_size"], entry["workers"]]
                        + [("" if entry[m] is None else f"{entry[m]:.10g}") for m in models]
                    )
            written.append(path)
        if "json" in formats:
            path = out_dir / f"{table_name}.json"
            path.write_text(json.dumps(grid, sort_keys=True, indent=2) + "\n",
                            encoding="utf-8")
            written.append(path)
    meta = {"environment": environment_metadata(), "tables": sorted(_TABLES)}
    if meta_extra:
        meta.update(meta_extra)
    meta_path = out_dir / "meta.json"
    meta_path.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n",
                         encoding="utf-8")
    written.append(meta_path)
    return written
