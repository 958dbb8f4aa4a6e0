"""Operator command line: schema, split, train, eval, detect, bench.

Exit codes are a stable scripting contract: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

from . import config as cfg
from .bench import BenchCase, emit_tables, make_ladder, run_bench
from .encoding import FlowEncoder
from .engine import AlertSink, archive_input, new_run_id, run_detection
from .errors import SadfError
from .models import (
    METRICS_HEADER,
    MODEL_REGISTRY,
    evaluate,
    make_model,
    metrics_csv_row,
)
from .persistence import load_encoder, load_model, save_encoder, save_model
from .schema import (
    SUPPORTED_DATASETS,
    HeadCounts,
    RandomSplit,
    is_header_row,
    load_schema,
    parse_csv,
    schema_table,
    split_by_time,
    split_sequence,
)
from .synthetic import write_synthetic_csv

_SEED_PARAM = {"rf": "seed", "svm": "seed", "dt": "random_state"}


def _read_rows(path: str | Path, schema) -> list[list[str]]:
    rows: list[list[str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for i, row in enumerate(reader):
            if i == 0 and is_header_row(row, schema):
                continue
            rows.append(row)
    return rows


def _parse_split_spec(spec: str, seed: int):
    parts = spec.split(":")
    if parts[0] == "head" and len(parts) == 3:
        return HeadCounts(n_train=int(parts[1]), n_test=int(parts[2]))
    if parts[0] == "random" and len(parts) in (2, 3):
        return RandomSplit(fraction=float(parts[1]),
                           seed=int(parts[2]) if len(parts) == 3 else seed)
    if parts[0] == "files" and len(parts) == 3:
        return ("files", parts[1], parts[2])
    raise SadfError(f"bad --split spec {spec!r}; use head:N:M, random:F[:SEED] or files:TR:TE")


def _parse_hyper(pairs: list[str]) -> dict:
    hyper = {}
    for pair in pairs:
        if "=" not in pair:
            raise SadfError(f"--hyper expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        value: object
        lowered = raw.strip().lower()
        if lowered in ("none", "null"):
            value = None
        elif lowered in ("true", "false"):
            value = lowered == "true"
        else:
            try:
                value = int(raw)
            except ValueError:
                try:
                    value = float(raw)
                except ValueError:
                    value = raw
        hyper[key.strip()] = value
    return hyper


def _append_metrics(path: str | Path, row: list[str]) -> None:
    path = Path(path)
    new_file = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(METRICS_HEADER)
        writer.writerow(row)


def cmd_schema(args) -> int:
    schema = load_schema(args.dataset)
    writer = csv.writer(sys.stdout)
    for row in schema_table(schema):
        writer.writerow(row)
    return 0


def cmd_split(args) -> int:
    schema = load_schema(args.dataset)
    records = list(parse_csv(args.input, schema))
    partitions = split_by_time(records, args.slot, schema)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for part in partitions:
        name = f"slot_{int(part.slot_start)}.csv"
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            for record in part.records:
                writer.writerow(record.to_cells(schema))
    print(f"wrote {len(partitions)} time-slot files to {out_dir}")
    return 0


def _build_run_config(args, extra: dict) -> dict:
    snapshot = {
        "command": args.command,
        "seed": getattr(args, "seed", 0),
        "argv": [str(a) for a in sys.argv[1:]],
    }
    snapshot.update(extra)
    return snapshot


def cmd_train(args) -> int:
    schema = load_schema(args.dataset)
    options = cfg.parse_kv_file(args.config) if args.config else {}
    enc_config = cfg.encoder_config_from_options(options, schema, seed=args.seed)

    policy = _parse_split_spec(args.split, args.seed)
    if isinstance(policy, tuple):  # files:TRAIN:TEST
        train_rows = _read_rows(policy[1], schema)
        test_rows = _read_rows(policy[2], schema)
    else:
        rows = _read_rows(args.input, schema)
        train_rows, test_rows = split_sequence(rows, policy)
    if not train_rows:
        raise SadfError("no training rows after split")

    hyper = _parse_hyper(args.hyper or [])
    seed_param = _SEED_PARAM.get(args.model)
    if seed_param and seed_param not in hyper:
        hyper[seed_param] = args.seed

    encoder = FlowEncoder(schema=schema, config=enc_config).fit_rows(train_rows)
    X_train, y_train, _, rejected_train = encoder.transform_rows(train_rows)
    model = make_model(args.model, **hyper)
    started = time.perf_counter()
    model.fit(X_train, y_train)
    train_time = time.perf_counter() - started

    run_config = _build_run_config(args, {
        "dataset": args.dataset,
        "model": args.model,
        "hyperparameters": {k: v for k, v in hyper.items()},
        "encoder_policies": dict(enc_config.policies),
        "encoder_seed": enc_config.seed,
        "split": args.split,
        "input": str(args.input) if args.input else None,
    })
    save_model(model, args.out, run_config=run_config)
    save_encoder(encoder, args.encoder_out, run_config=run_config)

    summary = f"trained {args.model} on {len(y_train)} rows ({rejected_train} rejected)"
    if test_rows:
        X_test, y_test, _, rejected_test = encoder.transform_rows(test_rows)
        metrics = evaluate(model, X_test, y_test, train_time_s=train_time)
        if args.metrics:
            _append_metrics(args.metrics,
                            metrics_csv_row(args.model, len(y_train), len(y_test), metrics))
        summary += (f"; test accuracy {metrics.accuracy * 100:.2f}% "
                    f"on {len(y_test)} rows ({rejected_test} rejected), "
                    f"false alarm rate {metrics.false_alarm_rate:.4f}")
    print(summary)
    print(f"model -> {args.out}; encoder -> {args.encoder_out}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    encoder = load_encoder(args.encoder)
    rows = _read_rows(args.input, encoder.schema)
    X, y, _, rejected = encoder.transform_rows(rows)
    if len(y) == 0:
        raise SadfError(f"{args.input}: no usable rows")
    metrics = evaluate(model, X, y)
    model_id = type(model).__name__
    if args.metrics:
        _append_metrics(args.metrics, metrics_csv_row(model_id, 0, len(y), metrics))
    print(f"rows {len(y)} (rejected {rejected})")
    print(f"accuracy {metrics.accuracy * 100:.4f}%  false-alarm-rate {metrics.false_alarm_rate:.6f}")
    print(f"confusion tp={metrics.tp} tn={metrics.tn} fp={metrics.fp} fn={metrics.fn}")
    print(f"detection time {metrics.detection_time_s:.4f}s")
    return 0


def cmd_detect(args) -> int:
    model = load_model(args.model)
    encoder = load_encoder(args.encoder)
    run_id = new_run_id()
    if args.archive_dir:
        archive_input(args.input, args.archive_dir, run_id=run_id)

    sink = None
    tmp_alerts = None
    if args.alerts:
        tmp_alerts = Path(str(args.alerts) + ".tmp")
        tmp_alerts.unlink(missing_ok=True)
        sink = AlertSink(tmp_alerts, run_id=run_id)
    try:
        run = run_detection(
            model, encoder, args.input,
            chunk_size=args.chunk, workers=args.workers,
            alert_threshold=args.threshold, alert_sink=sink,
            annotate_path=args.annotate, run_id=run_id,
        )
        if run.config["rows"] == 0:
            raise SadfError(
                f"{args.input}: no usable rows "
                f"({run.rows_rejected} rejected); wrong dataset or malformed file?"
            )
    except BaseException:
        if tmp_alerts is not None:
            tmp_alerts.unlink(missing_ok=True)
        raise
    if tmp_alerts is not None:
        if not tmp_alerts.exists():
            tmp_alerts.touch()
        os.replace(tmp_alerts, args.alerts)

    tp, tn, fp, fn = run.confusion
    total = tp + tn + fp + fn
    timings = run.timings
    print(f"run {run.run_id}: {run.config['rows']} rows "
          f"({run.rows_rejected} rejected), {len(run.reports)} chunks, "
          f"{run.alert_count} alerts")
    if total:
        accuracy = (tp + tn) / total
        far = fp / (fp + tn) if (fp + tn) else 0.0
        print(f"accuracy {accuracy * 100:.4f}%  false-alarm-rate {far:.6f}  "
              f"(tp={tp} tn={tn} fp={fp} fn={fn})")
    print(f"timings: load {timings.load_distribute_s:.4f}s, "
          f"preprocess {timings.preprocess_s:.4f}s, "
          f"detect {timings.detect_s:.4f}s, total {timings.total_s:.4f}s")
    return 0


def cmd_bench(args) -> int:
    options = cfg.parse_kv_file(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = options.get("bench.dataset", "unsw_nb15")
    schema = load_schema(dataset)
    seed = int(options.get("seed", 0))

    source = Path(options["bench.source"])
    if not source.exists() and "bench.generate" in options:
        rows = int(options["bench.generate"])
        fraction = float(options.get("bench.attack_fraction", "0.3"))
        source.parent.mkdir(parents=True, exist_ok=True)
        write_synthetic_csv(source, rows, attack_fraction=fraction, seed=seed)
        print(f"generated synthetic source {source} ({rows} rows)")

    counts = cfg.parse_int_list(options["bench.counts"])
    models = cfg.parse_str_list(options.get("bench.models", "dt,rf,nb,svm"))
    unknown = [m for m in models if m not in MODEL_REGISTRY]
    if unknown:
        raise SadfError(f"bench.models contains unknown ids {unknown}")
    chunk_sizes = cfg.parse_int_list(options.get("bench.chunk_size", "300"))
    workers = int(options.get("bench.workers", "1"))
    repetitions = int(options.get("bench.repetitions", "3"))
    train_rows_wanted = int(options.get("bench.train_rows", "50000"))

    ladder = make_ladder(source, counts, out_dir / "ladder", schema)

    all_rows = _read_rows(source, schema)
    train_slice = all_rows[:train_rows_wanted]
    if not train_slice:
        raise SadfError("bench source has no rows to train on")
    enc_config = cfg.encoder_config_from_options(options, schema, seed=seed)
    encoder = FlowEncoder(schema=schema, config=enc_config).fit_rows(train_slice)
    X_train, y_train, _, _ = encoder.transform_rows(train_slice)

    artifacts = {}
    for model_id in models:
        hyper = {}
        seed_param = _SEED_PARAM.get(model_id)
        if seed_param:
            hyper[seed_param] = seed
        model = make_model(model_id, **hyper)
        model.fit(X_train, y_train)
        artifacts[model_id] = (model, encoder)
        print(f"trained {model_id} on {len(y_train)} rows")

    cases = [
        BenchCase(model_id=model_id, input_path=str(path), record_count=count,
                  chunk_size=chunk, workers=workers, repetitions=repetitions)
        for model_id in models
        for count, path in zip(counts, ladder)
        for chunk in chunk_sizes
    ]
    rows, failures = run_bench(cases, artifacts)
    if not rows:
        raise SadfError(f"every bench case failed: {[f['error'] for f in failures]}")
    emit_tables(rows, out_dir, meta_extra={
        "config": options, "failures": failures, "seed": seed,
        "repetitions": repetitions,
    })
    print(f"wrote {len(rows)} bench rows ({len(failures)} failed cases) to {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sadf",
        description="Flow-record anomaly detection: train, stream-detect, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schema", help="dump a dataset schema as CSV rows")
    p.add_argument("dataset", choices=SUPPORTED_DATASETS)
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("split", help="split a CSV into time-slot files")
    p.add_argument("--dataset", choices=SUPPORTED_DATASETS, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--slot", type=float, required=True, help="slot length in seconds")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="fit an encoder and a classifier")
    p.add_argument("--dataset", choices=SUPPORTED_DATASETS, required=True)
    p.add_argument("--model", choices=sorted(MODEL_REGISTRY), required=True)
    p.add_argument("--input", help="raw CSV (unused with --split files:..)")
    p.add_argument("--split", default="random:0.7",
                   help="head:N:M | random:F[:SEED] | files:TRAIN:TEST")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--encoder-out", required=True, help="encoder file")
    p.add_argument("--metrics", help="append a metrics CSV row here")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hyper", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a labeled CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--encoder", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--metrics")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("detect", help="chunked near-real-time detection over a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--encoder", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--chunk", type=int, default=300)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--alerts", help="alert log path")
    p.add_argument("--annotate", help="write input rows with a predicted column")
    p.add_argument("--archive-dir", help="archive the input under a run-id directory")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("bench", help="run the timing/throughput benchmark matrix")
    p.add_argument("--config", required=True, help="key=value bench config")
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SadfError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
