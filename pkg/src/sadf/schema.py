"""Dataset schemas and CSV flow-record ingestion.

A :class:`DatasetSchema` is an ordered, typed description of a flow dataset's
columns. Two schemas ship with the package: the 49-column UNSW-NB15 raw CSV
layout and the canonical 42-column KDD Cup 99 layout (41 features + label).
Records parsed against a schema can be split into time slots and selected
into train/test sets.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    InsufficientRowsError,
    MissingValueError,
    NoTimeFeatureError,
    ParseError,
    UnparsableNumericError,
    WrongColumnCountError,
)

GROUPS = frozenset({"flow", "basic", "content", "time", "additional", "labelled"})
KINDS = frozenset({"numeric", "categorical", "binary"})

LABEL_NAME = "label"
ATTACK_CATEGORY_NAME = "attack_cat"


@dataclass(frozen=True)
class FeatureSpec:
    """One column of a flow dataset: 1-based ordinal, group and value kind."""

    name: str
    ordinal: int
    group: str
    kind: str

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"unknown feature group {self.group!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown feature kind {self.kind!r}")


@dataclass(frozen=True)
class DatasetSchema:
    """Ordered feature list for a supported dataset."""

    dataset_id: str
    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        ordinals = [f.ordinal for f in self.features]
        if ordinals != list(range(1, len(self.features) + 1)):
            raise ValueError("feature ordinals must be contiguous from 1")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names")
        labels = [f for f in self.features if f.group == "labelled" and f.name == LABEL_NAME]
        if len(labels) != 1:
            raise ValueError("schema must have exactly one labelled feature named 'label'")
        if sum(1 for f in self.features if f.name == ATTACK_CATEGORY_NAME) > 1:
            raise ValueError("at most one attack-category feature allowed")

    def __len__(self) -> int:
        return len(self.features)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def index_of(self, name: str) -> int:
        """0-based column index of a feature name."""
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    @property
    def label_index(self) -> int:
        return self.index_of(LABEL_NAME)

    @property
    def attack_category_index(self) -> int | None:
        try:
            return self.index_of(ATTACK_CATEGORY_NAME)
        except KeyError:
            return None

    @property
    def time_index(self) -> int | None:
        """Column index of the flow start-time feature, if the schema has one."""
        try:
            return self.index_of("stime")
        except KeyError:
            return None

    def label_to_binary(self, cell: str) -> int:
        """Map a raw label cell to 0 (normal) / 1 (attack).

        UNSW-NB15 labels are already 0/1 integers; KDD Cup 99 uses string
        labels where only ``normal`` (optionally with a trailing dot) maps
        to 0 and every attack name maps to 1.
        """
        text = cell.strip()
        if not text:
            raise MissingValueError("blank label cell")
        if self.dataset_id == "kdd99":
            return 0 if text.rstrip(".").lower() == "normal" else 1
        value = int(float(text))
        if value not in (0, 1):
            raise ValueError(f"binary label out of range: {cell!r}")
        return value


@dataclass
class FlowRecord:
    """One parsed flow row. Numeric cells are floats, missing cells are None."""

    __slots__ = ("values", "stime")

    values: tuple
    stime: float | None

    def to_cells(self, schema: DatasetSchema) -> list[str]:
        """Serialize back to CSV cells; reparsing yields an equal record."""
        cells = []
        for spec, value in zip(schema.features, self.values):
            if value is None:
                cells.append("")
            elif isinstance(value, float):
                cells.append(repr(value))
            else:
                cells.append(str(value))
        return cells


@dataclass
class RecordPartition:
    """Records whose start times fall in [slot_start, slot_start + slot_length)."""

    slot_start: float
    slot_length: float
    records: list[FlowRecord] = field(default_factory=list)


_UNSW_LAYOUT = [
    # (name, group, kind) in ordinal order; labelled columns close the table.
    ("srcip", "flow", "categorical"),
    ("sport", "flow", "categorical"),
    ("dstip", "flow", "categorical"),
    ("dsport", "flow", "categorical"),
    ("proto", "flow", "categorical"),
    ("state", "basic", "categorical"),
    ("dur", "basic", "numeric"),
    ("sbytes", "basic", "numeric"),
    ("dbytes", "basic", "numeric"),
    ("sttl", "basic", "numeric"),
    ("dttl", "basic", "numeric"),
    ("sloss", "basic", "numeric"),
    ("dloss", "basic", "numeric"),
    ("service", "basic", "categorical"),
    ("sload", "basic", "numeric"),
    ("dload", "basic", "numeric"),
    ("spkts", "basic", "numeric"),
    ("dpkts", "basic", "numeric"),
    ("swin", "content", "numeric"),
    ("dwin", "content", "numeric"),
    ("stcpb", "content", "numeric"),
    ("dtcpb", "content", "numeric"),
    ("smeansz", "content", "numeric"),
    ("dmeansz", "content", "numeric"),
    ("trans_depth", "content", "numeric"),
    ("res_bdy_len", "content", "numeric"),
    ("sjit", "time", "numeric"),
    ("djit", "time", "numeric"),
    ("stime", "time", "numeric"),
    ("ltime", "time", "numeric"),
    ("sintpkt", "time", "numeric"),
    ("dintpkt", "time", "numeric"),
    ("tcprtt", "time", "numeric"),
    ("synack", "time", "numeric"),
    ("ackdat", "time", "numeric"),
    ("is_sm_ips_ports", "time", "binary"),
    ("ct_state_ttl", "additional", "numeric"),
    ("ct_flw_http_mthd", "additional", "numeric"),
    ("is_ftp_login", "additional", "binary"),
    ("ct_ftp_cmd", "additional", "numeric"),
    ("ct_srv_src", "additional", "numeric"),
    ("ct_srv_dst", "additional", "numeric"),
    ("ct_dst_ltm", "additional", "numeric"),
    ("ct_src_ltm", "additional", "numeric"),
    ("ct_src_dport_ltm", "additional", "numeric"),
    ("ct_dst_sport_ltm", "additional", "numeric"),
    ("ct_dst_src_ltm", "additional", "numeric"),
    ("attack_cat", "labelled", "categorical"),
    ("label", "labelled", "binary"),
]

# Canonical public KDD Cup 99 column order: 41 features + string label.
_KDD_LAYOUT = [
    ("duration", "basic", "numeric"),
    ("protocol_type", "basic", "categorical"),
    ("service", "basic", "categorical"),
    ("flag", "basic", "categorical"),
    ("src_bytes", "basic", "numeric"),
    ("dst_bytes", "basic", "numeric"),
    ("land", "basic", "binary"),
    ("wrong_fragment", "basic", "numeric"),
    ("urgent", "basic", "numeric"),
    ("hot", "content", "numeric"),
    ("num_failed_logins", "content", "numeric"),
    ("logged_in", "content", "binary"),
    ("num_compromised", "content", "numeric"),
    ("root_shell", "content", "numeric"),
    ("su_attempted", "content", "numeric"),
    ("num_root", "content", "numeric"),
    ("num_file_creations", "content", "numeric"),
    ("num_shells", "content", "numeric"),
    ("num_access_files", "content", "numeric"),
    ("num_outbound_cmds", "content", "numeric"),
    ("is_host_login", "content", "binary"),
    ("is_guest_login", "content", "binary"),
    ("count", "time", "numeric"),
    ("srv_count", "time", "numeric"),
    ("serror_rate", "time", "numeric"),
    ("srv_serror_rate", "time", "numeric"),
    ("rerror_rate", "time", "numeric"),
    ("srv_rerror_rate", "time", "numeric"),
    ("same_srv_rate", "time", "numeric"),
    ("diff_srv_rate", "time", "numeric"),
    ("srv_diff_host_rate", "time", "numeric"),
    ("dst_host_count", "additional", "numeric"),
    ("dst_host_srv_count", "additional", "numeric"),
    ("dst_host_same_srv_rate", "additional", "numeric"),
    ("dst_host_diff_srv_rate", "additional", "numeric"),
    ("dst_host_same_src_port_rate", "additional", "numeric"),
    ("dst_host_srv_diff_host_rate", "additional", "numeric"),
    ("dst_host_serror_rate", "additional", "numeric"),
    ("dst_host_srv_serror_rate", "additional", "numeric"),
    ("dst_host_rerror_rate", "additional", "numeric"),
    ("dst_host_srv_rerror_rate", "additional", "numeric"),
    ("label", "labelled", "categorical"),
]

SUPPORTED_DATASETS = ("unsw_nb15", "kdd99")


def _build(dataset_id: str, layout: list[tuple[str, str, str]]) -> DatasetSchema:
    specs = tuple(
        FeatureSpec(name=name, ordinal=i + 1, group=group, kind=kind)
        for i, (name, group, kind) in enumerate(layout)
    )
    return DatasetSchema(dataset_id=dataset_id, features=specs)


def load_schema(dataset_id: str) -> DatasetSchema:
    """Return the fixed, validated schema for a supported dataset id."""
    if dataset_id == "unsw_nb15":
        return _build("unsw_nb15", _UNSW_LAYOUT)
    if dataset_id == "kdd99":
        return _build("kdd99", _KDD_LAYOUT)
    raise ValueError(f"unsupported dataset id {dataset_id!r}; expected one of {SUPPORTED_DATASETS}")


def parse_numeric_cell(cell: str) -> tuple[float | None, bool]:
    """Parse one numeric-kind cell.

    Returns (value, ok). A blank or non-finite cell is missing (None, True);
    an unparsable non-blank cell is an error (None, False).
    """
    text = cell.strip()
    if not text:
        return None, True
    try:
        value = float(text)
    except ValueError:
        return None, False
    if not np.isfinite(value):
        return None, True
    return value, True


@dataclass
class ParseSummary:
    """Accounting for one parse run: accepted and rejected row counts."""

    rows_ok: int = 0
    rows_rejected: int = 0
    errors: list[str] = field(default_factory=list)

    MAX_RECORDED_ERRORS = 100

    def record_error(self, err: ParseError) -> None:
        self.rows_rejected += 1
        if len(self.errors) < self.MAX_RECORDED_ERRORS:
            self.errors.append(str(err))


def is_header_row(cells: Sequence[str], schema: DatasetSchema) -> bool:
    """True if the row spells out the schema's feature names (case-insensitive)."""
    if len(cells) != len(schema):
        return False
    return all(c.strip().lower() == name for c, name in zip(cells, schema.names))


class RecordStream:
    """Iterator over parsed :class:`FlowRecord` values with a parse summary.

    The summary is complete once the stream is exhausted. Under the default
    lenient policy, malformed rows are counted and skipped; under strict
    policy the first malformed row raises.
    """

    def __init__(self, path: str | Path, schema: DatasetSchema, strict: bool = False):
        self.path = Path(path)
        self.schema = schema
        self.strict = strict
        self.summary = ParseSummary()

    def __iter__(self) -> Iterator[FlowRecord]:
        with open(self.path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            for line_no, cells in enumerate(reader, start=1):
                if line_no == 1 and is_header_row(cells, self.schema):
                    continue
                try:
                    record = parse_row(cells, self.schema, line_no=line_no)
                except ParseError as err:
                    if self.strict:
                        raise
                    self.summary.record_error(err)
                    continue
                self.summary.rows_ok += 1
                yield record


def parse_row(cells: Sequence[str], schema: DatasetSchema, line_no: int | None = None) -> FlowRecord:
    """Parse one CSV row into a FlowRecord, validating against the schema."""
    if len(cells) != len(schema):
        raise WrongColumnCountError(
            f"expected {len(schema)} cells, found {len(cells)}", line_no
        )
    values = []
    for spec, cell in zip(schema.features, cells):
        if spec.kind in ("numeric", "binary") and spec.group != "labelled":
            value, ok = parse_numeric_cell(cell)
            if not ok:
                raise UnparsableNumericError(
                    f"cannot parse {cell!r} in column {spec.name}", line_no, spec.name
                )
            values.append(value)
        else:
            values.append(cell.strip())
    time_idx = schema.time_index
    stime = values[time_idx] if time_idx is not None else None
    return FlowRecord(values=tuple(values), stime=stime)


def parse_csv(path: str | Path, schema: DatasetSchema, strict: bool = False) -> RecordStream:
    """Stream flow records from a CSV file in file order."""
    return RecordStream(path, schema, strict=strict)


def split_by_time(
    records: Iterable[FlowRecord], slot_seconds: float, schema: DatasetSchema
) -> list[RecordPartition]:
    """Partition records into time slots of ``slot_seconds``.

    Slot boundaries are aligned to floor(stime / slot_seconds) * slot_seconds;
    empty slots are omitted. Every input record lands in exactly one slot.
    """
    if slot_seconds <= 0:
        raise ValueError("slot_seconds must be positive")
    if schema.time_index is None:
        raise NoTimeFeatureError(f"schema {schema.dataset_id!r} has no start-time feature")
    partitions: dict[float, RecordPartition] = {}
    for record in records:
        if record.stime is None:
            raise MissingValueError("record has no start time; cannot assign a slot")
        slot_start = float(np.floor(record.stime / slot_seconds) * slot_seconds)
        part = partitions.get(slot_start)
        if part is None:
            part = RecordPartition(slot_start=slot_start, slot_length=slot_seconds)
            partitions[slot_start] = part
        part.records.append(record)
    return [partitions[k] for k in sorted(partitions)]


@dataclass(frozen=True)
class HeadCounts:
    """Take the first n_train rows, then the next n_test rows."""

    n_train: int
    n_test: int


@dataclass(frozen=True)
class RandomSplit:
    """Deterministic shuffled split: a fraction of rows go to train."""

    fraction: float
    seed: int


@dataclass(frozen=True)
class OfficialFiles:
    """Use two pre-split files parsed under the same schema."""

    train_path: str
    test_path: str


SelectionPolicy = HeadCounts | RandomSplit | OfficialFiles


def split_sequence(items: Sequence, policy: HeadCounts | RandomSplit) -> tuple[list, list]:
    """Split any sequence into disjoint (train, test) lists per the policy."""
    items = list(items)
    if isinstance(policy, HeadCounts):
        needed = policy.n_train + policy.n_test
        if needed > len(items):
            raise InsufficientRowsError(
                f"need {needed} rows ({policy.n_train} train + {policy.n_test} test), "
                f"have {len(items)}"
            )
        return items[: policy.n_train], items[policy.n_train : needed]
    if isinstance(policy, RandomSplit):
        if not 0.0 <= policy.fraction <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")
        order = np.random.default_rng(policy.seed).permutation(len(items))
        n_train = int(len(items) * policy.fraction)
        train = [items[i] for i in order[:n_train]]
        test = [items[i] for i in order[n_train:]]
        return train, test
    raise TypeError(f"unsupported selection policy: {policy!r}")


def select_rows(
    records: Iterable[FlowRecord],
    policy: SelectionPolicy,
    schema: DatasetSchema | None = None,
) -> tuple[list[FlowRecord], list[FlowRecord]]:
    """Split records into disjoint (train, test) lists per the policy."""
    if isinstance(policy, OfficialFiles):
        if schema is None:
            raise ValueError("official-files policy requires the schema")
        train = list(parse_csv(policy.train_path, schema))
        test = list(parse_csv(policy.test_path, schema))
        return train, test
    return split_sequence(list(records), policy)


def schema_table(schema: DatasetSchema) -> list[tuple[int, str, str, str]]:
    """Rows (ordinal, name, group, kind) for the schema-dump interface."""
    return [(f.ordinal, f.name, f.group, f.kind) for f in schema.features]
