import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sadf.errors import (
    InsufficientRowsError,
    NoTimeFeatureError,
    UnparsableNumericError,
    WrongColumnCountError,
)
from sadf.schema import (
    FlowRecord,
    HeadCounts,
    OfficialFiles,
    RandomSplit,
    load_schema,
    parse_csv,
    parse_row,
    schema_table,
    select_rows,
    split_by_time,
    split_sequence,
)

from .conftest import rows_to_csv, unsw_row, write_rows

# Canonical public KDD Cup 99 header, spelled out independently so the
# schema is checked column by column against a second source.
KDD_CANONICAL = [
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins",
    "logged_in", "num_compromised", "root_shell", "su_attempted", "num_root",
    "num_file_creations", "num_shells", "num_access_files",
    "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate",
    "srv_rerror_rate", "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate",
    "dst_host_count", "dst_host_srv_count", "dst_host_same_srv_rate",
    "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
    "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate",
    "dst_host_srv_rerror_rate", "label",
]


class TestLoadSchema:
    def test_unsw_has_49_features_with_expected_endpoints(self, unsw_schema):
        assert len(unsw_schema) == 49
        assert unsw_schema.features[0].name == "srcip"
        assert unsw_schema.features[48].name == "label"
        assert unsw_schema.features[48].group == "labelled"

    def test_unsw_proto_is_fifth_and_categorical(self, unsw_schema):
        proto = unsw_schema.features[4]
        assert proto.name == "proto"
        assert proto.kind == "categorical"

    def test_unsw_stime_is_ordinal_29(self, unsw_schema):
        assert unsw_schema.features[28].name == "stime"
        assert unsw_schema.time_index == 28

    def test_kdd_matches_canonical_header(self, kdd_schema):
        assert len(kdd_schema) == 42
        assert list(kdd_schema.names) == KDD_CANONICAL

    def test_ordinals_contiguous(self, unsw_schema, kdd_schema):
        for schema in (unsw_schema, kdd_schema):
            assert [f.ordinal for f in schema.features] == list(range(1, len(schema) + 1))

    def test_referential_transparency(self):
        assert load_schema("unsw_nb15") == load_schema("unsw_nb15")
        assert load_schema("kdd99") == load_schema("kdd99")

    def test_unknown_dataset_rejected(self):
        with pytest.raises(ValueError):
            load_schema("darpa98")

    def test_schema_table_shape(self, unsw_schema):
        table = schema_table(unsw_schema)
        assert len(table) == 49
        assert table[0] == (1, "srcip", "flow", "categorical")


class TestLabelMapping:
    def test_unsw_binary_labels(self, unsw_schema):
        assert unsw_schema.label_to_binary("0") == 0
        assert unsw_schema.label_to_binary("1") == 1

    def test_kdd_normal_vs_attack(self, kdd_schema):
        assert kdd_schema.label_to_binary("normal.") == 0
        assert kdd_schema.label_to_binary("normal") == 0
        assert kdd_schema.label_to_binary("neptune.") == 1
        assert kdd_schema.label_to_binary("smurf") == 1

    def test_out_of_range_label_rejected(self, unsw_schema):
        with pytest.raises(ValueError):
            unsw_schema.label_to_binary("2")


class TestParseCsv:
    def test_well_formed_rows(self, tmp_path, unsw_schema):
        path = write_rows(tmp_path / "flows.csv", [unsw_row() for _ in range(3)])
        stream = parse_csv(path, unsw_schema)
        records = list(stream)
        assert len(records) == 3
        assert stream.summary.rows_ok == 3
        assert stream.summary.rows_rejected == 0

    def test_short_row_skipped_lenient(self, tmp_path, unsw_schema):
        rows = [unsw_row(), unsw_row()[:-1], unsw_row()]
        path = write_rows(tmp_path / "flows.csv", rows)
        stream = parse_csv(path, unsw_schema)
        records = list(stream)
        assert len(records) == 2
        assert stream.summary.rows_rejected == 1
        assert "48" in stream.summary.errors[0]

    def test_short_row_fatal_strict(self, tmp_path, unsw_schema):
        path = write_rows(tmp_path / "flows.csv", [unsw_row()[:-1]])
        with pytest.raises(WrongColumnCountError):
            list(parse_csv(path, unsw_schema, strict=True))

    def test_unparsable_numeric_skipped_and_counted(self, tmp_path, unsw_schema):
        rows = [unsw_row(), unsw_row(sbytes="not-a-number")]
        path = write_rows(tmp_path / "flows.csv", rows)
        stream = parse_csv(path, unsw_schema)
        assert len(list(stream)) == 1
        assert stream.summary.rows_rejected == 1

    def test_unparsable_numeric_strict(self, tmp_path, unsw_schema):
        path = write_rows(tmp_path / "flows.csv", [unsw_row(dur="oops")])
        with pytest.raises(UnparsableNumericError):
            list(parse_csv(path, unsw_schema, strict=True))

    def test_header_autodetected(self, tmp_path, unsw_schema):
        rows = [list(unsw_schema.names), unsw_row(), unsw_row()]
        path = write_rows(tmp_path / "flows.csv", rows)
        stream = parse_csv(path, unsw_schema)
        assert len(list(stream)) == 2

    def test_header_detection_is_case_insensitive(self, tmp_path, unsw_schema):
        header = [name.upper() for name in unsw_schema.names]
        path = write_rows(tmp_path / "flows.csv", [header, unsw_row()])
        assert len(list(parse_csv(path, unsw_schema))) == 1

    def test_accounting_adds_up(self, tmp_path, unsw_schema):
        rows = [unsw_row() for _ in range(5)] + [unsw_row()[:10] for _ in range(2)]
        path = write_rows(tmp_path / "flows.csv", rows)
        stream = parse_csv(path, unsw_schema)
        ok = len(list(stream))
        assert ok + stream.summary.rows_rejected == 7

    def test_missing_numeric_cell_flagged_not_fatal(self, unsw_schema):
        record = parse_row(unsw_row(dur=""), unsw_schema)
        assert record.values[unsw_schema.index_of("dur")] is None

    def test_stime_extracted(self, unsw_schema):
        record = parse_row(unsw_row(stime="1234.5"), unsw_schema)
        assert record.stime == 1234.5

    def test_kdd_rows_have_no_stime(self, kdd_schema):
        cells = ["0", "tcp", "http", "SF"] + ["0"] * 37 + ["normal."]
        record = parse_row(cells, kdd_schema)
        assert record.stime is None


class TestRoundTrip:
    @pytest.mark.parametrize("overrides", [
        {},
        {"dur": "", "sbytes": "1e3"},
        {"proto": "udp", "attack_cat": "DoS", "label": "1"},
        {"sload": "12345.678901", "stime": "1421927414"},
    ])
    def test_cells_round_trip(self, unsw_schema, overrides):
        record = parse_row(unsw_row(**overrides), unsw_schema)
        again = parse_row(record.to_cells(unsw_schema), unsw_schema)
        assert again == record


def _records_at(unsw_schema, times):
    return [parse_row(unsw_row(stime=t), unsw_schema) for t in times]


class TestSplitByTime:
    def test_boundaries_aligned(self, unsw_schema):
        records = _records_at(unsw_schema, [1, 5, 11])
        parts = split_by_time(records, 10, unsw_schema)
        assert [(p.slot_start, len(p.records)) for p in parts] == [(0.0, 2), (10.0, 1)]

    def test_single_timestamp_single_partition(self, unsw_schema):
        records = _records_at(unsw_schema, [42] * 5)
        parts = split_by_time(records, 10, unsw_schema)
        assert len(parts) == 1
        assert parts[0].slot_start == 40.0

    def test_hour_trace_matches_bruteforce_regroup(self, unsw_schema):
        rng = np.random.default_rng(7)
        times = rng.uniform(0, 3600, size=500)
        records = _records_at(unsw_schema, times)
        parts = split_by_time(records, 10, unsw_schema)
        assert len(parts) <= 360

        # independent regroup: dict of floor(t/10)*10 buckets
        expected: dict[float, list] = {}
        for record in records:
            key = float(np.floor(record.stime / 10) * 10)
            expected.setdefault(key, []).append(record)
        assert sorted(expected) == [p.slot_start for p in parts]
        for part in parts:
            assert part.records == expected[part.slot_start]

        flattened = [r for p in parts for r in p.records]
        assert sorted(r.stime for r in flattened) == sorted(r.stime for r in records)
        assert len(flattened) == len(records)

    def test_every_record_in_its_slot(self, unsw_schema):
        records = _records_at(unsw_schema, [3, 19.99, 20.0, 100])
        for part in split_by_time(records, 10, unsw_schema):
            for record in part.records:
                assert part.slot_start <= record.stime < part.slot_start + part.slot_length

    def test_requires_positive_slot(self, unsw_schema):
        with pytest.raises(ValueError):
            split_by_time([], 0, unsw_schema)

    def test_requires_time_feature(self, kdd_schema):
        with pytest.raises(NoTimeFeatureError):
            split_by_time([], 10, kdd_schema)


class TestSelectRows:
    def test_head_counts_takes_first_then_next(self, unsw_schema):
        records = _records_at(unsw_schema, range(10))
        train, test = select_rows(records, HeadCounts(6, 3))
        assert [r.stime for r in train] == [0, 1, 2, 3, 4, 5]
        assert [r.stime for r in test] == [6, 7, 8]

    def test_head_counts_insufficient(self, unsw_schema):
        records = _records_at(unsw_schema, range(5))
        with pytest.raises(InsufficientRowsError):
            select_rows(records, HeadCounts(4, 2))

    def test_random_split_deterministic_7_3(self, unsw_schema):
        records = _records_at(unsw_schema, range(10))
        first = select_rows(records, RandomSplit(0.7, seed=1))
        second = select_rows(records, RandomSplit(0.7, seed=1))
        assert len(first[0]) == 7 and len(first[1]) == 3
        assert [r.stime for r in first[0]] == [r.stime for r in second[0]]
        assert [r.stime for r in first[1]] == [r.stime for r in second[1]]

    def test_random_split_disjoint_and_complete(self, unsw_schema):
        records = _records_at(unsw_schema, range(20))
        train, test = select_rows(records, RandomSplit(0.45, seed=9))
        seen = sorted(r.stime for r in train) + sorted(r.stime for r in test)
        assert sorted(seen) == list(range(20))

    def test_official_files(self, tmp_path, unsw_schema):
        train_path = write_rows(tmp_path / "train.csv", [unsw_row() for _ in range(3)])
        test_path = write_rows(tmp_path / "test.csv", [unsw_row() for _ in range(2)])
        train, test = select_rows(
            [], OfficialFiles(str(train_path), str(test_path)), schema=unsw_schema
        )
        assert (len(train), len(test)) == (3, 2)

    def test_official_files_needs_schema(self):
        with pytest.raises(ValueError):
            select_rows([], OfficialFiles("a", "b"))


@settings(max_examples=30, deadline=None)
@given(
    n=st.integers(min_value=0, max_value=40),
    n_train=st.integers(min_value=0, max_value=40),
    n_test=st.integers(min_value=0, max_value=40),
)
def test_split_sequence_head_counts_property(n, n_train, n_test):
    items = list(range(n))
    if n_train + n_test > n:
        with pytest.raises(InsufficientRowsError):
            split_sequence(items, HeadCounts(n_train, n_test))
    else:
        train, test = split_sequence(items, HeadCounts(n_train, n_test))
        assert train == items[:n_train]
        assert test == items[n_train:n_train + n_test]
        assert not set(train) & set(test)
