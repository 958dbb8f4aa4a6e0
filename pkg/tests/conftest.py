import csv
import io

import numpy as np
import pytest

from sadf.encoding import FlowEncoder, default_config, select_features
from sadf.schema import load_schema
from sadf.synthetic import write_synthetic_csv

# Baseline cells for one well-formed UNSW-style row, keyed by feature name.
_BASE_ROW = {
    "srcip": "10.0.0.1", "sport": "1234", "dstip": "10.0.0.2", "dsport": "80",
    "proto": "tcp", "state": "FIN", "dur": "0.5", "sbytes": "100",
    "dbytes": "200", "sttl": "62", "dttl": "60", "sloss": "0", "dloss": "0",
    "service": "http", "sload": "1600.0", "dload": "3200.0", "spkts": "2",
    "dpkts": "2", "swin": "255", "dwin": "255", "stcpb": "100",
    "dtcpb": "200", "smeansz": "50.0", "dmeansz": "100.0", "trans_depth": "0",
    "res_bdy_len": "0", "sjit": "0.1", "djit": "0.1", "stime": "1000",
    "ltime": "1001", "sintpkt": "1.0", "dintpkt": "1.0", "tcprtt": "0.05",
    "synack": "0.02", "ackdat": "0.03", "is_sm_ips_ports": "0",
    "ct_state_ttl": "1", "ct_flw_http_mthd": "0", "is_ftp_login": "0",
    "ct_ftp_cmd": "0", "ct_srv_src": "1", "ct_srv_dst": "1",
    "ct_dst_ltm": "1", "ct_src_ltm": "1", "ct_src_dport_ltm": "1",
    "ct_dst_sport_ltm": "1", "ct_dst_src_ltm": "1",
    "attack_cat": "", "label": "0",
}


@pytest.fixture(scope="session")
def unsw_schema():
    return load_schema("unsw_nb15")


@pytest.fixture(scope="session")
def kdd_schema():
    return load_schema("kdd99")


def unsw_row(**overrides) -> list[str]:
    """One UNSW CSV row as cells, with named overrides."""
    cells = dict(_BASE_ROW)
    for key, value in overrides.items():
        if key not in cells:
            raise KeyError(key)
        cells[key] = str(value)
    return list(cells.values())


def rows_to_csv(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerows(rows)
    return buffer.getvalue()


def write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh).writerows(rows)
    return path


# Encoder profile used across tests: identifiers and raw timestamps dropped,
# which keeps the dimension small and avoids time-as-feature leakage.
TEST_DROPS = ["srcip", "dstip", "sport", "dsport", "stime", "ltime"]


def compact_config(schema, seed=0):
    return select_features(default_config(schema, seed=seed), TEST_DROPS)


@pytest.fixture(scope="session")
def medium_corpus(tmp_path_factory, unsw_schema):
    """A 12K-row synthetic CSV with a fitted encoder and encoded matrices."""
    directory = tmp_path_factory.mktemp("corpus")
    path = write_synthetic_csv(directory / "flows.csv", 12_000, seed=11,
                               label_noise=0.04)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    encoder = FlowEncoder(unsw_schema, compact_config(unsw_schema))
    encoder.fit_rows(rows[:8000])
    X_train, y_train, _, _ = encoder.transform_rows(rows[:8000])
    X_test, y_test, _, _ = encoder.transform_rows(rows[8000:])
    return {
        "path": path, "rows": rows, "encoder": encoder,
        "X_train": X_train, "y_train": y_train,
        "X_test": X_test, "y_test": y_test,
    }


@pytest.fixture(scope="session")
def trained_dt(medium_corpus):
    from sadf.models import DecisionTree

    return DecisionTree().fit(medium_corpus["X_train"], medium_corpus["y_train"])


def two_blob_data(n_per_class: int, dim: int, separation: float, seed: int):
    """Two Gaussian blobs; separation in units of sigma=1."""
    rng = np.random.default_rng(seed)
    x0 = rng.normal(0.0, 1.0, size=(n_per_class, dim))
    x1 = rng.normal(separation, 1.0, size=(n_per_class, dim))
    X = np.vstack([x0, x1])
    y = np.concatenate([np.zeros(n_per_class, dtype=np.int64),
                        np.ones(n_per_class, dtype=np.int64)])
    order = rng.permutation(len(y))
    return X[order], y[order]
