"""Synthetic flow-record generator shaped like the 49-column schema.

Produces deterministic, learnable traffic: attack rows draw from shifted
distributions (TTL values, byte counts, connection counts, protocol mix) so
trained classifiers separate the classes well above the base rate. Useful
for benchmarks and tests where the real datasets cannot be shipped.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

DEFAULT_START_TIME = 1_421_927_400  # arbitrary epoch anchor
FLOWS_PER_SECOND = 100

ATTACK_CATEGORIES = ("DoS", "Exploits", "Fuzzers", "Generic", "Reconnaissance")


def generate_flows(
    n: int,
    attack_fraction: float = 0.3,
    seed: int = 0,
    start_time: int = DEFAULT_START_TIME,
    label_noise: float = 0.0,
) -> pd.DataFrame:
    """Build n synthetic UNSW-shaped flow rows (no header, schema order).

    ``label_noise`` flips that fraction of labels after the feature draw so
    classifiers cannot reach perfect accuracy.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    attack = rng.random(n) < attack_fraction

    def pick(choices, p=None):
        return rng.choice(np.asarray(choices, dtype=object), size=n, p=p)

    def blend(normal_values, attack_values):
        return np.where(attack, attack_values, normal_values)

    srcip = np.where(
        attack,
        np.char.add("175.45.176.", rng.integers(0, 4, n).astype(str)),
        np.char.add("149.171.126.", rng.integers(0, 50, n).astype(str)),
    )
    dstip = np.char.add("59.166.0.", rng.integers(0, 10, n).astype(str))
    sport = rng.integers(1024, 65536, n)
    dsport = blend(pick([80, 443, 53, 25, 21, 6881], p=[0.35, 0.2, 0.2, 0.1, 0.05, 0.1]),
                   pick([80, 53, 179, 111], p=[0.55, 0.25, 0.1, 0.1]))
    proto = blend(pick(["tcp", "udp", "arp", "ospf"], p=[0.6, 0.3, 0.05, 0.05]),
                  pick(["tcp", "udp"], p=[0.9, 0.1]))
    state = blend(pick(["FIN", "CON", "REQ"], p=[0.7, 0.2, 0.1]),
                  pick(["INT", "FIN", "CON"], p=[0.6, 0.3, 0.1]))
    dur = blend(rng.exponential(0.6, n), rng.exponential(0.03, n)) + 1e-4
    sbytes = blend(rng.lognormal(6.0, 1.0, n), rng.lognormal(8.2, 0.6, n)).astype(np.int64) + 46
    dbytes = blend(rng.lognormal(7.0, 1.2, n), rng.lognormal(3.2, 1.0, n)).astype(np.int64)
    sttl = blend(pick([31, 62, 63], p=[0.5, 0.3, 0.2]), pick([254, 255], p=[0.8, 0.2]))
    dttl = blend(pick([29, 60, 63], p=[0.5, 0.3, 0.2]), pick([252, 0], p=[0.7, 0.3]))
    sloss = rng.integers(0, 4, n)
    dloss = rng.integers(0, 4, n)
    service = blend(pick(["-", "http", "dns", "smtp", "ftp"], p=[0.4, 0.3, 0.15, 0.1, 0.05]),
                    pick(["-", "http", "dns"], p=[0.6, 0.25, 0.15]))
    sload = sbytes * 8.0 / dur * rng.uniform(0.8, 1.2, n)
    dload = dbytes * 8.0 / dur * rng.uniform(0.8, 1.2, n)
    spkts = np.maximum(1, (sbytes / rng.integers(60, 1400, n)).astype(np.int64))
    dpkts = np.maximum(0, (dbytes / rng.integers(60, 1400, n)).astype(np.int64))
    swin = pick([255, 0], p=[0.9, 0.1])
    dwin = pick([255, 0], p=[0.85, 0.15])
    stcpb = rng.integers(0, 2**31, n)
    dtcpb = rng.integers(0, 2**31, n)
    smeansz = (sbytes / spkts).round(2)
    dmeansz = np.where(dpkts > 0, dbytes / np.maximum(dpkts, 1), 0.0).round(2)
    trans_depth = rng.integers(0, 2, n)
    res_bdy_len = np.where(rng.random(n) < 0.2, rng.integers(0, 5000, n), 0)
    sjit = rng.exponential(30.0, n).round(4)
    djit = rng.exponential(25.0, n).round(4)
    stime = start_time + np.arange(n) // FLOWS_PER_SECOND
    ltime = stime + np.ceil(dur).astype(np.int64)
    sintpkt = rng.exponential(5.0, n).round(4)
    dintpkt = rng.exponential(5.0, n).round(4)
    tcprtt = rng.exponential(0.05, n).round(6)
    synack = (tcprtt * rng.uniform(0.3, 0.7, n)).round(6)
    ackdat = (tcprtt - synack).round(6)
    is_sm_ips_ports = (rng.random(n) < 0.002).astype(np.int64)
    ct_state_ttl = blend(rng.integers(0, 3, n), rng.integers(2, 6, n))
    ct_flw_http_mthd = rng.integers(0, 3, n)
    is_ftp_login = (rng.random(n) < 0.03).astype(np.int64)
    ct_ftp_cmd = np.where(is_ftp_login == 1, rng.integers(1, 4, n), 0)
    ct_srv_src = blend(rng.integers(1, 8, n), rng.integers(15, 60, n))
    ct_srv_dst = blend(rng.integers(1, 8, n), rng.integers(15, 60, n))
    ct_dst_ltm = blend(rng.integers(1, 6, n), rng.integers(10, 45, n))
    ct_src_ltm = blend(rng.integers(1, 6, n), rng.integers(10, 45, n))
    ct_src_dport_ltm = blend(rng.integers(1, 5, n), rng.integers(8, 40, n))
    ct_dst_sport_ltm = blend(rng.integers(1, 5, n), rng.integers(8, 40, n))
    ct_dst_src_ltm = blend(rng.integers(1, 6, n), rng.integers(10, 45, n))
    attack_cat = np.where(attack, pick(ATTACK_CATEGORIES), "")
    label = attack.astype(np.int64)
    if label_noise > 0.0:
        flip = rng.random(n) < label_noise
        label = np.where(flip, 1 - label, label)

    frame = pd.DataFrame(
        {
            "srcip": srcip, "sport": sport, "dstip": dstip, "dsport": dsport,
            "proto": proto, "state": state, "dur": dur.round(6), "sbytes": sbytes,
            "dbytes": dbytes, "sttl": sttl, "dttl": dttl, "sloss": sloss,
            "dloss": dloss, "service": service, "sload": sload.round(4),
            "dload": dload.round(4), "spkts": spkts, "dpkts": dpkts,
            "swin": swin, "dwin": dwin, "stcpb": stcpb, "dtcpb": dtcpb,
            "smeansz": smeansz, "dmeansz": dmeansz, "trans_depth": trans_depth,
            "res_bdy_len": res_bdy_len, "sjit": sjit, "djit": djit,
            "stime": stime, "ltime": ltime, "sintpkt": sintpkt,
            "dintpkt": dintpkt, "tcprtt": tcprtt, "synack": synack,
            "ackdat": ackdat, "is_sm_ips_ports": is_sm_ips_ports,
            "ct_state_ttl": ct_state_ttl, "ct_flw_http_mthd": ct_flw_http_mthd,
            "is_ftp_login": is_ftp_login, "ct_ftp_cmd": ct_ftp_cmd,
            "ct_srv_src": ct_srv_src, "ct_srv_dst": ct_srv_dst,
            "ct_dst_ltm": ct_dst_ltm, "ct_src_ltm": ct_src_ltm,
            "ct_src_dport_ltm": ct_src_dport_ltm,
            "ct_dst_sport_ltm": ct_dst_sport_ltm,
            "ct_dst_src_ltm": ct_dst_src_ltm,
            "attack_cat": attack_cat, "label": label,
        }
    )
    return frame


def write_synthetic_csv(
    path: str | Path,
    n: int,
    attack_fraction: float = 0.3,
    seed: int = 0,
    start_time: int = DEFAULT_START_TIME,
    label_noise: float = 0.0,
) -> Path:
    """Write n synthetic rows as a headerless CSV; returns the path."""
    frame = generate_flows(n, attack_fraction=attack_fraction, seed=seed,
                           start_time=start_time, label_noise=label_noise)
    path = Path(path)
    frame.to_csv(path, header=False, index=False)
    return path
