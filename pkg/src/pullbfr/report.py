"""Run reports, the four comparison metrics, and CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

import numpy as np

from .engine import NS
from .workload import RttSample

__all__ = [
    "SimReport",
    "CSV_COLUMNS",
    "avg_rtt",
    "misrouting_fraction",
    "storage_metric",
    "to_csv",
    "write_csv",
]


@dataclass
class SimReport:
    """Everything measured in one simulation run.

    Byte and message counts are link-layer totals over the whole run
    (warm-up included).  RTT and storage exclude the warm-up period.
    """

    strategy: str
    seed: int
    car_bytes: int = 0
    ca_bytes: int = 0
    car_msgs: int = 0
    ca_msgs: int = 0
    interest_bytes: int = 0
    interest_msgs: int = 0
    data_bytes: int = 0
    data_msgs: int = 0
    nack_bytes: int = 0
    nack_msgs: int = 0
    link_total_bytes: int = 0
    link_total_msgs: int = 0
    dropped: int = 0
    rtt_samples: list[RttSample] = field(default_factory=list)
    storage_byte_seconds: dict[str, float] = field(default_factory=dict)
    nodes: int = 0
    measured_seconds: float = 0.0
    wrong_server_interests: int = 0
    server_interest_arrivals: int = 0
    total_interests: int = 0
    unsatisfied: int = 0
    demanded_files: int = 0
    cataloged_files: int = 0
    pending_remaining: int = 0
    floods: int = 0
    aggregates_created: int = 0
    cars_originated: int = 0
    cas_originated: int = 0
    cs_hits: int = 0
    events: int = 0
    delta_vacuous: bool = False
    config: dict = field(default_factory=dict)

    @property
    def advert_overhead_bytes(self) -> int:
        return self.car_bytes + self.ca_bytes

    def check_invariants(self) -> None:
        """Raise AssertionError if the report is internally inconsistent."""
        kinds = self.car_bytes + self.ca_bytes + self.interest_bytes + self.data_bytes + self.nack_bytes
        assert kinds == self.link_total_bytes, "per-kind bytes do not sum to link total"
        msgs = self.car_msgs + self.ca_msgs + self.interest_msgs + self.data_msgs + self.nack_msgs
        assert msgs == self.link_total_msgs, "per-kind messages do not sum to link total"
        assert self.wrong_server_interests <= self.server_interest_arrivals
        assert all(s.satisfy >= s.issue for s in self.rtt_samples)

    def to_json(self) -> str:
        d = asdict(self)
        d["rtt_samples"] = [[s.client, s.file, s.segment, s.issue, s.satisfy] for s in self.rtt_samples]
        d["advert_overhead_bytes"] = self.advert_overhead_bytes
        return json.dumps(d, sort_keys=True, indent=1)


def avg_rtt(report: SimReport) -> float:
    """Mean RTT in seconds over satisfied requests."""
    if not report.rtt_samples:
        raise ValueError("no satisfied requests")
    total = sum(s.satisfy - s.issue for s in report.rtt_samples)
    return total / len(report.rtt_samples) / NS


def misrouting_fraction(report: SimReport) -> float:
    """Percentage of Interests that reached a server not hosting the file."""
    if report.total_interests <= 0:
        raise ValueError("no Interests were sent")
    return 100.0 * report.wrong_server_interests / report.total_interests


def storage_metric(report: SimReport) -> tuple[float, float]:
    """(mean bytes held per node, the same divided by the number of advertised files).

    The per-file denominator is the number of distinct demanded files for
    pull-bfr and the catalogue size for push-bfr; it is 0 for FaR.
    """
    if report.nodes == 0 or report.measured_seconds <= 0:
        return 0.0, 0.0
    mean = sum(report.storage_byte_seconds.values()) / report.nodes / report.measured_seconds
    if report.strategy == "push-bfr":
        denom = report.cataloged_files
    elif report.strategy == "pull-bfr":
        denom = report.demanded_files
    else:
        denom = 0
    return mean, (mean / denom if denom else 0.0)


CSV_COLUMNS = (
    "index",
    "strategy",
    "seed",
    "repetition",
    "sweep_axis",
    "sweep_value",
    "alpha",
    "delta_ms",
    "f_r",
    "p",
    "capacity_scale",
    "universe_size",
    "oracle",
    "car_bytes",
    "ca_bytes",
    "advert_bytes",
    "car_msgs",
    "ca_msgs",
    "interest_bytes",
    "interest_msgs",
    "data_bytes",
    "data_msgs",
    "nack_bytes",
    "nack_msgs",
    "total_bytes",
    "total_msgs",
    "dropped",
    "rtt_count",
    "avg_rtt_s",
    "rtt_p50_s",
    "rtt_p95_s",
    "total_interests",
    "wrong_server_interests",
    "server_interest_arrivals",
    "misrouting_pct",
    "unsatisfied",
    "storage_mean_bytes",
    "storage_per_file_bytes",
    "demanded_files",
    "cataloged_files",
    "pending_remaining",
    "delta_vacuous",
)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def csv_row(report: SimReport, index: int = 0, repetition: int = 0, axis: Optional[str] = None, value=None) -> dict:
    cfg = report.config
    if report.rtt_samples:
        rtts = np.array([s.satisfy - s.issue for s in report.rtt_samples], dtype=np.int64)
        mean = avg_rtt(report)
        p50 = float(np.percentile(rtts, 50)) / NS
        p95 = float(np.percentile(rtts, 95)) / NS
    else:
        mean = p50 = p95 = 0.0
    mis = misrouting_fraction(report) if report.total_interests else 0.0
    st_mean, st_file = storage_metric(report)
    row = {
        "index": index,
        "strategy": report.strategy,
        "seed": report.seed,
        "repetition": repetition,
        "sweep_axis": axis or "",
        "sweep_value": "" if value is None else value,
        "alpha": cfg.get("workload", {}).get("alpha", 0.0),
        "delta_ms": cfg.get("pull", {}).get("delta_ms", 0.0),
        "f_r": cfg.get("push", {}).get("f_r", 0.0),
        "p": cfg.get("bloom", {}).get("p", 0.0),
        "capacity_scale": cfg.get("topology", {}).get("capacity_scale", 1.0),
        "universe_size": report.cataloged_files,
        "oracle": cfg.get("bloom", {}).get("oracle", False),
        "car_bytes": report.car_bytes,
        "ca_bytes": report.ca_bytes,
        "advert_bytes": report.advert_overhead_bytes,
        "car_msgs": report.car_msgs,
        "ca_msgs": report.ca_msgs,
        "interest_bytes": report.interest_bytes,
        "interest_msgs": report.interest_msgs,
        "data_bytes": report.data_bytes,
        "data_msgs": report.data_msgs,
        "nack_bytes": report.nack_bytes,
        "nack_msgs": report.nack_msgs,
        "total_bytes": report.link_total_bytes,
        "total_msgs": report.link_total_msgs,
        "dropped": report.dropped,
        "rtt_count": len(report.rtt_samples),
        "avg_rtt_s": mean,
        "rtt_p50_s": p50,
        "rtt_p95_s": p95,
        "total_interests": report.total_interests,
        "wrong_server_interests": report.wrong_server_interests,
        "server_interest_arrivals": report.server_interest_arrivals,
        "misrouting_pct": mis,
        "unsatisfied": report.unsatisfied,
        "storage_mean_bytes": st_mean,
        "storage_per_file_bytes": st_file,
        "demanded_files": report.demanded_files,
        "cataloged_files": report.cataloged_files,
        "pending_remaining": report.pending_remaining,
        "delta_vacuous": report.delta_vacuous,
    }
    return {k: _fmt(v) for k, v in row.items()}


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def write_csv(path, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(rows))
