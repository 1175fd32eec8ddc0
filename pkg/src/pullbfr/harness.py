"""Turn a :class:`~pullbfr.config.Config` into simulations and reports."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .bloom import BfParams, make_params
from .config import Config, with_axis
from .engine import Simulator, rng_stream, seconds, serialization_ns
from .names import names_from_urls
from .protocols import STRATEGIES, RunStats, StrategyParams
from .report import SimReport, csv_row, to_csv
from .tables import MsgKind
from .topology import (
    Catalog,
    Topology,
    TopologyError,
    bundled_topology_path,
    load_catalog,
    load_topology,
    synthetic_catalog,
)
from .workload import ClientApp, WorkloadParams, ZipfSampler

__all__ = [
    "bloom_params",
    "build_topology",
    "build_catalog",
    "run_simulation",
    "SweepPoint",
    "sweep_points",
    "run_sweep",
    "run_experiment",
]


def bloom_params(cfg: Config) -> BfParams:
    b = cfg.bloom
    seed = b.seed.encode()
    if b.m_bits is None:
        return make_params(b.n, b.p, seed)
    k = max(1, round(b.m_bits / b.n * math.log(2)))
    return BfParams(b.m_bits, k, seed, b.n)


def build_topology(cfg: Config) -> Topology:
    path = cfg.resolve(cfg.topology.path) or bundled_topology_path()
    return load_topology(path).scaled(cfg.topology.capacity_scale)


def build_catalog(cfg: Config, topo: Topology) -> Catalog:
    c = cfg.catalog
    if c.path is not None:
        cat = load_catalog(cfg.resolve(c.path), c.segments_per_file)
        unknown = sorted({s for hs in cat.hosts.values() for s in hs} - set(topo.servers))
        if unknown:
            raise TopologyError(f"catalog names hosts that are not servers: {', '.join(unknown)}")
        return cat
    names = None
    if c.url_list is not None:
        names = names_from_urls(cfg.resolve(c.url_list).read_text().splitlines())
    return synthetic_catalog(c.universe_size, topo.servers, c.segments_per_file, names)


def strategy_params(cfg: Config) -> StrategyParams:
    return StrategyParams(
        bf_params=bloom_params(cfg),
        oracle=cfg.bloom.oracle,
        interest_lifetime=seconds(cfg.ndn.interest_lifetime_s),
        cs_capacity=cfg.ndn.cs_capacity,
        delta=max(1, seconds(cfg.pull.delta_ms / 1000)),
        car_lifetime=seconds(cfg.pull.car_lifetime_s),
        ca_lifetime=seconds(cfg.pull.ca_lifetime_s),
        retry_cap=cfg.pull.retry_cap,
        f_r=cfg.push.f_r,
    )


def run_simulation(cfg: Config, seed: Optional[int] = None) -> SimReport:
    """Run one simulation and summarise it."""
    seed = cfg.seed if seed is None else seed
    topo = build_topology(cfg)
    catalog = build_catalog(cfg, topo)
    params = strategy_params(cfg)
    horizon = seconds(cfg.sim.duration_s)
    warmup_end = int(horizon * cfg.sim.warmup_fraction)
    sim = Simulator(topo, seed, cfg.sim.loss_rate)
    stats = RunStats(warmup_end=warmup_end, horizon=horizon)

    hosted: dict[str, list] = {s: [] for s in topo.servers}
    for f in catalog.files:
        for s in catalog.hosts[f]:
            hosted[s].append(f)
    cls = STRATEGIES[cfg.strategy]
    nodes = {}
    for node_id, role in topo.roles.items():
        nodes[node_id] = cls(sim, node_id, role, params, stats, hosted.get(node_id, ()))
    if cfg.strategy == "push-bfr":
        for n in nodes.values():
            n.start(horizon)

    wp = WorkloadParams(
        files_per_client=cfg.workload.files_per_client,
        think_time_ns=seconds(cfg.workload.think_time_s),
        window=cfg.workload.window,
        start_ns=warmup_end,
        interest_lifetime_ns=params.interest_lifetime,
        retry_cap=cfg.pull.retry_cap,
        arrivals=cfg.workload.arrivals,
    )
    base = ZipfSampler(len(catalog), cfg.workload.alpha, rng_stream(seed, "workload"), cfg.workload.zipf_shift)
    for i, cid in enumerate(topo.clients):
        rng = rng_stream(seed, "workload", i)
        app = ClientApp(sim, cid, nodes[cid], catalog, base.with_rng(rng), rng, wp, stats)
        app.start()

    sim.run(until=horizon)

    c = sim.counters
    min_ser = min((serialization_ns(params.advert_size, l.bandwidth_bps) for l in topo.links), default=0)
    report = SimReport(
        strategy=cfg.strategy,
        seed=seed,
        car_bytes=c.bytes[MsgKind.CAR],
        ca_bytes=c.bytes[MsgKind.CA],
        car_msgs=c.count[MsgKind.CAR],
        ca_msgs=c.count[MsgKind.CA],
        interest_bytes=c.bytes[MsgKind.INTEREST],
        interest_msgs=c.count[MsgKind.INTEREST],
        data_bytes=c.bytes[MsgKind.DATA],
        data_msgs=c.count[MsgKind.DATA],
        nack_bytes=c.bytes[MsgKind.NACK],
        nack_msgs=c.count[MsgKind.NACK],
        link_total_bytes=c.total_bytes,
        link_total_msgs=c.total_count,
        dropped=c.dropped,
        rtt_samples=sorted(
            (s for s in stats.rtt_samples if s.issue >= warmup_end),
            key=lambda s: (s.issue, s.client, s.segment),
        ),
        storage_byte_seconds={n: v / 1e9 for n, v in sorted(stats.storage_byte_ns.items())},
        nodes=len(topo.roles),
        measured_seconds=(horizon - warmup_end) / 1e9,
        wrong_server_interests=stats.wrong_server_interests,
        server_interest_arrivals=stats.server_interest_arrivals,
        total_interests=stats.total_interests,
        unsatisfied=stats.unsatisfied,
        demanded_files=len(stats.demanded_files),
        cataloged_files=len(catalog),
        pending_remaining=sum(len(n.pending) for n in nodes.values()),
        floods=stats.floods,
        aggregates_created=stats.aggregates_created,
        cars_originated=stats.cars_originated,
        cas_originated=stats.cas_originated,
        cs_hits=stats.cs_hits,
        events=sim.events_processed,
        delta_vacuous=cfg.strategy != "far" and params.delta < min_ser,
        config=cfg.to_dict(),
    )
    report.config["seed"] = seed
    return report


@dataclass(frozen=True)
class SweepPoint:
    index: int
    strategy: str
    repetition: int
    seed: int
    axis: Optional[str]
    value: Optional[float]
    cfg: Config


def sweep_points(cfg: Config) -> list[SweepPoint]:
    """Cross product of strategies, axis values and repetitions, in a fixed order."""
    sw = cfg.sweep
    strategies = sw.strategies or (cfg.strategy,)
    values = sw.values if sw.axis else (None,)
    points = []
    for st in strategies:
        for v in values:
            for rep in range(sw.repetitions):
                sub = replace(cfg, strategy=st)
                if sw.axis:
                    sub = with_axis(sub, sw.axis, v)
                points.append(SweepPoint(len(points), st, rep, cfg.seed + rep, sw.axis, v, sub))
    return points


def _run_point(point: SweepPoint) -> tuple[int, SimReport]:
    return point.index, run_simulation(point.cfg, point.seed)


def run_sweep(cfg: Config, jobs: Optional[int] = None) -> list[tuple[SweepPoint, SimReport]]:
    """Run every sweep point; results are ordered by sweep index."""
    points = sweep_points(cfg)
    jobs = cfg.sweep.jobs if jobs is None else jobs
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            done = dict(ex.map(_run_point, points))
    else:
        done = dict(_run_point(p) for p in points)
    return [(p, done[p.index]) for p in points]


def sweep_csv(results: list[tuple[SweepPoint, SimReport]]) -> str:
    return to_csv(csv_row(r, p.index, p.repetition, p.axis, p.value) for p, r in results)


def run_experiment(cfg: Config, out_dir: Optional[Path] = None, jobs: Optional[int] = None) -> Path:
    """Run ``cfg`` (single point or sweep) and write ``results.csv`` plus one JSON per point."""
    out = Path(out_dir if out_dir is not None else cfg.resolve(cfg.output.dir))
    out.mkdir(parents=True, exist_ok=True)
    results = run_sweep(cfg, jobs)
    (out / "results.csv").write_text(sweep_csv(results))
    for p, r in results:
        (out / f"point_{p.index:04d}.json").write_text(r.to_json())
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), sort_keys=True, indent=1))
    return out / "results.csv"
