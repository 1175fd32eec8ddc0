"""Deterministic discrete-event core.

Time is integer nanoseconds.  Events pop in ``(time, seq)`` order where
``seq`` is assigned at scheduling, so equal-time events run in the order
they were created and a run is a pure function of its inputs.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .tables import Message, MsgKind
from .topology import LinkSpec, Topology

__all__ = [
    "NS",
    "seconds",
    "to_seconds",
    "rng_stream",
    "STREAMS",
    "serialization_ns",
    "LinkCounters",
    "Simulator",
]

NS = 1_000_000_000

# One independent RNG stream per concern, all derived from the master seed.
STREAMS = {"placement": 0, "workload": 1, "nonce": 2, "loss": 3, "partition": 4}


def seconds(s: float) -> int:
    return int(round(s * NS))


def to_seconds(ns: int) -> float:
    return ns / NS


def rng_stream(master_seed: int, concern: str, *sub: int) -> np.random.Generator:
    """Independent generator for ``concern``; ``sub`` splits it further (e.g. per client)."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(STREAMS[concern], *sub))
    return np.random.Generator(np.random.PCG64(ss))


def serialization_ns(size_bytes: int, bandwidth_bps: int) -> int:
    return -((-size_bytes * 8 * NS) // bandwidth_bps)


@dataclass
class LinkCounters:
    """Per-kind link-layer transmission totals."""

    bytes: dict[MsgKind, int] = field(default_factory=lambda: {k: 0 for k in MsgKind})
    count: dict[MsgKind, int] = field(default_factory=lambda: {k: 0 for k in MsgKind})
    total_bytes: int = 0
    total_count: int = 0
    dropped: int = 0


class _Link:
    __slots__ = ("spec", "busy")

    def __init__(self, spec: LinkSpec):
        self.spec = spec
        self.busy = [0, 0]  # per direction: a->b, b->a


class Simulator:
    """Event queue plus the link layer of a topology.

    Nodes are attached with :meth:`attach`; each must expose
    ``receive(msg, face)``.
    """

    def __init__(self, topo: Topology, seed: int = 0, loss_rate: float = 0.0):
        if not 0.0 <= loss_rate < 1.0:
            raise ValueError("loss_rate must be in [0, 1)")
        self.topo = topo
        self.seed = seed
        self.now = 0
        self._queue: list = []
        self._seq = itertools.count()
        self._links = [_Link(l) for l in topo.links]
        # node -> list of (link idx, direction, peer, peer face)
        self.faces: dict[str, list[tuple[int, int, str, int]]] = {n: [] for n in topo.roles}
        for i, l in enumerate(topo.links):
            fa = len(self.faces[l.a])
            fb = len(self.faces[l.b])
            self.faces[l.a].append((i, 0, l.b, fb))
            self.faces[l.b].append((i, 1, l.a, fa))
        self.nodes: dict[str, Any] = {}
        self.counters = LinkCounters()
        self.loss_rate = loss_rate
        self._loss_rng = rng_stream(seed, "loss") if loss_rate > 0 else None
        self.nonce_rng = rng_stream(seed, "nonce")
        self.events_processed = 0
        self.horizon: Optional[int] = None

    def attach(self, node_id: str, node: Any) -> None:
        self.nodes[node_id] = node

    def degree(self, node_id: str) -> int:
        return len(self.faces[node_id])

    def new_nonce(self) -> int:
        return int(self.nonce_rng.integers(0, 1 << 63))

    def at(self, time: int, fn: Callable, *args) -> None:
        if time < self.now:
            raise ValueError(f"cannot schedule in the past ({time} < {self.now})")
        heapq.heappush(self._queue, (time, next(self._seq), fn, args))

    def after(self, delay: int, fn: Callable, *args) -> None:
        self.at(self.now + delay, fn, *args)

    def transmit(self, node_id: str, face: int, msg: Message) -> int:
        """Send ``msg`` out of ``face``; returns the delivery time."""
        link_idx, direction, peer, peer_face = self.faces[node_id][face]
        link = self._links[link_idx]
        spec = link.spec
        start = max(self.now, link.busy[direction])
        done = start + serialization_ns(msg.size, spec.bandwidth_bps)
        link.busy[direction] = done
        c = self.counters
        c.bytes[msg.kind] += msg.size
        c.count[msg.kind] += 1
        c.total_bytes += msg.size
        c.total_count += 1
        arrival = done + spec.prop_ns
        if self._loss_rng is not None and self._loss_rng.random() < self.loss_rate:
            c.dropped += 1
            return arrival
        self.at(arrival, self.nodes[peer].receive, msg, peer_face)
        return arrival

    def run(self, until: Optional[int] = None) -> int:
        """Process events up to and including ``until`` (or until empty)."""
        self.horizon = until
        q = self._queue
        pop = heapq.heappop
        while q:
            if until is not None and q[0][0] > until:
                break
            t, _, fn, args = pop(q)
            self.now = t
            fn(*args)
            self.events_processed += 1
        if until is not None:
            self.now = max(self.now, until)
        return self.now

    @property
    def pending_events(self) -> int:
        return len(self._queue)
