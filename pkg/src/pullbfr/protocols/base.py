"""Forwarding machinery shared by the three routing strategies.

A :class:`Forwarder` is one node.  Clients and servers are hosts (they never
relay transit Interests); routers forward.  Strategies override
:meth:`Forwarder.route` (what to do with a new PIT entry) and
:meth:`Forwarder.recover` (what to do once every upstream face has Nacked).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional

from ..bloom import BfParams, BloomFilter, Decision, ExactFilter, NameIndex, may_aggregate
from ..names import Name, file_of, prefixes
from ..tables import (
    APP_FACE,
    AdvertEntry,
    AdvertStore,
    ContentStore,
    Fib,
    Message,
    MessageSizes,
    MsgKind,
    NACK_DUPLICATE,
    NACK_NO_DATA,
    NACK_NO_ROUTE,
    Pit,
    PitEntry,
    PitStatus,
    advert_name,
    aggregated_by,
)

if TYPE_CHECKING:
    from ..engine import Simulator

__all__ = ["StrategyParams", "RunStats", "Forwarder"]


@dataclass(frozen=True)
class StrategyParams:
    bf_params: BfParams
    oracle: bool = False
    sizes: MessageSizes = MessageSizes()
    interest_lifetime: int = 4_000_000_000
    cs_capacity: int = 100
    delta: int = 400_000
    car_lifetime: int = 4_000_000_000
    ca_lifetime: int = 10_000_000_000
    retry_cap: int = 3
    f_r: float = 0.017
    retx_suppression: int = 100_000_000

    def new_filter(self):
        return ExactFilter(self.bf_params) if self.oracle else BloomFilter(self.bf_params)

    @property
    def advert_size(self) -> int:
        return self.sizes.advert_header + self.bf_params.wire_size


@dataclass
class RunStats:
    """Counters filled in by nodes and client applications during a run."""

    warmup_end: int = 0
    horizon: int = 0
    total_interests: int = 0
    wrong_server_interests: int = 0
    server_interest_arrivals: int = 0
    unsatisfied: int = 0
    cs_hits: int = 0
    floods: int = 0
    cars_originated: int = 0
    cas_originated: int = 0
    aggregates_created: int = 0
    refused_unions: int = 0
    rtt_samples: list = field(default_factory=list)
    demanded_files: set = field(default_factory=set)
    storage_byte_ns: dict = field(default_factory=dict)

    def hold(self, node: str, nbytes: int, start: int, end: int) -> None:
        """Account ``nbytes`` stored by ``node`` over ``[start, end)``."""
        lo = max(start, self.warmup_end)
        hi = min(end, self.horizon)
        if hi > lo:
            self.storage_byte_ns[node] = self.storage_byte_ns.get(node, 0) + nbytes * (hi - lo)


class Forwarder:
    strategy = "base"
    uses_adverts = True

    def __init__(
        self,
        sim: "Simulator",
        node_id: str,
        role: str,
        params: StrategyParams,
        stats: RunStats,
        hosted: Iterable[Name] = (),
    ):
        self.sim = sim
        self.id = node_id
        self.role = role
        self.p = params
        self.stats = stats
        self.nfaces = sim.degree(node_id)
        self.cs = ContentStore(params.cs_capacity)
        self.pit = Pit()
        self.fib = Fib()
        self.adverts = AdvertStore()
        self.hosted_files = list(hosted)
        self.hosted = set(self.hosted_files)
        self.hosted_index = NameIndex(self.hosted_files) if self.hosted_files else None
        self.app = None
        self.seq = 0
        # (prefix, face) -> advert names that installed that next hop
        self.fib_origins: dict[tuple[Name, int], set[Name]] = {}
        # (prefix, advert name) pairs shown to be false matches by a Nack
        self.bad: set[tuple[Name, Name]] = set()
        self.pending: dict[Name, PitEntry] = {}
        self._buffers: dict[tuple[int, MsgKind], list[AdvertEntry]] = {}
        # origin advert name -> [expiry, faces it arrived on, faces it was sent on]
        self._origin_faces: dict[Name, list] = {}
        self._next_prune = 0
        sim.attach(node_id, self)

    # ------------------------------------------------------------------
    # helpers
    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    @property
    def now(self) -> int:
        return self.sim.now

    def send(self, face: int, msg: Message) -> None:
        self.sim.transmit(self.id, face, msg)

    def pit_expiry(self, name: Name) -> Optional[int]:
        e = self.pit.get(name, self.now)
        return None if e is None else e.expiry

    # ------------------------------------------------------------------
    # dispatch
    def receive(self, msg: Message, face: int) -> None:
        kind = msg.kind
        if kind is MsgKind.INTEREST:
            self.on_interest(msg, face)
        elif kind is MsgKind.DATA:
            self.on_data(msg, face)
        elif kind is MsgKind.NACK:
            self.on_nack(msg, face)
        elif self.uses_adverts:
            self.on_advert(msg, face)

    def express_interest(self, name: Name) -> None:
        msg = Message(
            MsgKind.INTEREST,
            name,
            self.sim.new_nonce(),
            lifetime=self.p.interest_lifetime,
            size=self.p.sizes.interest,
        )
        self.on_interest(msg, APP_FACE)

    # ------------------------------------------------------------------
    # Interest / Data / Nack
    def on_interest(self, msg: Message, face: int) -> None:
        if face != APP_FACE:
            if self.role == "server":
                self.serve(msg, face)
                return
            if self.role == "client":
                return
        if self.cs.lookup(msg.name) is not None:
            self.stats.cs_hits += 1
            self._deliver_data(msg.name, face)
            return
        status, entry = self.pit.insert(msg.name, face, msg.nonce, msg.lifetime, self.now)
        if status is PitStatus.DUPLICATE_NONCE:
            if face != APP_FACE and not msg.flooded and face not in entry.in_records:
                self.nack(face, msg.name, msg.nonce, NACK_DUPLICATE)
            return
        if status is PitStatus.AGGREGATED:
            self.retransmit(entry, msg, face)
            return
        entry.interest = msg
        entry.in_face = face
        entry.flooded = msg.flooded
        self.route(entry)

    def retransmit(self, entry: PitEntry, msg: Message, face: int) -> None:
        """Forward a new-nonce Interest for a known entry if the last attempt is stale.

        Without this an entry left behind by a flood branch that never saw
        Data would swallow every later Interest for the name until expiry.
        An Interest arriving on a face the entry was only forwarded towards
        is never suppressed: that requester sits downstream of the earlier
        forwarding, so no Data for the entry will come back through it.
        """
        if entry.pending or not entry.out_records:
            return
        toward_requester = face in entry.out_records
        if not toward_requester and self.now - max(entry.out_records.values()) < self.p.retx_suppression:
            return
        entry.interest = msg
        entry.in_face = face
        entry.flooded = msg.flooded
        self.route(entry)

    def serve(self, msg: Message, face: int) -> None:
        self.stats.server_interest_arrivals += 1
        if file_of(msg.name) in self.hosted:
            self._deliver_data(msg.name, face)
        elif not msg.flooded:
            self.stats.wrong_server_interests += 1
            self.nack(face, msg.name, msg.nonce, NACK_NO_DATA)

    def nack(self, face: int, name: Name, nonce: int, reason: str) -> None:
        self.send(face, Message(MsgKind.NACK, name, nonce, size=self.p.sizes.nack, payload=reason))

    def _deliver_data(self, name: Name, face: int) -> None:
        if face == APP_FACE:
            if self.app is not None:
                self.app.on_data(name)
        else:
            self.send(face, Message(MsgKind.DATA, name, 0, size=self.p.sizes.data))

    def on_data(self, msg: Message, face: int) -> None:
        entry = self.pit.get(msg.name, self.now)
        if entry is None:
            return
        self.learn_from_data(msg, face)
        self.cs.insert(msg.name, True)
        self.pit.remove(msg.name)
        self.pending.pop(msg.name, None)
        entry.pending = False
        for f in entry.in_records:
            if f != face:
                self._deliver_data(msg.name, f)

    def learn_from_data(self, msg: Message, face: int) -> None:
        pass

    def forward(self, entry: PitEntry, faces: Iterable[int], prefix: Optional[Name] = None) -> None:
        msg = entry.interest
        entry.fib_prefix = prefix
        for f in sorted(faces):
            entry.out_records[f] = self.now
            self.send(
                f,
                Message(
                    MsgKind.INTEREST,
                    entry.name,
                    msg.nonce,
                    lifetime=max(1, entry.expiry - self.now),
                    size=self.p.sizes.interest,
                    flooded=entry.flooded,
                ),
            )

    def flood(self, entry: PitEntry) -> bool:
        faces = [f for f in range(self.nfaces) if f != entry.in_face and f not in entry.nacked]
        if not faces:
            return False
        self.stats.floods += 1
        entry.flooded = True
        self.forward(entry, faces)
        return True

    def on_nack(self, msg: Message, face: int) -> None:
        entry = self.pit.get(msg.name, self.now)
        if entry is None or face not in entry.out_records or msg.nonce != entry.interest.nonce:
            return
        entry.nacked.add(face)
        entry.nack_reasons[face] = msg.payload
        prefix = entry.fib_prefix
        if prefix is not None and msg.payload != NACK_DUPLICATE:
            # a duplicate only means another copy of this Interest got there
            # first; the next hop itself is still good
            self.fib.remove_next_hop(prefix, face)
            origins = self.fib_origins.pop((prefix, face), ())
            if msg.payload == NACK_NO_DATA:
                # a false positive: stop trusting these adverts for this prefix
                for origin in origins:
                    self.bad.add((prefix, origin))
        if not all(f in entry.nacked for f in entry.out_records):
            return
        if all(entry.nack_reasons.get(f) == NACK_DUPLICATE for f in entry.out_records):
            self.on_redundant(entry)
        else:
            self.recover(entry)

    def on_redundant(self, entry: PitEntry) -> None:
        """Every upstream saw this Interest's nonce already: another path serves it.

        A pure transit branch hands the duplicate verdict back downstream.
        An entry that also carries other requesters (or the local app)
        re-issues the Interest under a fresh nonce instead.
        """
        if len(entry.in_records) == 1 and APP_FACE not in entry.in_records:
            self.fail(entry, NACK_DUPLICATE)
        elif entry.dup_retries < self.p.retry_cap:
            entry.dup_retries += 1
            self.refresh_nonce(entry)
            entry.nacked.clear()
            entry.nack_reasons.clear()
            self.route(entry)
        else:
            self.recover(entry)

    def refresh_nonce(self, entry: PitEntry) -> None:
        """Fresh nonce before re-forwarding an Interest that already failed once."""
        old = entry.interest
        nonce = self.sim.new_nonce()
        entry.nonces.add(nonce)
        entry.interest = Message(old.kind, old.name, nonce, old.lifetime, old.size, flooded=old.flooded)
        entry.out_records.clear()

    def fail(self, entry: PitEntry, reason: str = NACK_NO_ROUTE) -> None:
        """Give up on ``entry``: Nack every downstream face and drop it."""
        self.pit.remove(entry.name)
        self.pending.pop(entry.name, None)
        entry.pending = False
        for f, (nonce, _) in entry.in_records.items():
            if f == APP_FACE:
                if self.app is not None:
                    self.app.on_failure(entry.name)
            else:
                self.nack(f, entry.name, nonce, reason)

    def route(self, entry: PitEntry) -> None:
        raise NotImplementedError

    def recover(self, entry: PitEntry) -> None:
        self.fail(entry)

    # ------------------------------------------------------------------
    # routes from FIB and stored advertisements
    def fib_faces(self, entry: PitEntry) -> Optional[tuple[Name, set[int]]]:
        hit = self.fib.lookup(entry.name)
        if hit is None:
            return None
        prefix, hops = hit
        faces = {f for f in hops if f != entry.in_face and f not in entry.nacked}
        return (prefix, faces) if faces else None

    def advert_faces(self, entry: PitEntry, only: Optional[AdvertEntry] = None) -> Optional[tuple[Name, set[int], dict[int, set[Name]]]]:
        """Faces from live CA filters containing a prefix of the Interest's file.

        Prefixes are tried longest first; every filter containing the first
        positive prefix contributes its arrival faces.
        """
        fname = file_of(entry.name)
        live = [e for e in self.adverts.live(self.now) if only is None or e is only]
        if not live:
            return None
        for p in reversed(prefixes(fname)):
            key = p.encode()
            hits = [e for e in live if (p, e.name) not in self.bad and e.filter.contains(key)]
            if not hits:
                continue
            origins: dict[int, set[Name]] = {}
            for e in hits:
                for f in e.in_faces:
                    if f == entry.in_face or f in entry.nacked:
                        continue
                    origins.setdefault(f, set()).add(e.name)
            if origins:
                return p, set(origins), origins
        return None

    def install(self, prefix: Name, origins: dict[int, set[Name]]) -> None:
        self.fib.add(prefix, origins)
        for f, names in origins.items():
            self.fib_origins.setdefault((prefix, f), set()).update(names)

    def route_known(self, entry: PitEntry) -> bool:
        """Forward via FIB, else via stored advertisements; False if neither applies."""
        hit = self.fib_faces(entry)
        if hit is not None:
            self.forward(entry, hit[1], hit[0])
            return True
        adv = self.advert_faces(entry)
        if adv is not None:
            prefix, faces, origins = adv
            self.install(prefix, origins)
            self.forward(entry, faces, prefix)
            return True
        return False

    # ------------------------------------------------------------------
    # CAR / CA handling
    def on_advert(self, msg: Message, face: int) -> None:
        origins = msg.origins or frozenset((msg.name,))
        fresh = self._exchanged(origins, face, self.now + msg.lifetime, incoming=True)
        if aggregated_by(msg.name) == self.id:
            return
        if self.adverts.get(msg.name) is not None:
            # a later copy travelled a longer path; only the first arrival
            # face points towards the origin without looping
            return
        now = self.now
        entry = AdvertEntry(
            name=msg.name,
            kind=msg.kind,
            filter=msg.payload,
            nonce=msg.nonce,
            size=msg.size,
            arrival=now,
            expiry=now + msg.lifetime,
            in_faces={face},
            lifetime=msg.lifetime,
            origins=origins,
        )
        self.store_advert(entry)
        if msg.kind is MsgKind.CAR:
            if fresh:
                self.on_new_car(entry)
        else:
            self.on_new_ca(entry)
        if self.role == "router":
            self.enqueue(entry)

    def _exchanged(self, origins, face: int, expiry: int, incoming: bool) -> bool:
        """Record that ``origins`` crossed ``face``; True if any of them is new here."""
        fresh = False
        slot = 1 if incoming else 2
        for o in origins:
            rec = self._origin_faces.get(o)
            if rec is None:
                rec = self._origin_faces[o] = [expiry, set(), set()]
                fresh = True
            else:
                rec[0] = max(rec[0], expiry)
            rec[slot].add(face)
        return fresh

    def _crossed(self, origins, face: int) -> bool:
        """True if relaying ``origins`` over ``face`` is redundant or points backwards.

        Sending content back over a face it arrived on would advertise a
        route that loops, so one such origin rules the whole message out.
        """
        done = True
        for o in origins:
            rec = self._origin_faces.get(o)
            if rec is None:
                done = False
                continue
            if face in rec[1]:
                return True
            if face not in rec[2]:
                done = False
        return done

    def store_advert(self, entry: AdvertEntry) -> None:
        now = self.now
        if now >= self._next_prune:
            self.adverts.prune(now)
            dead = [o for o, rec in self._origin_faces.items() if rec[0] <= now]
            for o in dead:
                del self._origin_faces[o]
            self._next_prune = now + 1_000_000_000
        self.adverts.add(entry)
        self.stats.hold(self.id, entry.size, now, entry.expiry)

    def on_new_car(self, entry: AdvertEntry) -> None:
        pass

    def on_new_ca(self, entry: AdvertEntry) -> None:
        pass

    def broadcast_own(self, kind: MsgKind, filt, lifetime: int) -> Message:
        """Originate a CAR/CA on every face and remember it as our own."""
        name = advert_name(kind, self.id, self.next_seq())
        origins = frozenset((name,))
        msg = Message(
            kind,
            name,
            self.sim.new_nonce(),
            lifetime=lifetime,
            size=self.p.sizes.advert_header + filt.wire_size,
            payload=filt,
            origins=origins,
        )
        self._origin_faces[name] = [self.now + lifetime, set(), set(range(self.nfaces))]
        entry = AdvertEntry(
            name=name,
            kind=kind,
            filter=filt,
            nonce=msg.nonce,
            size=msg.size,
            arrival=self.now,
            expiry=self.now + lifetime,
            out_faces=set(range(self.nfaces)),
            own=True,
            lifetime=lifetime,
            origins=origins,
        )
        self.store_advert(entry)
        for f in range(self.nfaces):
            self.send(f, msg)
        return msg

    def enqueue(self, entry: AdvertEntry) -> None:
        for g in range(self.nfaces):
            if g in entry.in_faces:
                continue
            key = (g, entry.kind)
            buf = self._buffers.get(key)
            if buf is None:
                self._buffers[key] = [entry]
                self.sim.after(self.p.delta, self.flush, g, entry.kind)
            else:
                buf.append(entry)

    def flush(self, face: int, kind: MsgKind) -> list[Message]:
        """Forward everything buffered for ``face``, folding filters greedily."""
        items = self._buffers.pop((face, kind), [])
        now = self.now
        # relayed adverts carry their remaining lifetime, so content never
        # outlives its origin by being re-aggregated along the way
        items = [e for e in items if e.expiry > now and face not in e.in_faces and face not in e.out_faces]
        fresh = []
        for e in items:
            if self._crossed(e.origins, face):
                e.out_faces.add(face)
            else:
                fresh.append(e)
        out: list[Message] = []
        for members, filt in self._fold(fresh):
            origins = frozenset().union(*(e.origins for e in members))
            if len(members) == 1:
                e = members[0]
                msg = Message(kind, e.name, e.nonce, lifetime=e.expiry - now, size=e.size, payload=e.filter, origins=origins)
            else:
                self.stats.aggregates_created += 1
                msg = Message(
                    kind,
                    advert_name(kind, self.id, self.next_seq(), aggregated=True),
                    self.sim.new_nonce(),
                    lifetime=min(e.expiry for e in members) - now,
                    size=self.p.sizes.advert_header + filt.wire_size,
                    payload=filt,
                    origins=origins,
                )
            for e in members:
                e.out_faces.add(face)
            self._exchanged(origins, face, now + msg.lifetime, incoming=False)
            self.send(face, msg)
            out.append(msg)
        return out

    def _fold(self, items: list[AdvertEntry]):
        groups = []
        members: list[AdvertEntry] = []
        acc = None
        for e in items:
            if acc is None:
                members, acc = [e], e.filter
                continue
            d = may_aggregate(acc, e.filter)
            if d is Decision.IDENTICAL or d is Decision.USE_A:
                members.append(e)
            elif d is Decision.USE_B:
                members.append(e)
                acc = e.filter
            elif d is Decision.UNION:
                members.append(e)
                acc = acc.union(e.filter)
            else:
                self.stats.refused_unions += 1
                groups.append((members, acc))
                members, acc = [e], e.filter
        if acc is not None:
            groups.append((members, acc))
        return groups
