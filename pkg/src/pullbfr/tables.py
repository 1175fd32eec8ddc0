"""Message variants and per-node NDN state.

Every protocol shares these structures: an LRU Content Store, a PIT with
in-/out-records, a longest-prefix-match FIB and the advertisement store
that keeps received CAR/CA filters together with their arrival faces.
"""

from __future__ import annotations

import enum
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Optional

from .names import Name, prefixes

__all__ = [
    "APP_FACE",
    "MsgKind",
    "Message",
    "MessageSizes",
    "PitStatus",
    "PitEntry",
    "Pit",
    "Fib",
    "AdvertEntry",
    "AdvertStore",
    "ContentStore",
    "advert_name",
    "aggregated_by",
]

# Pseudo-face for the local application on clients and servers.
APP_FACE = -1


class MsgKind(enum.IntEnum):
    INTEREST = 0
    DATA = 1
    NACK = 2
    CAR = 3
    CA = 4


# Nack reasons, carried in the Nack's payload.
NACK_NO_DATA = "no-data"  # a server does not host the file
NACK_DUPLICATE = "duplicate"  # the Interest looped back to a node that already saw its nonce
NACK_NO_ROUTE = "no-route"  # an upstream node gave up


@dataclass(frozen=True)
class MessageSizes:
    """Accounting sizes in bytes."""

    interest: int = 40
    data_header: int = 40
    data_payload: int = 1024
    nack: int = 40
    advert_header: int = 40

    @property
    def data(self) -> int:
        return self.data_header + self.data_payload


@dataclass(slots=True)
class Message:
    kind: MsgKind
    name: Name
    nonce: int
    lifetime: int = 0  # ns
    size: int = 40
    payload: Any = None
    flooded: bool = False
    # names of the original CAR/CA messages folded into an advert
    origins: frozenset = frozenset()

    @property
    def is_advert(self) -> bool:
        return self.kind is MsgKind.CAR or self.kind is MsgKind.CA


def advert_name(kind: MsgKind, origin: str, seq: int, aggregated: bool = False) -> Name:
    """``/CAR/<origin>/<seq>`` or ``/CA/aggregated/<origin>/<seq>`` etc."""
    head = "CAR" if kind is MsgKind.CAR else "CA"
    if aggregated:
        return Name((head, "aggregated", origin, str(seq)))
    return Name((head, origin, str(seq)))


def aggregated_by(name: Name) -> Optional[str]:
    """Creator of an aggregated advertisement, or None for an original one."""
    if len(name) == 4 and name[1] == "aggregated":
        return name[2]
    return None


class PitStatus(enum.Enum):
    NEW = "new"
    AGGREGATED = "aggregated"
    DUPLICATE_NONCE = "duplicate"


@dataclass
class PitEntry:
    name: Name
    expiry: int
    in_records: dict[int, tuple[int, int]] = field(default_factory=dict)  # face -> (nonce, time)
    out_records: dict[int, int] = field(default_factory=dict)  # face -> send time
    nonces: set[int] = field(default_factory=set)
    nacked: set[int] = field(default_factory=set)
    interest: Optional[Message] = None
    pending: bool = False
    car_retries: int = 0
    flooded: bool = False
    fib_prefix: Optional[Name] = None
    nack_reasons: dict[int, str] = field(default_factory=dict)
    in_face: int = -1  # arrival face of the Interest currently being forwarded
    dup_retries: int = 0


class Pit:
    """Pending Interest Table keyed by exact name with lazy expiry."""

    def __init__(self) -> None:
        self.entries: dict[Name, PitEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, name: Name, now: int) -> Optional[PitEntry]:
        e = self.entries.get(name)
        if e is not None and e.expiry <= now:
            del self.entries[name]
            return None
        return e

    def insert(self, name: Name, face: int, nonce: int, lifetime: int, now: int) -> tuple[PitStatus, PitEntry]:
        e = self.get(name, now)
        if e is None:
            e = PitEntry(name=name, expiry=now + lifetime)
            e.in_records[face] = (nonce, now)
            e.nonces.add(nonce)
            self.entries[name] = e
            return PitStatus.NEW, e
        if nonce in e.nonces:
            return PitStatus.DUPLICATE_NONCE, e
        e.nonces.add(nonce)
        e.in_records[face] = (nonce, now)
        e.expiry = max(e.expiry, now + lifetime)
        return PitStatus.AGGREGATED, e

    def remove(self, name: Name) -> None:
        self.entries.pop(name, None)


class Fib:
    """Name prefix -> set of next-hop faces, longest-prefix match."""

    def __init__(self) -> None:
        self.entries: dict[Name, set[int]] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, prefix: Name, faces) -> None:
        faces = set(faces)
        if faces:
            self.entries.setdefault(prefix, set()).update(faces)

    def lookup(self, name: Name) -> Optional[tuple[Name, set[int]]]:
        for i in range(len(name), 0, -1):
            p = name[:i]
            hops = self.entries.get(p)
            if hops:
                return Name(p), hops
        return None

    def remove_next_hop(self, prefix: Name, face: int) -> None:
        hops = self.entries.get(prefix)
        if hops is None:
            return
        hops.discard(face)
        if not hops:
            del self.entries[prefix]


@dataclass
class AdvertEntry:
    name: Name
    kind: MsgKind
    filter: Any
    nonce: int
    size: int
    arrival: int
    expiry: int
    in_faces: set[int] = field(default_factory=set)
    out_faces: set[int] = field(default_factory=set)
    own: bool = False
    lifetime: int = 0
    origins: frozenset = frozenset()


class AdvertStore:
    """Received (and self-originated) CAR/CA messages keyed by message name."""

    def __init__(self) -> None:
        self.entries: dict[Name, AdvertEntry] = {}

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, name: Name) -> Optional[AdvertEntry]:
        return self.entries.get(name)

    def add(self, entry: AdvertEntry) -> None:
        self.entries[entry.name] = entry

    def prune(self, now: int) -> None:
        dead = [n for n, e in self.entries.items() if e.expiry <= now]
        for n in dead:
            del self.entries[n]

    def live(self, now: int, kind: MsgKind = MsgKind.CA):
        for e in self.entries.values():
            if e.kind is kind and e.expiry > now and e.in_faces:
                yield e

    def match(self, name: Name, now: int, exclude=frozenset()) -> Optional[tuple[Name, list[AdvertEntry]]]:
        """Longest prefix of ``name`` contained in any live CA filter.

        Returns the matched prefix and every entry containing it.  Entries
        whose names are in ``exclude`` are skipped.
        """
        live = [e for e in self.live(now) if e.name not in exclude]
        if not live:
            return None
        for p in reversed(prefixes(name)):
            hits = [e for e in live if e.filter.contains(p)]
            if hits:
                return p, hits
        return None


class ContentStore:
    """LRU cache of Data keyed by segment name."""

    def __init__(self, capacity: int = 100):
        if capacity < 0:
            raise ValueError("capacity must be >= 0")
        self.capacity = capacity
        self._items: OrderedDict[Name, Any] = OrderedDict()

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, name: Name) -> bool:
        return name in self._items

    def insert(self, name: Name, data: Any) -> None:
        if self.capacity == 0:
            return
        if name in self._items:
            self._items.move_to_end(name)
        self._items[name] = data
        while len(self._items) > self.capacity:
            self._items.popitem(last=False)

    def lookup(self, name: Name) -> Any:
        if name not in self._items:
            return None
        self._items.move_to_end(name)
        return self._items[name]
