"""Push-based BFR: servers periodically flood filters of their whole catalogue."""

from __future__ import annotations

import hashlib
import math

from ..names import Name, prefixes
from ..tables import MsgKind, PitEntry
from .base import Forwarder

__all__ = ["PushForwarder", "partition_catalog"]


def _stable_hash(name: Name) -> int:
    return int.from_bytes(hashlib.blake2b(name.encode(), digest_size=8).digest(), "little")


def _inserted_names(group: list[Name]) -> dict[Name, None]:
    names: dict[Name, None] = {}
    for f in group:
        for p in prefixes(f):
            names.setdefault(p, None)
    return names


def partition_catalog(files: list[Name], n_max: int) -> list[list[Name]]:
    """Split a catalogue into groups by stable name hash.

    A group's filter holds its files and all their prefixes, so the number
    of groups starts at ``ceil(len/n_max)`` and grows until every group's
    inserted-name count is at most ``n_max``.
    """
    if not files:
        return []
    hashes = [_stable_hash(f) for f in files]
    parts = math.ceil(len(files) / n_max)
    while True:
        groups: list[list[Name]] = [[] for _ in range(parts)]
        for f, h in zip(files, hashes):
            groups[h % parts].append(f)
        if all(len(_inserted_names(g)) <= n_max for g in groups) or parts >= len(files):
            return groups
        parts += 1


class PushForwarder(Forwarder):
    strategy = "push-bfr"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._filters = None

    @property
    def period(self) -> int:
        return int(round(1e9 / self.p.f_r))

    def catalog_filters(self) -> list:
        if self._filters is None:
            self._filters = []
            for group in partition_catalog(self.hosted_files, self.p.bf_params.n_max):
                filt = self.p.new_filter()
                for n in _inserted_names(group):
                    filt.insert(n)
                self._filters.append(filt)
        return self._filters

    def start(self, until: int) -> None:
        """Schedule catalogue advertisements every ``1/f_r`` up to ``until``."""
        if self.role != "server" or not self.hosted_files:
            return
        t = 0
        while t <= until:
            self.sim.at(t, self.advertise_catalog)
            t += self.period

    def advertise_catalog(self) -> None:
        for filt in self.catalog_filters():
            self.stats.cas_originated += 1
            self.broadcast_own(MsgKind.CA, filt, self.period)

    def route(self, entry: PitEntry) -> None:
        if self.route_known(entry):
            return
        self.flood(entry)

    def recover(self, entry: PitEntry) -> None:
        self.refresh_nonce(entry)
        if self.route_known(entry):
            return
        if not self.flood(entry):
            self.fail(entry)
