"""Pull-based BFR.

A node that cannot route an Interest keeps it pending and broadcasts a CAR
whose filter holds the demanded file name and its prefixes.  Routers relay
CARs and CAs through per-face aggregation buffers.  A server answers a CAR
with a CA carrying only the hosted file names that the CAR's filter
contains.
"""

from __future__ import annotations

from ..names import file_of, prefixes
from ..tables import APP_FACE, AdvertEntry, MsgKind, PitEntry
from .base import Forwarder

__all__ = ["PullForwarder"]


class PullForwarder(Forwarder):
    strategy = "pull-bfr"

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # file name -> time of the last CAR we sent for it
        self._car_sent: dict = {}

    def route(self, entry: PitEntry) -> None:
        if self.route_known(entry):
            return
        if APP_FACE in entry.in_records:
            self.hold(entry)
        else:
            # a transit node without routing information hands the Interest
            # back; the downstream node tries its other next hops or pulls
            self.fail(entry)

    def hold(self, entry: PitEntry) -> None:
        entry.pending = True
        self.pending[entry.name] = entry
        self.send_car(entry)
        self.sim.after(self.p.interest_lifetime, self._pending_timeout, entry, entry.car_retries)

    def send_car(self, entry: PitEntry, force: bool = False) -> None:
        fname = file_of(entry.name)
        last = self._car_sent.get(fname)
        if not force and last is not None and self.now - last < self.p.car_lifetime:
            return
        self._car_sent[fname] = self.now
        filt = self.p.new_filter()
        for p in prefixes(fname):
            filt.insert(p)
        self.stats.cars_originated += 1
        self.broadcast_own(MsgKind.CAR, filt, self.p.car_lifetime)

    def _pending_timeout(self, entry: PitEntry, attempt: int) -> None:
        if not entry.pending or entry.car_retries != attempt or self.pit.entries.get(entry.name) is not entry:
            return
        if entry.car_retries < self.p.retry_cap:
            entry.car_retries += 1
            entry.expiry = self.now + self.p.interest_lifetime
            self.send_car(entry, force=True)
            self.sim.after(self.p.interest_lifetime, self._pending_timeout, entry, entry.car_retries)
        else:
            self.fail(entry)

    def _release(self, only: AdvertEntry) -> None:
        for name, pe in list(self.pending.items()):
            if self.pit.entries.get(name) is not pe:
                del self.pending[name]
                continue
            adv = self.advert_faces(pe, only=only)
            if adv is None:
                continue
            prefix, faces, origins = adv
            self.install(prefix, origins)
            pe.pending = False
            del self.pending[name]
            self.forward(pe, faces, prefix)

    def on_new_ca(self, entry: AdvertEntry) -> None:
        if self.pending:
            self._release(entry)

    def on_new_car(self, entry: AdvertEntry) -> None:
        if self.role != "server" or self.hosted_index is None:
            return
        hit = entry.filter.matches(self.hosted_index)
        if not hit.any():
            return
        names = {}
        for i in hit.nonzero()[0]:
            for p in prefixes(self.hosted_files[i]):
                names.setdefault(p, None)
        filt = self.p.new_filter()
        for n in names:
            filt.insert(n)
        self.stats.cas_originated += 1
        self.broadcast_own(MsgKind.CA, filt, self.p.ca_lifetime)

    def recover(self, entry: PitEntry) -> None:
        self.refresh_nonce(entry)
        if self.route_known(entry):
            return
        if entry.car_retries >= self.p.retry_cap:
            self.fail(entry)
            return
        entry.car_retries += 1
        # the CA answering this CAR is fresh routing information, so faces
        # that Nacked under the old information become usable again
        entry.nacked.clear()
        entry.nack_reasons.clear()
        entry.pending = True
        entry.expiry = max(entry.expiry, self.now + self.p.interest_lifetime)
        self.pending[entry.name] = entry
        self.send_car(entry, force=True)
        self.sim.after(self.p.interest_lifetime, self._pending_timeout, entry, entry.car_retries)
