"""Flooding-assisted routing: flood unknown names, learn routes from Data."""

from __future__ import annotations

from ..names import file_of
from ..tables import Message, PitEntry
from .base import Forwarder

__all__ = ["FarForwarder"]


class FarForwarder(Forwarder):
    strategy = "far"
    uses_adverts = False

    def route(self, entry: PitEntry) -> None:
        hit = self.fib_faces(entry)
        if hit is not None:
            self.forward(entry, hit[1], hit[0])
        else:
            self.flood(entry)

    def recover(self, entry: PitEntry) -> None:
        self.refresh_nonce(entry)
        hit = self.fib_faces(entry)
        if hit is not None:
            self.forward(entry, hit[1], hit[0])
        elif not self.flood(entry):
            self.fail(entry)

    def learn_from_data(self, msg: Message, face: int) -> None:
        self.fib.add(file_of(msg.name), (face,))
