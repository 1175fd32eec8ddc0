"""Zipf popularity and the client request process.

Each client requests ``files_per_client`` files.  Ranks are drawn from the
Zipf law ``P(i) = (i+q)^-a / sum_j (j+q)^-a``; segments of a file are
fetched in order with at most ``window`` Interests outstanding.

Two arrival processes are offered.  ``closed``: an exponential think time
separates the end of one file from the start of the next, so request times
depend on the network.  ``open``: file start times are drawn up front as a
Poisson process with the same mean gap, so the demand is identical whatever
the network does and downloads of one client may overlap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .names import FileId, Name, segment_name
from .topology import Catalog

if TYPE_CHECKING:
    from .engine import Simulator

__all__ = ["zipf_weights", "zipf_pmf", "ZipfSampler", "RttSample", "ClientApp", "WorkloadParams"]


def zipf_weights(M: int, alpha: float, shift: float = 0.0) -> np.ndarray:
    if M < 1:
        raise ValueError("M must be >= 1")
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if shift < 0:
        raise ValueError("shift must be >= 0")
    ranks = np.arange(1, M + 1, dtype=np.float64)
    w = (ranks + shift) ** -alpha
    return w / w.sum()


def zipf_pmf(M: int, alpha: float, i: int, shift: float = 0.0) -> float:
    """Probability of rank ``i`` (1-based) among ``M`` items."""
    if not 1 <= i <= M:
        raise ValueError(f"rank {i} outside [1, {M}]")
    return float(zipf_weights(M, alpha, shift)[i - 1])


class ZipfSampler:
    """Inverse-CDF sampler over a precomputed cumulative table."""

    def __init__(self, M: int, alpha: float, rng: np.random.Generator, shift: float = 0.0):
        self.M = M
        self.alpha = alpha
        self.pmf = zipf_weights(M, alpha, shift)
        self.cdf = np.cumsum(self.pmf)
        self.cdf[-1] = 1.0
        self.rng = rng

    def with_rng(self, rng: np.random.Generator) -> "ZipfSampler":
        """Same table, different random stream."""
        other = object.__new__(ZipfSampler)
        other.__dict__.update(self.__dict__)
        other.rng = rng
        return other

    def sample(self) -> int:
        """A 1-based rank."""
        u = self.rng.random()
        return int(np.searchsorted(self.cdf, u, side="right")) + 1

    def sample_many(self, size: int) -> np.ndarray:
        u = self.rng.random(size)
        return np.searchsorted(self.cdf, u, side="right") + 1


@dataclass(frozen=True)
class RttSample:
    client: str
    file: str
    segment: int
    issue: int
    satisfy: int


@dataclass(frozen=True)
class WorkloadParams:
    files_per_client: int = 8
    think_time_ns: int = 2_000_000_000
    window: int = 1
    start_ns: int = 0
    interest_lifetime_ns: int = 4_000_000_000
    retry_cap: int = 3
    arrivals: str = "closed"


class _Session:
    """Download of one file."""

    __slots__ = ("file", "next_segment", "finished", "outstanding")

    def __init__(self, file: Name):
        self.file = file
        self.next_segment = 0
        self.finished = 0
        self.outstanding = 0


class _Request:
    __slots__ = ("name", "segment", "issue", "attempts", "done", "session")

    def __init__(self, name: Name, segment: int, issue: int, session: _Session):
        self.name = name
        self.segment = segment
        self.issue = issue
        self.attempts = 0
        self.done = False
        self.session = session


class ClientApp:
    """Consumer application attached to a client node's APP face."""

    def __init__(
        self,
        sim: "Simulator",
        client_id: str,
        node,
        catalog: Catalog,
        sampler: ZipfSampler,
        rng: np.random.Generator,
        params: WorkloadParams,
        report,
    ):
        self.sim = sim
        self.id = client_id
        self.node = node
        self.catalog = catalog
        self.sampler = sampler
        self.rng = rng
        self.p = params
        self.report = report
        self.files_started = 0
        # segment name -> requests waiting for it (overlapping downloads of
        # the same file share one Data)
        self.outstanding: dict[Name, list[_Request]] = {}
        node.app = self

    def start(self) -> None:
        if self.p.arrivals == "open":
            t = self.p.start_ns
            for _ in range(self.p.files_per_client):
                t += self._think()
                self.sim.at(t, self._next_file)
        else:
            self.sim.at(self.p.start_ns + self._think(), self._next_file)

    def _think(self) -> int:
        if self.p.think_time_ns <= 0:
            return 0
        return int(self.rng.exponential(self.p.think_time_ns))

    def _next_file(self) -> None:
        if self.files_started >= self.p.files_per_client:
            return
        self.files_started += 1
        rank = self.sampler.sample()
        file = self.catalog.files[rank - 1]
        self.report.demanded_files.add(file)
        self._fill_window(_Session(file))

    def _fill_window(self, sess: _Session) -> None:
        seg_count = self.catalog.segments_per_file
        while sess.outstanding < self.p.window and sess.next_segment < seg_count:
            name = segment_name(FileId(sess.file, sess.next_segment))
            req = _Request(name, sess.next_segment, self.sim.now, sess)
            sess.next_segment += 1
            sess.outstanding += 1
            self.outstanding.setdefault(name, []).append(req)
            self._send(req)

    def _send(self, req: _Request) -> None:
        req.attempts += 1
        self.report.total_interests += 1
        self.node.express_interest(req.name)
        self.sim.after(self.p.interest_lifetime_ns, self._timeout, req, req.attempts)

    def _timeout(self, req: _Request, attempt: int) -> None:
        if req.done or req.attempts != attempt:
            return
        expiry = self.node.pit_expiry(req.name)
        if expiry is not None and expiry > self.sim.now:
            # the node is still working on it (e.g. waiting for a CA)
            self.sim.at(expiry, self._timeout, req, attempt)
            return
        if req.attempts < self.p.retry_cap:
            self._send(req)
        else:
            self._fail(req)

    def on_data(self, name: Name) -> None:
        for req in self.outstanding.pop(name, ()):
            if req.done:
                continue
            req.done = True
            self.report.rtt_samples.append(
                RttSample(self.id, req.session.file.uri, req.segment, req.issue, self.sim.now)
            )
            self._segment_finished(req.session)

    def on_failure(self, name: Name) -> None:
        for req in list(self.outstanding.get(name, ())):
            self._fail(req)

    def _fail(self, req: _Request) -> None:
        if req.done:
            return
        req.done = True
        waiting = self.outstanding.get(req.name)
        if waiting is not None:
            waiting.remove(req)
            if not waiting:
                del self.outstanding[req.name]
        self.report.unsatisfied += 1
        self._segment_finished(req.session)

    def _segment_finished(self, sess: _Session) -> None:
        sess.finished += 1
        sess.outstanding -= 1
        if sess.finished >= self.catalog.segments_per_file:
            if self.p.arrivals != "open":
                self.sim.after(self._think(), self._next_file)
        else:
            self._fill_window(sess)
