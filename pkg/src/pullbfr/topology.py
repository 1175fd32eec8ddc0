"""Topology and catalogue files.

Topology files are line oriented::

    # comment
    node <id> <role>                         # role: client | server | router
    link <idA> <idB> <bandwidth_bps> <prop_ns>

Face ids are dense per node and follow the order in which links mention it.

Catalogue files list one file per line::

    file <name> <server-id>[,<server-id>...]
"""

from __future__ import annotations

import io
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .names import Name, NameError_, parse

__all__ = [
    "ROLES",
    "TopologyError",
    "LinkSpec",
    "Topology",
    "parse_topology",
    "load_topology",
    "dump_topology",
    "Catalog",
    "parse_catalog",
    "load_catalog",
    "dump_catalog",
    "synthetic_catalog",
    "geant40_topology",
    "bundled_topology_path",
    "GEANT40_EDGES",
]

ROLES = ("client", "server", "router")
PathLike = Union[str, Path]


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class LinkSpec:
    a: str
    b: str
    bandwidth_bps: int
    prop_ns: int


@dataclass
class Topology:
    roles: dict[str, str] = field(default_factory=dict)
    links: list[LinkSpec] = field(default_factory=list)

    def nodes_with(self, role: str) -> list[str]:
        return [n for n, r in self.roles.items() if r == role]

    @property
    def routers(self) -> list[str]:
        return self.nodes_with("router")

    @property
    def clients(self) -> list[str]:
        return self.nodes_with("client")

    @property
    def servers(self) -> list[str]:
        return self.nodes_with("server")

    def faces(self) -> dict[str, list[tuple[int, str]]]:
        """node -> [(link index, peer)] in face-id order."""
        out: dict[str, list[tuple[int, str]]] = {n: [] for n in self.roles}
        for i, l in enumerate(self.links):
            out[l.a].append((i, l.b))
            out[l.b].append((i, l.a))
        return out

    def is_connected(self) -> bool:
        if not self.roles:
            return True
        adj = self.faces()
        start = next(iter(self.roles))
        seen = {start}
        todo = deque([start])
        while todo:
            u = todo.popleft()
            for _, v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        return len(seen) == len(self.roles)

    def validate(self) -> None:
        for l in self.links:
            for end in (l.a, l.b):
                if end not in self.roles:
                    raise TopologyError(f"link endpoint {end!r} is not a declared node")
            if l.a == l.b:
                raise TopologyError(f"self-loop on {l.a!r}")
        if not self.is_connected():
            raise TopologyError("topology is not connected")

    def scaled(self, capacity_scale: float) -> "Topology":
        """Copy with every bandwidth multiplied by ``capacity_scale``."""
        if capacity_scale <= 0:
            raise ValueError("capacity_scale must be positive")
        links = [
            LinkSpec(l.a, l.b, max(1, int(round(l.bandwidth_bps * capacity_scale))), l.prop_ns)
            for l in self.links
        ]
        return Topology(dict(self.roles), links)


def parse_topology(text: str, source: str = "<topology>") -> Topology:
    topo = Topology()
    pending: list[tuple[int, LinkSpec]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        where = f"{source}:{lineno}"
        if parts[0] == "node":
            if len(parts) != 3:
                raise TopologyError(f"{where}: expected 'node <id> <role>'")
            nid, role = parts[1], parts[2]
            if role not in ROLES:
                raise TopologyError(f"{where}: unknown role {role!r}")
            if nid in topo.roles:
                raise TopologyError(f"{where}: duplicate node {nid!r}")
            topo.roles[nid] = role
        elif parts[0] == "link":
            if len(parts) != 5:
                raise TopologyError(f"{where}: expected 'link <idA> <idB> <bandwidth_bps> <prop_ns>'")
            try:
                bw, prop = int(parts[3]), int(parts[4])
            except ValueError:
                raise TopologyError(f"{where}: bandwidth and propagation must be integers") from None
            if bw <= 0 or prop < 0:
                raise TopologyError(f"{where}: bandwidth must be > 0 and propagation >= 0")
            pending.append((lineno, LinkSpec(parts[1], parts[2], bw, prop)))
        else:
            raise TopologyError(f"{where}: unknown directive {parts[0]!r}")
    for lineno, l in pending:
        for end in (l.a, l.b):
            if end not in topo.roles:
                raise TopologyError(f"{source}:{lineno}: dangling link endpoint {end!r}")
        if l.a == l.b:
            raise TopologyError(f"{source}:{lineno}: self-loop on {l.a!r}")
        topo.links.append(l)
    if not topo.is_connected():
        raise TopologyError(f"{source}: topology is not connected")
    return topo


def load_topology(path: PathLike) -> Topology:
    path = Path(path)
    return parse_topology(path.read_text(), str(path))


def dump_topology(topo: Topology, header: str = "") -> str:
    buf = io.StringIO()
    for line in header.splitlines():
        buf.write(f"# {line}\n")
    for nid, role in topo.roles.items():
        buf.write(f"node {nid} {role}\n")
    for l in topo.links:
        buf.write(f"link {l.a} {l.b} {l.bandwidth_bps} {l.prop_ns}\n")
    return buf.getvalue()


@dataclass
class Catalog:
    """Files in popularity-rank order and the servers hosting each."""

    files: list[Name]
    hosts: dict[Name, tuple[str, ...]]
    segments_per_file: int = 10

    def __post_init__(self) -> None:
        if self.segments_per_file < 1:
            raise ValueError("segments_per_file must be >= 1")
        for f in self.files:
            if not self.hosts.get(f):
                raise ValueError(f"file {f} has no hosting server")

    def __len__(self) -> int:
        return len(self.files)

    def files_of(self, server: str) -> list[Name]:
        return [f for f in self.files if server in self.hosts[f]]


def parse_catalog(text: str, segments_per_file: int = 10, source: str = "<catalog>") -> Catalog:
    files: list[Name] = []
    hosts: dict[Name, tuple[str, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] != "file" or len(parts) != 3:
            raise TopologyError(f"{source}:{lineno}: expected 'file <name> <server>[,<server>...]'")
        try:
            name = parse(parts[1])
        except NameError_ as exc:
            raise TopologyError(f"{source}:{lineno}: {exc}") from None
        servers = tuple(s for s in parts[2].split(",") if s)
        if not servers:
            raise TopologyError(f"{source}:{lineno}: no server listed")
        if name in hosts:
            raise TopologyError(f"{source}:{lineno}: duplicate file {name}")
        files.append(name)
        hosts[name] = servers
    return Catalog(files, hosts, segments_per_file)


def load_catalog(path: PathLike, segments_per_file: int = 10) -> Catalog:
    path = Path(path)
    return parse_catalog(path.read_text(), segments_per_file, str(path))


def dump_catalog(cat: Catalog) -> str:
    return "".join(f"file {f.uri} {','.join(cat.hosts[f])}\n" for f in cat.files)


def synthetic_catalog(
    universe_size: int,
    servers: list[str],
    segments_per_file: int = 10,
    names: Optional[Iterable[Name]] = None,
) -> Catalog:
    """Rank-ordered catalogue, files dealt round-robin to servers.

    Default names are ``/site<i>/dir<j>/file<rank>`` with 50 sites and 20
    directories per site.
    """
    if universe_size < 1:
        raise ValueError("universe_size must be >= 1")
    if not servers:
        raise ValueError("need at least one server")
    if names is None:
        files = [
            Name((f"site{r % 50}", f"dir{(r // 50) % 20}", f"file{r}")) for r in range(universe_size)
        ]
    else:
        files = list(names)[:universe_size]
        if len(files) < universe_size:
            raise ValueError(f"only {len(files)} names available for universe of {universe_size}")
    hosts = {f: (servers[r % len(servers)],) for r, f in enumerate(files)}
    return Catalog(files, hosts, segments_per_file)


# A 40-PoP European research backbone in the spirit of GEANT.
GEANT40_EDGES = [
    ("UK", "IE"), ("UK", "NL"), ("UK", "FR"), ("UK", "IS"), ("UK", "PT"),
    ("NL", "BE"), ("NL", "DE"), ("NL", "DK"), ("BE", "FR"), ("BE", "LU"),
    ("LU", "DE"), ("FR", "CH"), ("FR", "ES"), ("FR", "DE"), ("ES", "PT"),
    ("ES", "IT"), ("CH", "IT"), ("CH", "DE"), ("CH", "AT"), ("IT", "AT"),
    ("IT", "MT"), ("IT", "GR"), ("IT", "SI"), ("IT", "IL"), ("DE", "DK"),
    ("DE", "CZ"), ("DE", "PL"), ("DE", "AT"), ("DK", "SE"), ("DK", "NO"),
    ("DK", "IS"), ("SE", "NO"), ("SE", "FI"), ("FI", "EE"), ("EE", "LV"),
    ("LV", "LT"), ("LT", "PL"), ("PL", "CZ"), ("PL", "BY"), ("PL", "UA"),
    ("CZ", "SK"), ("SK", "AT"), ("SK", "HU"), ("AT", "SI"), ("AT", "HU"),
    ("SI", "HR"), ("HR", "HU"), ("HR", "BA"), ("HU", "RO"), ("HU", "RS"),
    ("RS", "BA"), ("RS", "ME"), ("RS", "MK"), ("ME", "AL"), ("MK", "BG"),
    ("RO", "BG"), ("RO", "MD"), ("MD", "UA"), ("BG", "GR"), ("GR", "CY"),
    ("CY", "IL"), ("GR", "MK"), ("AL", "GR"), ("SE", "EE"), ("UA", "BY"),
]


def geant40_topology(
    seed: int = 2017,
    n_servers: int = 10,
    n_clients: int = 50,
    bandwidth_bps: int = 1_000_000_000,
    prop_range_ns: tuple[int, int] = (1_000_000, 10_000_000),
) -> Topology:
    """Build the GEANT-like fixture with hosts attached to random routers."""
    rng = np.random.default_rng(seed)
    routers = sorted({r for e in GEANT40_EDGES for r in e})
    topo = Topology()
    for r in routers:
        topo.roles[f"R_{r}"] = "router"
    lo, hi = prop_range_ns

    def prop() -> int:
        return int(rng.integers(lo, hi + 1))

    for a, b in GEANT40_EDGES:
        topo.links.append(LinkSpec(f"R_{a}", f"R_{b}", bandwidth_bps, prop()))
    for i in range(n_servers):
        sid = f"S{i}"
        topo.roles[sid] = "server"
        at = routers[int(rng.integers(len(routers)))]
        topo.links.append(LinkSpec(sid, f"R_{at}", bandwidth_bps, prop()))
    for i in range(n_clients):
        cid = f"C{i}"
        topo.roles[cid] = "client"
        at = routers[int(rng.integers(len(routers)))]
        topo.links.append(LinkSpec(cid, f"R_{at}", bandwidth_bps, prop()))
    topo.validate()
    return topo


def bundled_topology_path(name: str = "geant40.topo") -> Path:
    return Path(str(resources.files("pullbfr.data").joinpath(name)))
