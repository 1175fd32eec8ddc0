"""Topology and catalogue files, the bundled fixture and synthetic catalogues."""

import pytest

from pullbfr.names import parse
from pullbfr.topology import (
    Catalog,
    TopologyError,
    bundled_topology_path,
    dump_catalog,
    dump_topology,
    geant40_topology,
    load_catalog,
    load_topology,
    parse_catalog,
    parse_topology,
    synthetic_catalog,
)

SMALL = """
# a comment
node C client
node R router   # trailing comment
node S server
link C R 1000 10
link R S 2000 20
"""


def test_parse_small():
    t = parse_topology(SMALL)
    assert t.clients == ["C"] and t.routers == ["R"] and t.servers == ["S"]
    assert [(l.a, l.b, l.bandwidth_bps, l.prop_ns) for l in t.links] == [("C", "R", 1000, 10), ("R", "S", 2000, 20)]
    assert t.faces()["R"] == [(0, "C"), (1, "S")]
    assert parse_topology(dump_topology(t)) == t


@pytest.mark.parametrize(
    "text, msg",
    [
        ("node A alien", "unknown role"),
        ("node A client\nnode A router", "duplicate node"),
        ("node A client\nlink A B 1 1", "dangling"),
        ("node A client\nlink A A 1 1", "self-loop"),
        ("node A client\nnode B server\nlink A B 0 1", "bandwidth"),
        ("node A client\nnode B server\nlink A B x 1", "integers"),
        ("node A client\nnode B server", "not connected"),
        ("edge A B", "unknown directive"),
        ("node A", "expected"),
    ],
)
def test_parse_errors(text, msg):
    with pytest.raises(TopologyError, match=msg):
        parse_topology(text)


def test_scaled_capacity():
    t = parse_topology(SMALL).scaled(0.2)
    assert [l.bandwidth_bps for l in t.links] == [200, 400]
    assert [l.prop_ns for l in t.links] == [10, 20]


def test_bundled_fixture():
    t = load_topology(bundled_topology_path())
    assert (len(t.routers), len(t.servers), len(t.clients)) == (40, 10, 50)
    assert t.is_connected()
    assert all(l.bandwidth_bps == 1_000_000_000 for l in t.links)
    assert all(1_000_000 <= l.prop_ns <= 10_000_000 for l in t.links)
    # the shipped file is what the generator produces
    assert t == geant40_topology()


def test_bundled_catalogue():
    t = load_topology(bundled_topology_path())
    cat = load_catalog(bundled_topology_path("catalog1000.cat"))
    assert len(cat) == 1000
    assert {s for hs in cat.hosts.values() for s in hs} <= set(t.servers)
    assert cat.files[1].uri == "/site1/dir0/file1"


def test_catalogue_round_trip_and_errors():
    cat = parse_catalog("file /a/b S0,S1\nfile /c S1\n", segments_per_file=3)
    assert cat.hosts[parse("/a/b")] == ("S0", "S1")
    assert cat.files_of("S1") == [parse("/a/b"), parse("/c")]
    assert parse_catalog(dump_catalog(cat), 3) == cat
    with pytest.raises(TopologyError, match="duplicate"):
        parse_catalog("file /a S0\nfile /a S1\n")
    with pytest.raises(TopologyError, match="expected"):
        parse_catalog("file /a\n")
    with pytest.raises(TopologyError):
        parse_catalog("file a S0\n")
    with pytest.raises(ValueError):
        Catalog([parse("/a")], {}, 10)


def test_synthetic_catalogue():
    cat = synthetic_catalog(120, ["S0", "S1", "S2"])
    assert cat.files[0].uri == "/site0/dir0/file0"
    assert cat.files[51].uri == "/site1/dir1/file51"
    assert cat.hosts[cat.files[4]] == ("S1",)
    assert len(cat.files_of("S0")) == 40
    with pytest.raises(ValueError):
        synthetic_catalog(0, ["S0"])
    with pytest.raises(ValueError):
        synthetic_catalog(3, ["S0"], names=[parse("/a")])
