"""Forwarding behaviour of the three strategies on hand-built networks."""

import pytest

from netkit import MS, Net
from pullbfr.engine import serialization_ns
from pullbfr.names import parse, prefixes
from pullbfr.protocols.push import _inserted_names, partition_catalog
from pullbfr.tables import MsgKind

GBPS = 1_000_000_000

LINE = f"""
node C client
node R router
node S server
link C R {GBPS} {2 * MS}
link R S {GBPS} {3 * MS}
"""

# two clients behind one router: the router has three faces
FORK = f"""
node C1 client
node C2 client
node R router
node S server
link C1 R {GBPS} {MS}
link C2 R {GBPS} {MS}
link R S {GBPS} {MS}
"""

TWO_SERVERS = f"""
node C client
node R router
node S1 server
node S2 server
link C R {GBPS} {MS}
link R S1 {GBPS} {MS}
link R S2 {GBPS} {MS}
"""


class TestPull:
    def test_car_on_empty_tables_then_release(self):
        net = Net(LINE, "pull-bfr", {"S": ["/a/f"]})
        net.request("C", "/a/f/s0")
        net.run()
        assert net.apps["C"].data and not net.apps["C"].failed
        # one CAR out and back as CA over each of the two links
        assert [(s, d) for _, s, d, _, _ in net.sent(MsgKind.CAR)] == [("C", "R"), ("R", "S")]
        assert [(s, d) for _, s, d, _, _ in net.sent(MsgKind.CA)] == [("S", "R"), ("R", "C")]
        assert net.stats.cars_originated == 1 and net.stats.cas_originated == 1
        assert all(not n.pending for n in net.nodes.values())
        # the Interest only leaves the client once the CA is back
        ca_back = net.sent(MsgKind.CA, "R", "C")[0][0]
        first_interest = net.sent(MsgKind.INTEREST, "C")[0][0]
        assert first_interest > ca_back

    def test_second_segment_uses_the_installed_route(self):
        net = Net(LINE, "pull-bfr", {"S": ["/a/f"]})
        net.request("C", "/a/f/s0")
        net.request("C", "/a/f/s1", at=500 * MS)
        net.run()
        assert len(net.apps["C"].data) == 2
        assert net.stats.cars_originated == 1
        assert net.nodes["C"].fib.lookup(parse("/a/f/s1"))[1] == {0}

    def test_server_ca_holds_only_requested_names(self):
        net = Net(LINE, "pull-bfr", {"S": ["/a/f", "/b/g"]})
        net.request("C", "/a/f/s0")
        net.run()
        own = [e for e in net.nodes["S"].adverts.entries.values() if e.own]
        assert len(own) == 1
        filt = own[0].filter
        assert all(filt.contains(p) for p in prefixes(parse("/a/f")))
        assert not filt.contains(parse("/b/g")) and not filt.contains(parse("/b"))
        assert filt.count == 2

    def test_no_ca_for_unhosted_file(self):
        net = Net(LINE, "pull-bfr", {"S": ["/a/f"]}, retry_cap=1, interest_lifetime=100 * MS)
        net.request("C", "/z/q/s0")
        net.run()
        assert net.stats.cas_originated == 0
        assert net.apps["C"].failed and not net.apps["C"].data
        assert net.nodes["C"].pending == {}

    def test_router_aggregates_cars_from_two_faces(self):
        net = Net(FORK, "pull-bfr", {"S": ["/a/f", "/b/g"]})
        net.request("C1", "/a/f/s0")
        net.request("C2", "/b/g/s0")
        net.run()
        to_server = net.sent(MsgKind.CAR, "R", "S")
        assert len(to_server) == 1 and to_server[0][4].startswith("/CAR/aggregated/R/")
        assert net.stats.aggregates_created >= 1
        # each client sees only the other client's CAR, unaggregated
        assert [e[4] for e in net.sent(MsgKind.CAR, "R", "C1")] == [net.sent(MsgKind.CAR, "C2", "R")[0][4]]
        assert [e[4] for e in net.sent(MsgKind.CAR, "R", "C2")] == [net.sent(MsgKind.CAR, "C1", "R")[0][4]]
        assert len(net.apps["C1"].data) == 1 and len(net.apps["C2"].data) == 1

    def test_aggregation_waits_delta(self):
        delta = 5 * MS
        net = Net(FORK, "pull-bfr", {"S": ["/a/f"]}, delta=delta)
        net.request("C1", "/a/f/s0")
        net.run()
        car_in = net.sent(MsgKind.CAR, "C1", "R")[0][0]
        arrive = car_in + serialization_ns(net.params.advert_size, GBPS) + MS
        assert net.sent(MsgKind.CAR, "R", "S")[0][0] == arrive + delta

    def test_wrong_server_nack_removes_next_hop_and_recovers(self):
        net = Net(TWO_SERVERS, "pull-bfr", {"S1": ["/a/f"]})
        r = net.nodes["R"]
        bad = net.face("R", "S2")
        r.fib.add(parse("/a"), [bad])
        net.request("C", "/a/f/s0")
        net.run()
        assert net.stats.wrong_server_interests == 1
        nacks = net.sent(MsgKind.NACK, "S2", "R")
        assert len(nacks) == 1
        assert bad not in (r.fib.entries.get(parse("/a")) or set())
        assert net.apps["C"].data and not net.apps["C"].failed
        assert len(net.sent(MsgKind.INTEREST, "R", "S1")) == 1

    def test_no_data_nack_distrusts_the_advert(self):
        net = Net(TWO_SERVERS, "pull-bfr", {"S1": ["/a/f"]})
        r = net.nodes["R"]
        bad = net.face("R", "S2")
        origin = parse("/CA/S2/1")
        r.install(parse("/a"), {bad: {origin}})
        net.request("C", "/a/f/s0")
        net.run()
        assert (parse("/a"), origin) in r.bad
        assert net.apps["C"].data


class TestPush:
    def test_periodic_catalogue_adverts_route_without_flooding(self):
        net = Net(LINE, "push-bfr", {"S": ["/a/f"]}, f_r=1.0)
        for n in net.nodes.values():
            n.start(2_500 * MS)
        net.request("C", "/a/f/s0", at=100 * MS)
        net.run(3_000 * MS)
        # adverts at t = 0, 1, 2 s, each crossing both links
        assert net.stats.cas_originated == 3
        assert len(net.sent(MsgKind.CA)) == 6
        assert net.stats.floods == 0
        assert net.apps["C"].data
        assert net.sent(MsgKind.CAR) == []

    def test_unknown_name_floods(self):
        net = Net(LINE, "push-bfr", {"S": ["/a/f"]}, f_r=1.0)
        net.request("C", "/a/f/s0")
        net.run()
        assert net.stats.floods >= 1 and net.apps["C"].data

    def test_partition_respects_capacity(self):
        files = [parse(f"/site{r % 50}/dir{(r // 50) % 20}/file{r}") for r in range(5000)]
        groups = partition_catalog(files, 1000)
        assert sorted(f for g in groups for f in g) == sorted(files)
        assert all(len(_inserted_names(g)) <= 1000 for g in groups)
        assert partition_catalog(files, 1000) == groups
        assert partition_catalog([], 1000) == []

    def test_catalogue_filters_cover_prefixes(self):
        net = Net(LINE, "push-bfr", {"S": ["/a/f", "/b/g"]})
        (filt,) = net.nodes["S"].catalog_filters()
        assert filt.members == {b"/a", b"/a/f", b"/b", b"/b/g"}
        assert filt.count == 4


# C2 hangs off a side branch that C1's flood passes through
SIDE_BRANCH = f"""
node C1 client
node C2 client
node R1 router
node R2 router
node S server
link C1 R1 {GBPS} {MS}
link R1 S {GBPS} {20 * MS}
link R1 R2 {GBPS} {MS}
link R2 C2 {GBPS} {MS}
"""


class TestFar:
    def test_request_behind_flood_branch_is_forwarded(self):
        # the flood leaves a PIT entry at R2 pointing away from S; C2's own
        # request arriving a few ms later must still travel upstream
        net = Net(SIDE_BRANCH, "far", {"S": ["/a/f"]})
        net.request("C1", "/a/f/s0")
        net.request("C2", "/a/f/s0", at=5 * MS)
        net.run()
        assert [n for _, n in net.apps["C2"].data] == ["/a/f/s0"]
        assert net.apps["C2"].data[0][0] < 100 * MS
        assert any(t > 5 * MS for t, *_ in net.sent(MsgKind.INTEREST, "R2", "R1"))

    def test_learns_route_from_data(self):
        net = Net(LINE, "far", {"S": ["/a/f"]})
        net.request("C", "/a/f/s0")
        net.request("C", "/a/f/s1", at=500 * MS)
        net.run()
        assert len(net.apps["C"].data) == 2
        assert net.stats.floods == 2  # client and router, first segment only
        assert net.nodes["R"].fib.lookup(parse("/a/f/s9")) == (parse("/a/f"), {net.face("R", "S")})
        assert net.sent(MsgKind.CAR) == [] and net.sent(MsgKind.CA) == []

    def test_flooded_interest_at_wrong_server_is_silent(self):
        net = Net(TWO_SERVERS, "far", {"S1": ["/a/f"]})
        net.request("C", "/a/f/s0")
        net.run()
        assert net.apps["C"].data
        assert net.sent(MsgKind.NACK) == []
        assert net.stats.wrong_server_interests == 0
        assert net.stats.server_interest_arrivals == 2


@pytest.mark.parametrize("strategy", ["pull-bfr", "push-bfr", "far"])
def test_content_store_answers_repeat_requests(strategy):
    net = Net(FORK, strategy, {"S": ["/a/f"]})
    for n in net.nodes.values():
        if hasattr(n, "start"):
            n.start(0)
    net.request("C1", "/a/f/s0", at=10 * MS)
    net.request("C2", "/a/f/s0", at=500 * MS)
    net.run()
    assert net.apps["C1"].data and net.apps["C2"].data
    assert net.stats.cs_hits >= 1
    assert len(net.sent(MsgKind.DATA, "S", "R")) == 1


@pytest.mark.parametrize("strategy", ["pull-bfr", "push-bfr", "far"])
def test_single_hop_rtt_closed_form(strategy):
    net = Net(f"node C client\nnode S server\nlink C S {GBPS} {4 * MS}\n", strategy, {"S": ["/a"]})
    c = net.nodes["C"]
    c.fib.add(parse("/a"), [0])
    net.request("C", "/a/s0", at=MS)
    net.run()
    expected = 2 * 4 * MS + serialization_ns(40, GBPS) + serialization_ns(1064, GBPS)
    assert net.apps["C"].data == [(MS + expected, "/a/s0")]
