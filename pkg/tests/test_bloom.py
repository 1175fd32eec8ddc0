"""Bloom filter sizing, hashing, set algebra and aggregation decisions."""

import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pullbfr.bloom import (
    BfParams,
    BloomFilter,
    Decision,
    ExactFilter,
    NameIndex,
    ParamsMismatch,
    capacity_for,
    hash_indices,
    make_params,
    may_aggregate,
    size_for,
)
from pullbfr.names import parse

P = make_params(1000, 0.0638)

# Reference indices computed by hand with hashlib (keyed BLAKE2b-128, key
# b"NDN", h1 = low 8 bytes LE, h2 = high 8 bytes LE, index_i = h1 + i*h2 mod m).
FROZEN_INDICES = {
    "/site1/dir0/file1": [2337, 4564, 1063, 3290],
    "/site1": [2891, 1245, 5327, 3681],
    "/a/b": [3352, 5375, 1670, 3693],
}


def _reference_indices(data: bytes, m: int, k: int, key: bytes = b"NDN") -> list[int]:
    d = hashlib.blake2b(data, digest_size=16, key=key).digest()
    h1 = int.from_bytes(d[:8], "little")
    h2 = int.from_bytes(d[8:], "little")
    return [(h1 + i * h2) % m for i in range(k)]


name_text = st.lists(st.text("abcdefgh0123", min_size=1, max_size=6), min_size=1, max_size=4).map(
    lambda cs: "/" + "/".join(cs)
)


class TestSizing:
    def test_design_point(self):
        assert size_for(1000, 0.0638) == (5728, 4)
        assert capacity_for(5728, 0.0638) == 1000

    def test_make_params_design_point(self):
        assert P == BfParams(m_bits=5728, k=4, seed=b"NDN", n_max=1000)
        assert P.m_bytes == 716
        assert P.wire_size == 16 + 3 + 716

    @pytest.mark.parametrize("p, m, k", [(0.1276, 4286, 3), (0.2552, 2843, 2)])
    def test_looser_rates_shrink_the_filter(self, p, m, k):
        params = make_params(1000, p)
        assert (params.m_bits, params.k, params.n_max) == (m, k, 1000)

    def test_closed_form(self):
        m = math.ceil(-1000 * math.log(0.01) / math.log(2) ** 2)
        assert size_for(1000, 0.01)[0] == m == 9586

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_bad_rate(self, p):
        with pytest.raises(ValueError):
            size_for(10, p)
        with pytest.raises(ValueError):
            capacity_for(100, p)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            size_for(0, 0.1)
        with pytest.raises(ValueError):
            capacity_for(0, 0.1)
        with pytest.raises(ValueError):
            BfParams(m_bits=3, k=4)
        with pytest.raises(ValueError):
            BfParams(m_bits=8, k=1, n_max=0)

    @given(st.integers(1, 5000), st.floats(0.001, 0.5))
    def test_capacity_inverts_size(self, n, p):
        m, _ = size_for(n, p)
        assert capacity_for(m, p) >= n


class TestHashing:
    @pytest.mark.parametrize("text", sorted(FROZEN_INDICES))
    def test_frozen_indices(self, text):
        assert hash_indices(parse(text).encode(), P) == FROZEN_INDICES[text]

    @given(name_text)
    def test_matches_reference(self, text):
        data = parse(text).encode()
        assert hash_indices(data, P) == _reference_indices(data, P.m_bits, P.k)

    def test_seed_changes_indices(self):
        other = BfParams(P.m_bits, P.k, b"other", P.n_max)
        data = b"/site1/dir0/file1"
        assert hash_indices(data, other) != hash_indices(data, P)

    def test_name_and_text_hash_alike(self):
        f = BloomFilter(P).insert("/a/b")
        assert f.contains(parse("/a/b"))


class TestFilter:
    def test_empty(self):
        f = BloomFilter(P)
        assert f.popcount() == 0 and f.count == 0
        assert not f.contains("/a")

    def test_insert_sets_k_bits(self):
        f = BloomFilter(P).insert("/site1/dir0/file1")
        assert f.popcount() == 4
        assert sorted(np.flatnonzero(f.bit_array())) == sorted(FROZEN_INDICES["/site1/dir0/file1"])

    def test_round_trip(self):
        f = BloomFilter.from_names(P, ["/a", "/a/b", "/c"])
        raw = f.to_bytes()
        assert len(raw) == P.wire_size == f.wire_size
        g = BloomFilter.from_bytes(raw, P.n_max)
        assert g == f and g.params == P and g.count == 3

    def test_union_and_mismatch(self):
        a = BloomFilter.from_names(P, ["/a"])
        b = BloomFilter.from_names(P, ["/b"])
        u = a.union(b)
        assert u.contains("/a") and u.contains("/b") and u.count == 2
        with pytest.raises(ParamsMismatch):
            a.union(BloomFilter(make_params(10, 0.1)))

    def test_matches_vectorised(self):
        idx = NameIndex(["/a", "/b", "/c"])
        f = BloomFilter.from_names(P, ["/a", "/c"])
        assert f.matches(idx).tolist() == [True, False, True]

    @given(st.sets(name_text, max_size=40))
    def test_no_false_negatives(self, texts):
        f = BloomFilter.from_names(P, texts)
        assert all(f.contains(t) for t in texts)

    @given(st.sets(name_text, max_size=20), st.sets(name_text, max_size=20))
    def test_union_keeps_every_member(self, xs, ys):
        u = BloomFilter.from_names(P, xs).union(BloomFilter.from_names(P, ys))
        assert all(u.contains(t) for t in xs | ys)

    @given(st.sets(name_text, max_size=20), st.sets(name_text, max_size=20))
    def test_subset_of_union(self, xs, ys):
        a = BloomFilter.from_names(P, xs)
        u = a.union(BloomFilter.from_names(P, ys))
        assert a.is_subset(u)


class TestExactFilter:
    def test_no_false_positives(self):
        f = ExactFilter.from_names(P, [f"/n{i}" for i in range(2000)])
        assert not any(f.contains(f"/m{i}") for i in range(2000))

    def test_same_wire_size_as_bloom(self):
        assert ExactFilter(P).wire_size == BloomFilter(P).wire_size

    def test_set_algebra(self):
        a = ExactFilter.from_names(P, ["/a"])
        ab = ExactFilter.from_names(P, ["/a", "/b"])
        assert a.is_subset(ab) and not ab.is_subset(a)
        assert a.union(ab).is_identical(ab)
        idx = NameIndex(["/a", "/b", "/z"])
        assert ab.matches(idx).tolist() == [True, True, False]


class TestMayAggregate:
    small = make_params(10, 0.1)

    def test_identical(self):
        a = BloomFilter.from_names(P, ["/a"])
        assert may_aggregate(a, a.copy()) is Decision.IDENTICAL

    def test_subset_picks_the_superset(self):
        a = BloomFilter.from_names(P, ["/a"])
        ab = BloomFilter.from_names(P, ["/a", "/b"])
        assert may_aggregate(a, ab) is Decision.USE_B
        assert may_aggregate(ab, a) is Decision.USE_A

    def test_union_below_capacity(self):
        a = BloomFilter.from_names(P, ["/a"])
        b = BloomFilter.from_names(P, ["/b"])
        assert may_aggregate(a, b) is Decision.UNION

    def test_refuses_at_capacity(self):
        # n_max = 10: 5 + 5 is not strictly below it
        a = ExactFilter.from_names(self.small, [f"/a{i}" for i in range(5)])
        b = ExactFilter.from_names(self.small, [f"/b{i}" for i in range(5)])
        assert self.small.n_max == 10
        assert may_aggregate(a, b) is Decision.REFUSE
        c = ExactFilter.from_names(self.small, [f"/b{i}" for i in range(4)])
        assert may_aggregate(a, c) is Decision.UNION

    @given(st.sets(name_text, max_size=8), st.sets(name_text, max_size=8))
    def test_exact_filters_follow_set_relations(self, xs, ys):
        a = ExactFilter.from_names(P, xs)
        b = ExactFilter.from_names(P, ys)
        d = may_aggregate(a, b)
        if xs == ys:
            assert d is Decision.IDENTICAL
        elif xs <= ys:
            assert d is Decision.USE_B
        elif ys <= xs:
            assert d is Decision.USE_A
        else:
            assert d is Decision.UNION

    @settings(max_examples=200)
    @given(st.sets(name_text, max_size=8), st.sets(name_text, max_size=8))
    def test_bloom_never_misses_a_true_subset(self, xs, ys):
        a = BloomFilter.from_names(P, xs)
        b = BloomFilter.from_names(P, ys | xs)
        assert may_aggregate(a, b) in (Decision.IDENTICAL, Decision.USE_B)
