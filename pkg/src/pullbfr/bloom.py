"""Bloom filters and the aggregation algebra used by CAR/CA messages.

Bit vectors are Python integers (bit ``i`` of the integer is filter index
``i``), which makes OR/AND/XOR on whole filters single operations.  The
hash family is double hashing over a 128-bit keyed BLAKE2b digest of the
canonical name encoding: ``index_i = (h1 + i*h2) mod m``.

:class:`ExactFilter` implements the same interface on top of a Python set;
it has no false positives and is used to isolate protocol behaviour from
filter noise.
"""

from __future__ import annotations

import enum
import hashlib
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .names import Name

__all__ = [
    "DEFAULT_SEED",
    "BfParams",
    "BloomFilter",
    "ExactFilter",
    "Decision",
    "ParamsMismatch",
    "size_for",
    "capacity_for",
    "make_params",
    "may_aggregate",
    "NameIndex",
]

DEFAULT_SEED = b"NDN"
LN2_SQ = math.log(2) ** 2

NameLike = Union[Name, str]


class ParamsMismatch(ValueError):
    """Two filters with different parameters were combined."""


def _check_p(p: float) -> None:
    if not (0.0 < p < 1.0):
        raise ValueError(f"false-positive probability must be in (0, 1), got {p}")


def size_for(n: int, p: float) -> tuple[int, int]:
    """Bit-vector size and hash count for ``n`` elements at rate ``p``.

    ``m`` is rounded up and ``k`` to the nearest integer (at least 1).

    >>> size_for(1000, 0.0638)
    (5728, 4)
    """
    _check_p(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    m = math.ceil(-n * math.log(p) / LN2_SQ)
    k = max(1, round(m / n * math.log(2)))
    return m, k


def capacity_for(m_bits: int, p: float) -> int:
    """Largest element count a filter of ``m_bits`` holds at rate ``p``."""
    _check_p(p)
    if m_bits < 1:
        raise ValueError("m_bits must be >= 1")
    return math.floor(-m_bits * LN2_SQ / math.log(p))


@dataclass(frozen=True)
class BfParams:
    m_bits: int
    k: int
    seed: bytes = DEFAULT_SEED
    n_max: int = 1

    def __post_init__(self) -> None:
        if self.k < 1 or self.m_bits < self.k:
            raise ValueError(f"need m_bits >= k >= 1, got m={self.m_bits} k={self.k}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def m_bytes(self) -> int:
        return (self.m_bits + 7) // 8

    @property
    def wire_size(self) -> int:
        """Serialized filter length in bytes (header + bit vector)."""
        return 16 + len(self.seed) + self.m_bytes


def make_params(n: int, p: float, seed: bytes = DEFAULT_SEED) -> BfParams:
    """Parameters sized for ``n`` elements at rate ``p`` with capacity from the inverse."""
    m, k = size_for(n, p)
    return BfParams(m_bits=m, k=k, seed=seed, n_max=capacity_for(m, p))


def _encode(name: NameLike) -> bytes:
    if isinstance(name, Name):
        return name.encode()
    if isinstance(name, bytes):
        return name
    return str(name).encode("utf-8")


def hash_indices(data: bytes, params: BfParams) -> list[int]:
    digest = hashlib.blake2b(data, digest_size=16, key=params.seed).digest()
    h1 = int.from_bytes(digest[:8], "little")
    h2 = int.from_bytes(digest[8:], "little")
    m = params.m_bits
    return [(h1 + i * h2) % m for i in range(params.k)]


@lru_cache(maxsize=1 << 18)
def _mask(data: bytes, params: BfParams) -> int:
    mask = 0
    for i in hash_indices(data, params):
        mask |= 1 << i
    return mask


class Decision(enum.Enum):
    IDENTICAL = "identical"
    USE_A = "use_a"
    USE_B = "use_b"
    UNION = "union"
    REFUSE = "refuse"


class BloomFilter:
    """Fixed-size Bloom filter with a conservative insert counter."""

    __slots__ = ("params", "bits", "count")

    def __init__(self, params: BfParams, bits: int = 0, count: int = 0):
        self.params = params
        self.bits = bits
        self.count = count

    @classmethod
    def from_names(cls, params: BfParams, names: Iterable[NameLike]) -> "BloomFilter":
        bf = cls(params)
        for n in names:
            bf.insert(n)
        return bf

    def copy(self) -> "BloomFilter":
        return BloomFilter(self.params, self.bits, self.count)

    def insert(self, name: NameLike) -> "BloomFilter":
        self.bits |= _mask(_encode(name), self.params)
        self.count += 1
        return self

    def contains(self, name: NameLike) -> bool:
        mask = _mask(_encode(name), self.params)
        return self.bits & mask == mask

    __contains__ = contains

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def _same(self, other: "BloomFilter") -> None:
        if not isinstance(other, BloomFilter) or other.params != self.params:
            raise ParamsMismatch("filters have different parameters")

    def is_identical(self, other: "BloomFilter") -> bool:
        self._same(other)
        return self.bits ^ other.bits == 0

    def is_subset(self, other: "BloomFilter") -> bool:
        """True when every set bit of ``self`` is also set in ``other``."""
        self._same(other)
        return self.bits & other.bits == self.bits

    def union(self, other: "BloomFilter") -> "BloomFilter":
        self._same(other)
        return BloomFilter(self.params, self.bits | other.bits, self.count + other.count)

    def matches(self, index: "NameIndex") -> np.ndarray:
        """Vectorised membership for every name in ``index``."""
        idx = index.indices(self.params)
        if idx.size == 0:
            return np.zeros(0, dtype=bool)
        vec = self.bit_array()
        return vec[idx].all(axis=1)

    def bit_array(self) -> np.ndarray:
        raw = np.frombuffer(self.bits.to_bytes(self.params.m_bytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.params.m_bits].astype(bool)

    @property
    def wire_size(self) -> int:
        return self.params.wire_size

    def to_bytes(self) -> bytes:
        p = self.params
        head = struct.pack("<IIII", p.m_bits, p.k, self.count, len(p.seed))
        return head + p.seed + self.bits.to_bytes(p.m_bytes, "little")

    @classmethod
    def from_bytes(cls, data: bytes, n_max: int) -> "BloomFilter":
        m_bits, k, count, seed_len = struct.unpack_from("<IIII", data, 0)
        seed = bytes(data[16 : 16 + seed_len])
        body = data[16 + seed_len :]
        m_bytes = (m_bits + 7) // 8
        if len(body) != m_bytes:
            raise ValueError(f"expected {m_bytes} bit-vector bytes, got {len(body)}")
        bits = int.from_bytes(body, "little")
        if bits >> m_bits:
            raise ValueError("bits set beyond m_bits")
        return cls(BfParams(m_bits, k, seed, n_max), bits, count)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, BloomFilter)
            and self.params == other.params
            and self.bits == other.bits
            and self.count == other.count
        )

    def __repr__(self) -> str:
        return f"BloomFilter(m={self.params.m_bits}, k={self.params.k}, count={self.count}, ones={self.popcount()})"


class ExactFilter:
    """Set-backed stand-in for :class:`BloomFilter` (no false positives).

    Parameters and wire size are those of the Bloom filter it replaces so that
    byte accounting stays comparable.
    """

    __slots__ = ("params", "members", "count")

    def __init__(self, params: BfParams, members: Iterable[bytes] = (), count: int = 0):
        self.params = params
        self.members = set(members)
        self.count = count

    @classmethod
    def from_names(cls, params: BfParams, names: Iterable[NameLike]) -> "ExactFilter":
        f = cls(params)
        for n in names:
            f.insert(n)
        return f

    def copy(self) -> "ExactFilter":
        return ExactFilter(self.params, self.members, self.count)

    def insert(self, name: NameLike) -> "ExactFilter":
        self.members.add(_encode(name))
        self.count += 1
        return self

    def contains(self, name: NameLike) -> bool:
        return _encode(name) in self.members

    __contains__ = contains

    def _same(self, other: "ExactFilter") -> None:
        if not isinstance(other, ExactFilter) or other.params != self.params:
            raise ParamsMismatch("filters have different parameters")

    def is_identical(self, other: "ExactFilter") -> bool:
        self._same(other)
        return self.members == other.members

    def is_subset(self, other: "ExactFilter") -> bool:
        self._same(other)
        return self.members <= other.members

    def union(self, other: "ExactFilter") -> "ExactFilter":
        self._same(other)
        return ExactFilter(self.params, self.members | other.members, self.count + other.count)

    def matches(self, index: "NameIndex") -> np.ndarray:
        return np.fromiter((e in self.members for e in index.encoded), dtype=bool, count=len(index))

    @property
    def wire_size(self) -> int:
        return self.params.wire_size

    def __repr__(self) -> str:
        return f"ExactFilter(size={len(self.members)}, count={self.count})"


Filter = Union[BloomFilter, ExactFilter]


def may_aggregate(a: Filter, b: Filter) -> Decision:
    """Decide how two filters combine, in the order identity, subset, capacity.

    The union count is the conservative sum of both counts; union is only
    allowed while that sum stays strictly below ``n_max``.
    """
    if a.is_identical(b):
        return Decision.IDENTICAL
    if a.is_subset(b):
        return Decision.USE_B
    if b.is_subset(a):
        return Decision.USE_A
    if a.count + b.count < a.params.n_max:
        return Decision.UNION
    return Decision.REFUSE


class NameIndex:
    """A fixed list of names with hash indices cached per parameter set.

    Servers use this to test their whole catalogue against an incoming
    filter in one vectorised step.
    """

    def __init__(self, names: Sequence[NameLike]):
        self.names = list(names)
        self.encoded = [_encode(n) for n in self.names]
        self._cache: dict[BfParams, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.names)

    def indices(self, params: BfParams) -> np.ndarray:
        idx = self._cache.get(params)
        if idx is None:
            idx = np.array(
                [hash_indices(e, params) for e in self.encoded], dtype=np.int64
            ).reshape(len(self.encoded), params.k)
            self._cache[params] = idx
        return idx
