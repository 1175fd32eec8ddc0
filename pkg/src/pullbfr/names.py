"""Hierarchical NDN names.

A :class:`Name` is an immutable tuple of non-empty string components.  Its
canonical text form (``/a/b/c``) is also the byte encoding fed to the Bloom
filter hash family, so two implementations that agree on the text agree on
the bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "Name",
    "NameError_",
    "parse",
    "prefixes",
    "is_prefix_of",
    "FileId",
    "segment_name",
    "file_of",
    "segment_index",
    "names_from_urls",
]

SEGMENT_MARK = "s"


class NameError_(ValueError):
    """Raised for malformed name text."""


class Name(tuple):
    """Component-structured content name.

    Behaves as a tuple of ``str``; ``str(name)`` gives the canonical URI.
    """

    __slots__ = ()

    def __new__(cls, components: Iterable[str]):
        comps = tuple(components)
        if not comps:
            raise NameError_("a name needs at least one component")
        for c in comps:
            if not c or "/" in c:
                raise NameError_(f"invalid component {c!r}")
        return super().__new__(cls, comps)

    @property
    def uri(self) -> str:
        return "/" + "/".join(self)

    def __str__(self) -> str:
        return self.uri

    def __repr__(self) -> str:
        return f"Name({self.uri!r})"

    def encode(self) -> bytes:
        """Canonical byte encoding used for hashing."""
        return self.uri.encode("utf-8")

    def append(self, component: str) -> "Name":
        return Name(tuple(self) + (component,))

    def prefix(self, length: int) -> "Name":
        return Name(self[:length])


def parse(text: str) -> Name:
    """Parse ``/a/b/c`` into a :class:`Name`.

    >>> parse("/ch/unibe/v1")
    Name('/ch/unibe/v1')
    """
    if not text.startswith("/"):
        raise NameError_(f"name must start with '/': {text!r}")
    body = text[1:]
    if body.endswith("/"):
        body = body[:-1]
    parts = body.split("/")
    if any(p == "" for p in parts):
        raise NameError_(f"empty component in {text!r}")
    return Name(parts)


def prefixes(name: Name) -> list[Name]:
    """All prefixes of ``name`` including itself, shortest first."""
    return [Name(name[:i]) for i in range(1, len(name) + 1)]


def is_prefix_of(p: Name, n: Name) -> bool:
    return len(p) <= len(n) and tuple(n[: len(p)]) == tuple(p)


@dataclass(frozen=True)
class FileId:
    file: Name
    segment_index: int


def segment_name(f: FileId) -> Name:
    """``/a/b`` segment 3 -> ``/a/b/s3``."""
    if f.segment_index < 0:
        raise ValueError("segment index must be non-negative")
    return f.file.append(f"{SEGMENT_MARK}{f.segment_index}")


def _is_segment_component(c: str) -> bool:
    return len(c) > 1 and c[0] == SEGMENT_MARK and c[1:].isdigit()


def file_of(name: Name) -> Name:
    """Strip a trailing segment component, if any."""
    if len(name) > 1 and _is_segment_component(name[-1]):
        return Name(name[:-1])
    return name


def segment_index(name: Name) -> int | None:
    if len(name) > 1 and _is_segment_component(name[-1]):
        return int(name[-1][1:])
    return None


def names_from_urls(lines: Iterable[str]) -> list[Name]:
    """Convert URL lines to names by splitting on '/'.

    Scheme and empty components are dropped, duplicates removed while
    keeping first-seen order.
    """
    seen: dict[Name, None] = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "://" in line:
            line = line.split("://", 1)[1]
        line = line.split("?", 1)[0].split("#", 1)[0]
        parts = [p for p in line.split("/") if p]
        if parts:
            seen.setdefault(Name(parts), None)
    return list(seen)
