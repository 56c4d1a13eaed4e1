"""Node partitions shared by the modularity and entropy estimators."""
from __future__ import annotations

import io
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ParseError
from .graph import Graph


class Partition:
    """Total assignment of nodes to disjoint, non-empty modules.

    Module ids are renumbered densely in order of first appearance when
    scanning nodes ``0..n-1``, so two assignments that differ only by module
    names compare equal.
    """

    __slots__ = ("assignment", "module_count")

    def __init__(self, assignment: Sequence[int] | np.ndarray):
        raw = np.asarray(assignment, dtype=np.int64)
        if raw.ndim != 1:
            raise ValueError("assignment must be one-dimensional")
        _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
        rank = np.empty(first.shape[0], dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.shape[0])
        dense = rank[inverse].reshape(-1)
        dense.setflags(write=False)
        object.__setattr__(self, "assignment", dense)
        object.__setattr__(self, "module_count", int(first.shape[0]))

    def __setattr__(self, name, value):
        raise AttributeError("Partition is immutable")

    @classmethod
    def single(cls, n: int) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64))

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def from_modules(cls, n: int, modules: Iterable[Iterable[int]]) -> "Partition":
        assignment = np.full(n, -1, dtype=np.int64)
        for c, members in enumerate(modules):
            for v in members:
                if assignment[v] >= 0:
                    raise ValueError(f"node {v} assigned twice")
                assignment[v] = c
        if (assignment < 0).any():
            raise ValueError("every node must belong to a module")
        return cls(assignment)

    @property
    def n(self) -> int:
        return int(self.assignment.shape[0])

    def modules(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.module_count)]
        for v, c in enumerate(self.assignment):
            out[c].append(v)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Partition(n={self.n}, modules={self.module_count})"


def module_stats(G: Graph, P: Partition) -> tuple[np.ndarray, np.ndarray]:
    """Per-module ``(internal_edges, volume)`` arrays."""
    if P.n != G.n:
        raise ValueError("partition and graph sizes differ")
    a = P.assignment
    vol = np.bincount(a, weights=G.degrees, minlength=P.module_count).astype(np.int64)
    edges = G.edge_array()
    same = a[edges[:, 0]] == a[edges[:, 1]]
    internal = np.bincount(a[edges[same, 0]], minlength=P.module_count).astype(np.int64)
    return internal, vol


def format_partition(P: Partition) -> str:
    return "".join(f"{v} {c}\n" for v, c in enumerate(P.assignment))


def parse_partition(stream: TextIO | str) -> Partition:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    pairs: dict[int, int] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            v, c = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise ParseError(f"expected 'node_id module_id', got {line!r}", lineno) from None
        if v in pairs:
            raise ParseError(f"node {v} listed twice", lineno)
        pairs[v] = c
    n = len(pairs)
    if sorted(pairs) != list(range(n)):
        raise ParseError("node ids must cover 0..n-1")
    return Partition([pairs[v] for v in range(n)])


def restricted_growth_strings(n: int):
    """Yield every set partition of ``n`` items as a restricted growth string."""
    if n == 0:
        yield np.zeros(0, dtype=np.int64)
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield np.array(a, dtype=np.int64)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for k in range(i + 1, n):
            a[k] = 0
            b[k] = max(b[k - 1], a[k - 1] + 1)
