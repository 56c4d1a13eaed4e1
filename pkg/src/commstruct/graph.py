"""Undirected simple graphs in compressed adjacency form, plus SNAP edge-list I/O.

Node ids are dense ``0..n-1``. When a graph comes from a file, ``labels[v]``
holds the external id token that ``v`` was read from.
"""
from __future__ import annotations

import io
import os
from collections import deque
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import DomainError, EmptyGraphError, ParseError


class Graph:
    """Immutable undirected simple graph.

    Adjacency is stored as CSR arrays (``indptr``, ``indices``) with every
    neighbour list sorted ascending. Build instances with
    :meth:`Graph.from_edges` or :func:`parse_edge_list`.
    """

    __slots__ = ("n", "m", "indptr", "indices", "degrees", "labels")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray,
                 labels: Sequence[str] | None = None):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        if indptr.shape != (n + 1,):
            raise ValueError("indptr must have n + 1 entries")
        if indices.shape[0] % 2:
            raise ValueError("adjacency of an undirected graph has an even number of entries")
        degrees = np.diff(indptr)
        for arr in (indptr, indices, degrees):
            arr.setflags(write=False)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "m", int(indices.shape[0] // 2))
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "degrees", degrees)
        object.__setattr__(self, "labels", tuple(labels) if labels is not None else None)

    def __setattr__(self, name, value):
        raise AttributeError("Graph is immutable")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | np.ndarray,
                   labels: Sequence[str] | None = None) -> "Graph":
        """Build a graph on ``n`` nodes; self-loops are dropped and duplicates collapsed."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("edge endpoint out of range")
        arr = arr[arr[:, 0] != arr[:, 1]]
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = np.unique(lo * n + hi)
        lo, hi = keys // n, keys % n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return cls(n, indptr, dst, labels)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    def edge_array(self) -> np.ndarray:
        """Canonical ``(u, v)`` rows with ``u < v``, sorted lexicographically."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    def edges(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edge_array()]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.shape[0] and nb[i] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _node_array(G: Graph, S) -> np.ndarray:
    ids = np.unique(np.fromiter((int(x) for x in S), dtype=np.int64))
    if ids.size and (ids[0] < 0 or ids[-1] >= G.n):
        raise DomainError("node id out of range")
    return ids


def _mask(G: Graph, ids: np.ndarray) -> np.ndarray:
    mask = np.zeros(G.n, dtype=bool)
    mask[ids] = True
    return mask


def volume(G: Graph, S: Iterable[int]) -> int:
    """Sum of degrees over ``S``."""
    return int(G.degrees[_node_array(G, S)].sum())


def cut_size(G: Graph, S: Iterable[int]) -> int:
    """Number of edges with exactly one endpoint in ``S``."""
    ids = _node_array(G, S)
    if ids.size == 0 or ids.size == G.n:
        raise DomainError("cut of an empty or full node set is undefined")
    mask = _mask(G, ids)
    starts, ends = G.indptr[ids], G.indptr[ids + 1]
    total = 0
    for a, b in zip(starts, ends):
        total += int(np.count_nonzero(~mask[G.indices[a:b]]))
    return total


def is_connected_induced(G: Graph, X: Iterable[int]) -> bool:
    """True iff the subgraph induced on ``X`` is connected."""
    ids = _node_array(G, X)
    if ids.size == 0:
        raise DomainError("connectivity of an empty set is undefined")
    mask = _mask(G, ids)
    seen = {int(ids[0])}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for w in G.neighbors(u):
            w = int(w)
            if mask[w] and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == ids.size


def connected_components(G: Graph) -> list[list[int]]:
    """Components as sorted id lists, ordered by their smallest member."""
    comp = np.full(G.n, -1, dtype=np.int64)
    out: list[list[int]] = []
    for s in range(G.n):
        if comp[s] >= 0:
            continue
        comp[s] = len(out)
        members = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in G.neighbors(u):
                if comp[w] < 0:
                    comp[w] = len(out)
                    members.append(int(w))
                    queue.append(int(w))
        out.append(sorted(members))
    return out


_DIRECTED_MARKERS = ("directed graph", "directed network")


def parse_edge_list(stream: TextIO | str, directed_as_undirected: bool = True) -> Graph:
    """Parse a SNAP-style edge list.

    Lines starting with ``#`` are comments; every other non-blank line holds
    two integer tokens. External ids are relabelled densely in first-seen
    order. Self-loops are dropped (their endpoint is still kept as a node) and
    reciprocal or repeated pairs collapse to one undirected edge.

    With ``directed_as_undirected=False`` a file whose header declares a
    directed graph is rejected instead of being symmetrized.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    ids: dict[str, int] = {}
    labels: list[str] = []
    src: list[int] = []
    dst: list[int] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not directed_as_undirected:
                low = line.lower()
                if any(mark in low for mark in _DIRECTED_MARKERS) and "undirected" not in low:
                    raise ParseError("input declares a directed graph", lineno)
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ParseError(f"expected two node ids, got {line!r}", lineno)
        pair = []
        for tok in parts[:2]:
            try:
                key = str(int(tok))
            except ValueError:
                raise ParseError(f"malformed node id {tok!r}", lineno) from None
            v = ids.get(key)
            if v is None:
                v = ids[key] = len(labels)
                labels.append(key)
            pair.append(v)
        src.append(pair[0])
        dst.append(pair[1])
    edges = np.column_stack([np.asarray(src, dtype=np.int64), np.asarray(dst, dtype=np.int64)])
    G = Graph.from_edges(len(labels), edges, labels)
    if G.m == 0:
        raise EmptyGraphError("edge list contains no edges")
    return G


def read_edge_list(path: str | os.PathLike, directed_as_undirected: bool = True) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, directed_as_undirected=directed_as_undirected)


def format_edge_list(G: Graph) -> str:
    """Canonical text form: one ``u v`` line per edge, ``u < v``, sorted."""
    return "".join(f"{u} {v}\n" for u, v in G.edge_array())


def write_edge_list(G: Graph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(G))
