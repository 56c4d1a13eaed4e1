"""Seeded Erdos-Renyi and preferential-attachment graph generators."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .graph import Graph

_MODEL_CODES = {"ER": 1, "PA": 2}


@dataclass(frozen=True)
class GenSpec:
    model: str
    n: int
    p: float | None = None
    d: int | None = None
    seed: int = 0

    def __post_init__(self):
        model = self.model.upper()
        object.__setattr__(self, "model", model)
        if model not in _MODEL_CODES:
            raise ValueError(f"unknown model {self.model!r}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if model == "ER":
            if self.p is None or not 0.0 <= self.p <= 1.0:
                raise ValueError("ER requires 0 <= p <= 1")
        else:
            if self.d is None or not 1 <= self.d < self.n:
                raise ValueError("PA requires 1 <= d < n")

    @property
    def parameter(self) -> float:
        return self.p if self.model == "ER" else self.d

    def rng(self) -> np.random.Generator:
        """Generator keyed by (model, n, parameter, seed)."""
        if self.model == "ER":
            param_key = struct.unpack("<Q", struct.pack("<d", float(self.p)))[0]
        else:
            param_key = int(self.d)
        ss = np.random.SeedSequence(int(self.seed),
                                    spawn_key=(_MODEL_CODES[self.model], int(self.n), param_key))
        return np.random.Generator(np.random.PCG64(ss))


def generate(spec: GenSpec) -> Graph:
    return er_graph(spec) if spec.model == "ER" else pa_graph(spec)


def _pair_from_index(k: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # lexicographic rank of (i, j), i < j:  k = i*(2n-i-1)/2 + (j-i-1)
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(float(b) * b - 8.0 * k)) / 2).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    start = i * (2 * n - i - 1) // 2
    # float rounding can leave i off by one in either direction
    over = start > k
    i[over] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    under = nxt <= k
    i[under] += 1
    start = i * (2 * n - i - 1) // 2
    j = k - start + i + 1
    return i, j


def er_graph(spec: GenSpec) -> Graph:
    """G(n, p) using geometric skips over the lexicographic list of node pairs."""
    if spec.model != "ER":
        raise ValueError("er_graph needs an ER spec")
    n, p = spec.n, float(spec.p)
    total = n * (n - 1) // 2
    if p == 0.0:
        return Graph.from_edges(n, np.empty((0, 2), dtype=np.int64))
    if p == 1.0:
        k = np.arange(total, dtype=np.int64)
    else:
        rng = spec.rng()
        chunk = int(total * p + 6 * np.sqrt(total * p) + 64)
        pieces = []
        pos = -1
        while pos < total:
            gaps = rng.geometric(p, size=chunk)
            steps = pos + np.cumsum(gaps)
            pieces.append(steps)
            pos = int(steps[-1])
        k = np.concatenate(pieces)
        k = k[k < total]
    i, j = _pair_from_index(k, n)
    return Graph.from_edges(n, np.column_stack([i, j]))


def pa_graph(spec: GenSpec) -> Graph:
    """Preferential attachment growth from the complete graph on ``d + 1`` nodes.

    Each new node links to ``d`` distinct existing nodes. Targets are drawn
    with probability proportional to degree; repeated draws are discarded.
    """
    if spec.model != "PA":
        raise ValueError("pa_graph needs a PA spec")
    n, d = spec.n, int(spec.d)
    rng = spec.rng()
    n_edges = d * (d + 1) // 2 + d * (n - d - 1)
    edges = np.empty((n_edges, 2), dtype=np.int64)
    # every endpoint occurrence, so a uniform pick is degree-proportional
    stubs = np.empty(2 * n_edges, dtype=np.int64)
    e = 0
    for u in range(d + 1):
        for v in range(u + 1, d + 1):
            edges[e] = (u, v)
            stubs[2 * e], stubs[2 * e + 1] = u, v
            e += 1
    n_stubs = 2 * e
    buf = rng.random(4096)
    pos = 0
    for v in range(d + 1, n):
        chosen: list[int] = []
        while len(chosen) < d:
            if pos == buf.shape[0]:
                buf = rng.random(4096)
                pos = 0
            t = int(stubs[int(buf[pos] * n_stubs)])
            pos += 1
            if t not in chosen:
                chosen.append(t)
        for t in chosen:
            edges[e] = (t, v)
            stubs[n_stubs], stubs[n_stubs + 1] = t, v
            n_stubs += 2
            e += 1
    return Graph.from_edges(n, edges)
