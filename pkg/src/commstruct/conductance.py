"""Conductance, possible communities and the conductance community-structure ratio."""
from __future__ import annotations

import io
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
from numba import njit

from .errors import DomainError, OracleRefusal, ParseError
from .graph import Graph, _node_array, cut_size, is_connected_induced, volume

ORACLE_MAX_NODES = 12
ORACLE_MAX_SUBSETS = 64
SUBSAMPLE_ABOVE = 50_000
_CHUNK = 2048


@dataclass(frozen=True)
class CommunityBounds:
    """Admissible community sizes, inclusive on both ends."""

    min_size: int
    max_size: int

    def __post_init__(self):
        if self.min_size < 1:
            raise ValueError("min_size must be at least 1")
        if self.max_size < self.min_size:
            raise ValueError("max_size must be >= min_size")

    @classmethod
    def default(cls, n: int, log_base: float = 2.0) -> "CommunityBounds | None":
        """Sizes ``s`` with ``log n <= s < sqrt(n)``; ``None`` when no size qualifies."""
        lo = max(1, math.ceil(math.log(n, log_base) - 1e-12)) if n > 1 else 1
        hi = math.isqrt(n - 1)  # largest s with s*s < n
        if hi < lo:
            return None
        return cls(lo, hi)


def conductance(G: Graph, S: Iterable[int]) -> float:
    """cut(S) / min(vol(S), vol(V - S))."""
    ids = _node_array(G, S)
    if ids.size == 0 or ids.size == G.n:
        raise DomainError("conductance of an empty or full node set is undefined")
    vol_s = int(G.degrees[ids].sum())
    denom = min(vol_s, 2 * G.m - vol_s)
    if denom == 0:
        raise DomainError("conductance denominator is zero")
    return cut_size(G, ids) / denom


def is_possible_community(G: Graph, X: Iterable[int], bounds: CommunityBounds) -> bool:
    ids = _node_array(G, X)
    if not bounds.min_size <= ids.size <= bounds.max_size:
        return False
    return is_connected_induced(G, ids)


@dataclass
class CommunitySet:
    """A family of possibly overlapping communities with their scores ``1 - conductance``."""

    n: int
    communities: list[tuple[int, ...]] = field(default_factory=list)
    scores: list[float] = field(default_factory=list)

    @classmethod
    def build(cls, G: Graph, communities: Iterable[Iterable[int]],
              bounds: CommunityBounds | None = None) -> "CommunitySet":
        """Score, validate and de-duplicate ``communities``.

        When ``bounds`` is given every member must be a possible community.
        """
        out = cls(G.n)
        seen = set()
        for members in communities:
            key = tuple(int(x) for x in _node_array(G, members))
            if key in seen:
                continue
            if bounds is not None and not is_possible_community(G, key, bounds):
                raise DomainError(f"{list(key)[:8]}... is not a possible community")
            seen.add(key)
            out.communities.append(key)
            out.scores.append(1.0 - conductance(G, key))
        return out

    def __len__(self) -> int:
        return len(self.communities)

    @property
    def coverage(self) -> set[int]:
        return set().union(*map(set, self.communities)) if self.communities else set()


def c_ratio(CS: CommunitySet) -> float:
    """Average over covered nodes of the mean score of their communities, divided by n."""
    if not CS.communities:
        return 0.0
    total = np.zeros(CS.n)
    count = np.zeros(CS.n)
    for members, score in zip(CS.communities, CS.scores):
        idx = np.asarray(members, dtype=np.int64)
        total[idx] += score
        count[idx] += 1
    covered = count > 0
    return float(np.sum(total[covered] / count[covered]) / CS.n)


def prune(CS: CommunitySet) -> CommunitySet:
    """Drop communities whose removal keeps coverage and strictly raises the ratio.

    Candidates are visited from the lowest score up (ties by member list),
    so the result is deterministic.
    """
    total = np.zeros(CS.n)
    count = np.zeros(CS.n, dtype=np.int64)
    arrays = [np.asarray(c, dtype=np.int64) for c in CS.communities]
    for idx, s in zip(arrays, CS.scores):
        total[idx] += s
        count[idx] += 1
    keep = [True] * len(arrays)
    for k in sorted(range(len(arrays)), key=lambda k: (CS.scores[k], CS.communities[k])):
        idx, s = arrays[k], CS.scores[k]
        if (count[idx] < 2).any():
            continue
        before = total[idx] / count[idx]
        after = (total[idx] - s) / (count[idx] - 1)
        if float(np.sum(after - before)) > 1e-15:
            total[idx] -= s
            count[idx] -= 1
            keep[k] = False
    out = CommunitySet(CS.n)
    for k, ok in enumerate(keep):
        if ok:
            out.communities.append(CS.communities[k])
            out.scores.append(CS.scores[k])
    return out


@njit(cache=True, nogil=True)
def _grow_all(indptr, indices, deg, two_m, seeds, min_size, max_size):
    """Greedy conductance-driven growth from every seed.

    Returns flat ``members`` plus ``offsets`` so that seed ``k`` produced
    ``members[offsets[k]:offsets[k+1]]`` (empty when no admissible prefix).
    """
    n = deg.shape[0]
    in_set = np.zeros(n, dtype=np.bool_)
    k_in = np.zeros(n, dtype=np.int64)
    on_front = np.zeros(n, dtype=np.bool_)
    front = np.empty(n, dtype=np.int64)
    grown = np.empty(max_size, dtype=np.int64)
    cap = seeds.shape[0] * max_size
    members = np.empty(cap, dtype=np.int64)
    offsets = np.zeros(seeds.shape[0] + 1, dtype=np.int64)
    pos = 0
    for k in range(seeds.shape[0]):
        s = seeds[k]
        size = 1
        grown[0] = s
        in_set[s] = True
        vol = deg[s]
        cut = deg[s]
        n_front = 0
        best_phi = np.inf
        best_size = 0
        if min_size <= 1 and n > 1:
            den = min(vol, two_m - vol)
            if den > 0:
                best_phi = cut / den
                best_size = 1
        for e in range(indptr[s], indptr[s + 1]):
            w = indices[e]
            k_in[w] += 1
            if not on_front[w]:
                on_front[w] = True
                front[n_front] = w
                n_front += 1
        while size < max_size:
            pick = -1
            pick_phi = np.inf
            for t in range(n_front):
                u = front[t]
                if in_set[u]:
                    continue
                c2 = cut + deg[u] - 2 * k_in[u]
                v2 = vol + deg[u]
                den = min(v2, two_m - v2)
                if den <= 0:
                    continue
                phi = c2 / den
                if phi < pick_phi or (phi == pick_phi and u < pick):
                    pick_phi = phi
                    pick = u
            if pick < 0:
                break
            in_set[pick] = True
            cut = cut + deg[pick] - 2 * k_in[pick]
            vol += deg[pick]
            grown[size] = pick
            size += 1
            if size >= min_size and pick_phi < best_phi:
                best_phi = pick_phi
                best_size = size
            for e in range(indptr[pick], indptr[pick + 1]):
                w = indices[e]
                k_in[w] += 1
                if not on_front[w]:
                    on_front[w] = True
                    front[n_front] = w
                    n_front += 1
        for t in range(best_size):
            members[pos + t] = grown[t]
        pos += best_size
        offsets[k + 1] = pos
        for t in range(size):
            in_set[grown[t]] = False
        for t in range(n_front):
            on_front[front[t]] = False
            k_in[front[t]] = 0
        for e in range(indptr[s], indptr[s + 1]):
            k_in[indices[e]] = 0
        k_in[s] = 0
        on_front[s] = False
    return members[:pos].copy(), offsets


def select_seeds(G: Graph, fraction: float | None = None, seed: int = 0) -> np.ndarray:
    """Nodes to grow from: every node with an edge, or a degree-stratified sample.

    Without an explicit ``fraction`` the sample kicks in above
    ``SUBSAMPLE_ABOVE`` nodes with one seed per ten nodes.
    """
    candidates = np.flatnonzero(G.degrees > 0)
    if fraction is None:
        fraction = 0.1 if G.n > SUBSAMPLE_ABOVE else 1.0
    if fraction >= 1.0:
        return candidates
    target = max(1, math.ceil(G.n * fraction))
    if target >= candidates.size:
        return candidates
    ranked = candidates[np.lexsort((candidates, -G.degrees[candidates]))]
    stride = candidates.size / target
    offset = np.random.default_rng(seed).random()
    picks = np.minimum((np.arange(target) + offset) * stride, candidates.size - 1).astype(np.int64)
    return np.sort(ranked[picks])


def discover_communities(G: Graph, bounds: CommunityBounds, seed_fraction: float | None = None,
                         seed: int = 0, workers: int = 1, prune_low: bool = True) -> CommunitySet:
    """Local greedy expansion from seed nodes.

    Each seed set grows by the frontier node that gives the lowest
    conductance, up to ``bounds.max_size`` nodes; the lowest-conductance
    prefix of admissible size is kept. Sets stay connected because only
    frontier nodes are added.
    """
    if G.n < 2 or G.m == 0:
        raise DomainError("community discovery needs at least one edge")
    seeds = select_seeds(G, seed_fraction, seed)
    args = (G.indptr, G.indices, G.degrees, 2 * G.m)
    lo, hi = bounds.min_size, min(bounds.max_size, G.n - 1)
    if hi < lo:
        return CommunitySet(G.n)
    chunks = [seeds[i:i + _CHUNK] for i in range(0, seeds.size, _CHUNK)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _grow_all(*args, c, lo, hi), chunks))
    else:
        parts = [_grow_all(*args, c, lo, hi) for c in chunks]
    found = []
    for members, offsets in parts:
        for k in range(offsets.shape[0] - 1):
            a, b = offsets[k], offsets[k + 1]
            if b > a:
                found.append(np.sort(members[a:b]))
    unique = sorted({tuple(int(x) for x in c) for c in found})
    CS = CommunitySet.build(G, unique)
    return prune(CS) if prune_low else CS


def c_ratio_oracle_small(G: Graph, bounds: CommunityBounds, k_max: int):
    """Best ratio over every collection of at most ``k_max`` possible communities.

    Proper subsets only; sets with an undefined conductance are not admissible.
    Returns ``(CommunitySet, theta)``.
    """
    if G.n > ORACLE_MAX_NODES:
        raise OracleRefusal(f"oracle refused for n={G.n} > {ORACLE_MAX_NODES}")
    valid = []
    for size in range(bounds.min_size, min(bounds.max_size, G.n - 1) + 1):
        for X in itertools.combinations(range(G.n), size):
            if not is_connected_induced(G, X):
                continue
            vol_x = volume(G, X)
            if min(vol_x, 2 * G.m - vol_x) == 0:
                continue
            valid.append(X)
            if len(valid) > ORACLE_MAX_SUBSETS:
                raise OracleRefusal(f"more than {ORACLE_MAX_SUBSETS} admissible subsets")
    pool = CommunitySet.build(G, valid)
    best = (0.0, CommunitySet(G.n))
    for k in range(1, k_max + 1):
        for combo in itertools.combinations(range(len(pool)), k):
            CS = CommunitySet(G.n, [pool.communities[i] for i in combo],
                              [pool.scores[i] for i in combo])
            theta = c_ratio(CS)
            if theta > best[0] + 1e-12:
                best = (theta, CS)
    return best[1], best[0]


def format_communities(CS: CommunitySet) -> str:
    return "".join(" ".join(map(str, c)) + "\n" for c in CS.communities)


def parse_communities(stream: TextIO | str, G: Graph) -> CommunitySet:
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([int(t) for t in line.split()])
        except ValueError:
            raise ParseError(f"malformed community {line!r}", lineno) from None
    return CommunitySet.build(G, rows)
