"""Newman-Girvan modularity of a partition and its maximisation."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _louvain
from .errors import DomainError, OracleRefusal
from .graph import Graph
from .partition import Partition, module_stats, restricted_growth_strings

EXACT_MAX_NODES = 10
DEFAULT_RESTARTS = 8


@dataclass(frozen=True)
class OptimizerResult:
    partition: Partition
    value: float
    heuristic: bool
    restart: int = 0


def modularity(G: Graph, P: Partition) -> float:
    """Modularity with the configuration null model ``d_i d_j / 2m``.

    Uses the per-module form sum_c [e_c/m - (V_c/2m)^2], which equals the
    pairwise double sum including the ``i == j`` null-model terms.
    """
    if G.m == 0:
        raise DomainError("modularity is undefined for a graph without edges")
    internal, vol = module_stats(G, P)
    m = float(G.m)
    return float(np.sum(internal / m) - np.sum((vol / (2.0 * m)) ** 2))


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(restart)])))


def _best(results: list[tuple[float, int, np.ndarray]]) -> tuple[float, int, np.ndarray]:
    # ties go to the lowest restart index
    return max(results, key=lambda r: (r[0], -r[1]))


def run_restarts(G: Graph, kind: int, restarts: int, seed: int, workers: int = 1):
    def one(r: int):
        assignment, _ = _louvain.run(G, kind, restart_rng(seed, r))
        return r, assignment

    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(restarts)))
    return [one(r) for r in range(restarts)]


def maximize_modularity(G: Graph, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                        workers: int = 1) -> OptimizerResult:
    """Louvain-style maximisation; the value is a lower bound on the true maximum."""
    if G.m == 0:
        raise DomainError("modularity is undefined for a graph without edges")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    scored = []
    for r, assignment in run_restarts(G, _louvain.MODULARITY, restarts, seed, workers):
        P = Partition(assignment)
        scored.append((modularity(G, P), r, P))
    q, r, P = _best(scored)
    return OptimizerResult(P, q, heuristic=True, restart=r)


def exact_modularity_small(G: Graph) -> OptimizerResult:
    """Exhaustive maximum over all set partitions (``n <= 10``)."""
    if G.n > EXACT_MAX_NODES:
        raise OracleRefusal(f"exhaustive search refused for n={G.n} > {EXACT_MAX_NODES}")
    if G.m == 0:
        raise DomainError("modularity is undefined for a graph without edges")
    edges = G.edge_array()
    deg = G.degrees.astype(np.float64)
    m = float(G.m)
    best_q, best_a = -np.inf, None
    for a in restricted_growth_strings(G.n):
        k = int(a.max()) + 1
        internal = np.count_nonzero(a[edges[:, 0]] == a[edges[:, 1]])
        vol = np.bincount(a, weights=deg, minlength=k)
        q = internal / m - float(np.sum((vol / (2.0 * m)) ** 2))
        if q > best_q + 1e-12:
            best_q, best_a = q, a
    P = Partition(best_a)
    return OptimizerResult(P, modularity(G, P), heuristic=False)
