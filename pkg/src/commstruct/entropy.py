"""Random-walk code lengths and the entropy community-structure ratio.

For a partition into modules, one random-walk step in the stationary
distribution is coded with a node codeword inside its module plus, for
steps that cross modules, a module codeword:

    L_P = -sum_j sum_{i in j} (d_i/2m) log2(d_i/V_j)
          - (m_g/m) sum_j (V_j/2m) log2(V_j/2m)

and the ratio is ``1 - L_P / L_U`` where ``L_U`` is the entropy of the
stationary distribution. ``degree_mode="full"`` (the default) uses each node's
full degree in the first term; ``"internal"`` uses only its edges inside the
module.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _louvain
from .errors import DomainError, OracleRefusal
from .graph import Graph
from .modularity import EXACT_MAX_NODES, DEFAULT_RESTARTS, OptimizerResult, run_restarts
from .partition import Partition, module_stats, restricted_growth_strings

DEGREE_MODES = ("full", "internal")


@dataclass(frozen=True)
class CodeLengths:
    uniform: float
    modular: float

    @property
    def tau(self) -> float:
        return 1.0 - self.modular / self.uniform


def _plogp(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=np.float64)
    nz = p > 0
    out[nz] = p[nz] * np.log2(p[nz])
    return out


def uniform_code_length(G: Graph) -> float:
    """Entropy (bits) of the degree-proportional stationary distribution."""
    if G.m == 0:
        raise DomainError("code length is undefined for a graph without edges")
    return float(-_plogp(G.degrees / (2.0 * G.m)).sum())


def internal_degrees(G: Graph, P: Partition) -> np.ndarray:
    a = P.assignment
    edges = G.edge_array()
    same = a[edges[:, 0]] == a[edges[:, 1]]
    both = np.concatenate([edges[same, 0], edges[same, 1]])
    return np.bincount(both, minlength=G.n)


def module_code_length(G: Graph, P: Partition, degree_mode: str = "full") -> float:
    if G.m == 0:
        raise DomainError("code length is undefined for a graph without edges")
    if degree_mode not in DEGREE_MODES:
        raise ValueError(f"degree_mode must be one of {DEGREE_MODES}")
    internal, vol = module_stats(G, P)
    if (vol == 0).any():
        raise DomainError("partition has a module with zero volume")
    two_m = 2.0 * G.m
    d = G.degrees if degree_mode == "full" else internal_degrees(G, P)
    d = d.astype(np.float64)
    V_of_node = vol[P.assignment].astype(np.float64)
    nz = d > 0
    within = -float(np.sum(d[nz] / two_m * np.log2(d[nz] / V_of_node[nz])))
    crossing = G.m - int(internal.sum())
    between = -(crossing / G.m) * float(_plogp(vol / two_m).sum())
    return within + between


def code_lengths(G: Graph, P: Partition, degree_mode: str = "full") -> CodeLengths:
    return CodeLengths(uniform_code_length(G), module_code_length(G, P, degree_mode))


def entropy_ratio(G: Graph, P: Partition, degree_mode: str = "full") -> float:
    return code_lengths(G, P, degree_mode).tau


def absorb_isolated(G: Graph, P: Partition) -> Partition:
    """Fold zero-volume modules into the module of the first node with an edge.

    Degree-0 nodes contribute nothing to either code length, but a module
    made only of them has no volume and no defined code.
    """
    _, vol = module_stats(G, P)
    empty = vol == 0
    if not empty.any():
        return P
    host = int(P.assignment[int(np.argmax(G.degrees > 0))])
    a = P.assignment.copy()
    a[empty[a]] = host
    return Partition(a)


def maximize_entropy_ratio(G: Graph, restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                           candidates: Iterable[Partition] = (), degree_mode: str = "full",
                           workers: int = 1) -> OptimizerResult:
    """Heuristic maximum of the entropy ratio over partitions.

    Runs the local-moving optimizer on the full-degree code length from
    ``restarts`` seeded node orders, then scores those partitions, any extra
    ``candidates`` (typically the best modularity partition) and the single
    module under ``degree_mode``. Returns the best; ties favour the earliest
    candidate.
    """
    if G.m == 0:
        raise DomainError("code length is undefined for a graph without edges")
    if restarts < 1:
        raise ValueError("restarts must be positive")
    pool = [Partition.single(G.n)]
    pool += [Partition(a) for _, a in run_restarts(G, _louvain.CODE_LENGTH, restarts, seed, workers)]
    pool += list(candidates)
    best_tau, best_i, best_P = -np.inf, 0, pool[0]
    for i, P in enumerate(pool):
        P = absorb_isolated(G, P)
        tau = entropy_ratio(G, P, degree_mode)
        if tau > best_tau:
            best_tau, best_i, best_P = tau, i, P
    return OptimizerResult(best_P, best_tau, heuristic=True, restart=best_i)


def exact_entropy_small(G: Graph, degree_mode: str = "full") -> OptimizerResult:
    """Exhaustive maximum over all partitions whose modules have positive volume."""
    if G.n > EXACT_MAX_NODES:
        raise OracleRefusal(f"exhaustive search refused for n={G.n} > {EXACT_MAX_NODES}")
    if G.m == 0:
        raise DomainError("code length is undefined for a graph without edges")
    best_tau, best_P = -np.inf, None
    for a in restricted_growth_strings(G.n):
        vol = np.bincount(a, weights=G.degrees)
        if (vol == 0).any():
            continue
        P = Partition(a)
        tau = entropy_ratio(G, P, degree_mode)
        if tau > best_tau + 1e-12:
            best_tau, best_P = tau, P
    return OptimizerResult(best_P, best_tau, heuristic=False)
