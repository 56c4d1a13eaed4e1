"""Two-phase local-moving optimizer shared by the modularity and entropy estimators.

Phase one moves single nodes to the neighbouring module with the best
objective change until no move helps; phase two collapses modules into
super-nodes and repeats on the smaller weighted graph. The objective is
selected by ``kind``:

* ``MODULARITY`` maximises sum_c [e_c/m - (V_c/2m)^2]
* ``CODE_LENGTH`` minimises the two-level code length with full node degrees,
  which up to an additive constant is
  X/2m + (m_g/m) * (log2(2m) - X/2m),  X = sum_c V_c log2 V_c.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .graph import Graph

MODULARITY = 0
CODE_LENGTH = 1

_TOL = 1e-12


@njit(cache=True)
def _xlog2(x):
    if x <= 0.0:
        return 0.0
    return x * np.log2(x)


@njit(cache=True)
def code_length_core(X, internal, m):
    """Code length minus its partition-independent part."""
    two_m = 2.0 * m
    return X / two_m + ((m - internal) / m) * (np.log2(two_m) - X / two_m)


@njit(cache=True)
def code_length_after_move(X, internal, m, v_i, inner_i, k_ia, k_ic, vol_a, vol_c):
    """Objective after moving a node of volume ``v_i`` from module a to module c.

    ``k_ia``/``k_ic`` are edge weights from the node to the other members of
    a and c, ``vol_a``/``vol_c`` the module volumes before the move (the
    node counted in a).
    """
    X2 = X - _xlog2(vol_a) + _xlog2(vol_a - v_i) - _xlog2(vol_c) + _xlog2(vol_c + v_i)
    internal2 = internal - k_ia + k_ic
    return code_length_core(X2, internal2, m)


@njit(cache=True, nogil=True)
def _modularity_value(comm_vol, comm_int, m):
    q = 0.0
    for c in range(comm_vol.shape[0]):
        if comm_vol[c] > 0.0 or comm_int[c] > 0.0:
            q += comm_int[c] / m - (comm_vol[c] / (2.0 * m)) ** 2
    return q


@njit(cache=True, nogil=True)
def move_nodes(indptr, indices, weights, node_vol, node_inner, comm, order, m, kind, tol):
    """Local moving phase; ``comm`` is updated in place.

    Returns ``(moves, trace)`` where ``trace[k]`` is the objective (modularity,
    or code length up to a constant) after pass ``k``; ``trace[0]`` is the
    starting value.
    """
    n = node_vol.shape[0]
    comm_vol = np.zeros(n)
    comm_int = np.zeros(n)
    for i in range(n):
        comm_vol[comm[i]] += node_vol[i]
        comm_int[comm[i]] += node_inner[i]
        for e in range(indptr[i], indptr[i + 1]):
            if comm[indices[e]] == comm[i]:
                comm_int[comm[i]] += 0.5 * weights[e]
    X = 0.0
    internal = 0.0
    for c in range(n):
        X += _xlog2(comm_vol[c])
        internal += comm_int[c]

    neigh_w = np.zeros(n)
    seen = np.zeros(n, dtype=np.bool_)
    touched = np.empty(n, dtype=np.int64)
    trace = np.empty(n + 64)
    if kind == MODULARITY:
        trace[0] = _modularity_value(comm_vol, comm_int, m)
    else:
        trace[0] = code_length_core(X, internal, m)
    n_trace = 1
    total_moves = 0
    while True:
        moved = 0
        for idx in range(n):
            i = order[idx]
            a = comm[i]
            v_i = node_vol[i]
            nt = 0
            for e in range(indptr[i], indptr[i + 1]):
                c = comm[indices[e]]
                if not seen[c]:
                    seen[c] = True
                    touched[nt] = c
                    nt += 1
                neigh_w[c] += weights[e]
            k_ia = neigh_w[a]
            best = a
            if kind == MODULARITY:
                # gains relative to leaving i isolated
                rest_a = comm_vol[a] - v_i
                stay = k_ia / m - v_i * rest_a / (2.0 * m * m)
                best_val = stay
                for t in range(nt):
                    c = touched[t]
                    if c == a:
                        continue
                    g = neigh_w[c] / m - v_i * comm_vol[c] / (2.0 * m * m)
                    if g > best_val or (g == best_val and c < best and best != a):
                        best_val = g
                        best = c
                if best != a and best_val <= stay + tol:
                    best = a
            else:
                stay = code_length_core(X, internal, m)
                best_val = stay
                for t in range(nt):
                    c = touched[t]
                    if c == a:
                        continue
                    L = code_length_after_move(X, internal, m, v_i, node_inner[i],
                                               k_ia, neigh_w[c], comm_vol[a], comm_vol[c])
                    if L < best_val or (L == best_val and c < best and best != a):
                        best_val = L
                        best = c
                if best != a and best_val >= stay - tol:
                    best = a
            if best != a:
                k_ib = neigh_w[best]
                X = X - _xlog2(comm_vol[a]) + _xlog2(comm_vol[a] - v_i) \
                    - _xlog2(comm_vol[best]) + _xlog2(comm_vol[best] + v_i)
                internal = internal - k_ia + k_ib
                comm_vol[a] -= v_i
                comm_int[a] -= node_inner[i] + k_ia
                comm_vol[best] += v_i
                comm_int[best] += node_inner[i] + k_ib
                comm[i] = best
                moved += 1
            for t in range(nt):
                neigh_w[touched[t]] = 0.0
                seen[touched[t]] = False
        total_moves += moved
        if moved == 0:
            break
        if n_trace < trace.shape[0]:
            if kind == MODULARITY:
                trace[n_trace] = _modularity_value(comm_vol, comm_int, m)
            else:
                trace[n_trace] = code_length_core(X, internal, m)
            n_trace += 1
    return total_moves, trace[:n_trace].copy()


@njit(cache=True, nogil=True)
def aggregate(indptr, indices, weights, node_vol, node_inner, comm, nc):
    """Collapse each module of ``comm`` (dense ids ``0..nc-1``) into one weighted node."""
    n = node_vol.shape[0]
    new_vol = np.zeros(nc)
    new_inner = np.zeros(nc)
    for i in range(n):
        new_vol[comm[i]] += node_vol[i]
        new_inner[comm[i]] += node_inner[i]
    n_arcs = 0
    for i in range(n):
        ci = comm[i]
        for e in range(indptr[i], indptr[i + 1]):
            if comm[indices[e]] == ci:
                new_inner[ci] += 0.5 * weights[e]
            else:
                n_arcs += 1
    keys = np.empty(n_arcs, dtype=np.int64)
    wts = np.empty(n_arcs)
    k = 0
    for i in range(n):
        ci = comm[i]
        for e in range(indptr[i], indptr[i + 1]):
            cj = comm[indices[e]]
            if cj != ci:
                keys[k] = ci * nc + cj
                wts[k] = weights[e]
                k += 1
    perm = np.argsort(keys, kind="mergesort")
    new_indptr = np.zeros(nc + 1, dtype=np.int64)
    new_indices = np.empty(n_arcs, dtype=np.int64)
    new_weights = np.empty(n_arcs)
    u = 0
    last = -1
    for t in range(n_arcs):
        key = keys[perm[t]]
        if key != last:
            new_indices[u] = key % nc
            new_weights[u] = wts[perm[t]]
            new_indptr[key // nc + 1] += 1
            u += 1
            last = key
        else:
            new_weights[u - 1] += wts[perm[t]]
    for c in range(nc):
        new_indptr[c + 1] += new_indptr[c]
    return new_indptr, new_indices[:u].copy(), new_weights[:u].copy(), new_vol, new_inner


def _dense(labels: np.ndarray) -> tuple[np.ndarray, int]:
    _, inv = np.unique(labels, return_inverse=True)
    inv = inv.reshape(-1).astype(np.int64)
    return inv, int(inv.max()) + 1 if inv.size else 0


def run(G: Graph, kind: int, rng: np.random.Generator, tol: float = _TOL):
    """Full multi-level optimisation; returns ``(assignment, traces)``.

    ``traces`` holds one per-pass objective array for every level that moved
    at least one node.
    """
    indptr = G.indptr
    indices = G.indices
    weights = np.ones(indices.shape[0])
    node_vol = G.degrees.astype(np.float64)
    node_inner = np.zeros(G.n)
    m = float(G.m)
    assignment = np.arange(G.n, dtype=np.int64)
    traces = []
    n_level = G.n
    while True:
        comm = np.arange(n_level, dtype=np.int64)
        order = rng.permutation(n_level).astype(np.int64)
        moves, trace = move_nodes(indptr, indices, weights, node_vol, node_inner,
                                  comm, order, m, kind, tol)
        if moves == 0:
            break
        traces.append(trace)
        comm, nc = _dense(comm)
        assignment = comm[assignment]
        if nc == n_level:
            break
        indptr, indices, weights, node_vol, node_inner = aggregate(
            indptr, indices, weights, node_vol, node_inner, comm, nc)
        n_level = nc
    return assignment, traces
