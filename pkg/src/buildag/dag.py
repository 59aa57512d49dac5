"""Weighted DAG container, validation, generators and graph queries.

Adjacency convention: ``A[i, j] != 0`` means an arc ``j -> i`` (row ``i``
holds the parents of node ``i``, column ``j`` holds the children of ``j``).
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import make_rng
from .exceptions import CycleDetectedError, InvalidParameterError, SelfLoopError


@dataclass(frozen=True, eq=False)
class WeightedDag:
    """Dense weighted adjacency matrix of a DAG.

    The weight array is copied and frozen on construction. ``permutation``
    is the node ordering used by the random generator, kept for debugging;
    the weights are always stored in the original node ids.
    """

    weights: np.ndarray
    permutation: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise InvalidParameterError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidParameterError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.permutation is not None:
            p = np.array(self.permutation, dtype=np.int64, copy=True)
            p.setflags(write=False)
            object.__setattr__(self, "permutation", p)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def support(self) -> np.ndarray:
        return self.weights != 0

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(self.weights))

    def edges(self):
        """List of ``(child, parent, weight)`` triples in row-major order."""
        rows, cols = np.nonzero(self.weights)
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(rows, cols)]

    def subgraph(self, nodes) -> "WeightedDag":
        """Induced sub-DAG on ``nodes`` (relabelled 0..len(nodes)-1 in the given order)."""
        idx = np.asarray(nodes, dtype=np.int64)
        return WeightedDag(self.weights[np.ix_(idx, idx)])

    def remove_node(self, i: int) -> "WeightedDag":
        """Copy with all edges incident to ``i`` deleted (``i`` stays as an isolated node)."""
        _check_index(self, i)
        w = self.weights.copy()
        w[i, :] = 0.0
        w[:, i] = 0.0
        return WeightedDag(w)


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    adjacency: np.ndarray

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise InvalidParameterError("adjacency must be square")
        if not np.array_equal(adj, adj.T):
            raise InvalidParameterError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise InvalidParameterError("adjacency must have an empty diagonal")
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> set[frozenset]:
        rows, cols = np.nonzero(np.triu(self.adjacency))
        return {frozenset((int(i), int(j))) for i, j in zip(rows, cols)}


def _check_index(dag: WeightedDag, i) -> None:
    if not (0 <= int(i) < dag.n):
        raise IndexError(f"node {i} out of range for a {dag.n}-node graph")


def _kahn(support: np.ndarray):
    """Kahn's algorithm with a min-heap so ties go to the lowest index.

    Returns ``(order, leftover)`` where ``leftover`` lists nodes that could
    not be scheduled (non-empty iff the graph has a cycle).
    """
    n = support.shape[0]
    indegree = support.sum(axis=1).astype(np.int64)
    heap = [int(i) for i in np.flatnonzero(indegree == 0)]
    heapq.heapify(heap)
    order = []
    while heap:
        j = heapq.heappop(heap)
        order.append(j)
        for i in np.flatnonzero(support[:, j]):
            indegree[i] -= 1
            if indegree[i] == 0:
                heapq.heappush(heap, int(i))
    scheduled = np.zeros(n, dtype=bool)
    scheduled[order] = True
    return order, np.flatnonzero(~scheduled)


def _find_cycle(support: np.ndarray, leftover) -> list[int]:
    # every leftover node keeps a leftover parent, so walking parents must revisit a node
    alive = np.zeros(support.shape[0], dtype=bool)
    alive[leftover] = True
    seen = {}
    path = []
    node = int(leftover[0])
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = int(np.flatnonzero(support[node] & alive)[0])
    cycle = path[seen[node]:]
    return cycle[::-1]


def validate(dag: WeightedDag) -> None:
    """Raise ``SelfLoopError`` or ``CycleDetectedError`` if ``dag`` is not a DAG."""
    diag = np.flatnonzero(np.diagonal(dag.weights))
    if diag.size:
        raise SelfLoopError(int(diag[0]))
    _, leftover = _kahn(dag.support)
    if leftover.size:
        raise CycleDetectedError(_find_cycle(dag.support, leftover))


def is_dag(dag: WeightedDag) -> bool:
    try:
        validate(dag)
    except (SelfLoopError, CycleDetectedError):
        return False
    return True


def topological_order(dag: WeightedDag) -> list[int]:
    """Parents-first ordering; among available nodes the lowest index goes first."""
    support = dag.support
    if np.diagonal(support).any():
        raise CycleDetectedError([int(np.flatnonzero(np.diagonal(support))[0])])
    order, leftover = _kahn(support)
    if leftover.size:
        raise CycleDetectedError(_find_cycle(support, leftover))
    return order


def is_topological_order(dag: WeightedDag, order) -> bool:
    order = list(order)
    if sorted(order) != list(range(dag.n)):
        return False
    pos = np.empty(dag.n, dtype=np.int64)
    pos[order] = np.arange(dag.n)
    rows, cols = np.nonzero(dag.weights)
    return bool(np.all(pos[cols] < pos[rows]))


def children(dag: WeightedDag, i: int) -> set[int]:
    _check_index(dag, i)
    return {int(k) for k in np.flatnonzero(dag.weights[:, i])}


def parents(dag: WeightedDag, i: int) -> set[int]:
    _check_index(dag, i)
    return {int(j) for j in np.flatnonzero(dag.weights[i, :])}


def leaves(dag: WeightedDag) -> set[int]:
    return {int(i) for i in np.flatnonzero(~dag.support.any(axis=0))}


def moralize(dag: WeightedDag) -> UndirectedGraph:
    """Skeleton of ``dag`` plus an edge between every pair of co-parents."""
    s = dag.support.astype(np.int64)
    married = (s.T @ s) > 0
    adj = married | dag.support | dag.support.T
    np.fill_diagonal(adj, False)
    return UndirectedGraph(adj)


def sample_er_dag(n: int, d: float, weight_lo: float, weight_hi: float, seed: int) -> WeightedDag:
    """Random Erdős–Rényi DAG with expected total degree ``d`` per node.

    A uniformly random permutation fixes the causal order; each of the
    ``n(n-1)/2`` ordered pairs gets an edge with probability ``d/(n-1)``.
    Weights are uniform on ``(-hi, -lo) U (lo, hi)`` with the sign drawn
    independently with probability 1/2.
    """
    if n < 2:
        raise InvalidParameterError("n must be at least 2")
    if not (0 < d <= n - 1):
        raise InvalidParameterError(f"expected degree must lie in (0, n-1], got {d}")
    if not (0 < weight_lo < weight_hi):
        raise InvalidParameterError("need 0 < weight_lo < weight_hi")
    rng = make_rng(seed, stream=0)
    perm = rng.permutation(n)
    p = d / (n - 1)
    lower = np.tril(rng.random((n, n)) < p, k=-1)
    magnitude = rng.uniform(weight_lo, weight_hi, size=(n, n))
    sign = np.where(rng.random((n, n)) < 0.5, -1.0, 1.0)
    w_perm = np.where(lower, sign * magnitude, 0.0)
    w = np.zeros((n, n))
    # position r in the order is node perm[r]
    w[np.ix_(perm, perm)] = w_perm
    dag = WeightedDag(w, permutation=perm)
    validate(dag)
    return dag


def chain_dag(n: int, k: float) -> WeightedDag:
    """Chain ``0 -> 1 -> ... -> n-1`` with every edge weight equal to ``k``."""
    if n < 2:
        raise InvalidParameterError("n must be at least 2")
    if k == 0 or not np.isfinite(k):
        raise InvalidParameterError("chain weight must be finite and nonzero")
    w = np.zeros((n, n))
    idx = np.arange(n - 1)
    w[idx + 1, idx] = k
    return WeightedDag(w)
