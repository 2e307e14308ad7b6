"""Interaction topologies and radius-r neighborhood tables.

Graphs are stored in CSR form (indptr/indices) with neighbor lists sorted
by node id, which makes every iteration order deterministic. A
NeighborhoodTable precomputes the BFS ball of a fixed radius around every
node so the game loop never re-runs BFS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import InvalidDimensionError, InvalidParameterError
from .rng import Xoshiro256StarStar

#: Graphs larger than this skip eager diameter computation (all-pairs BFS cost).
DIAMETER_NODE_LIMIT = 10_000


@dataclass(frozen=True)
class Lattice2d:
    rows: int
    cols: int


@dataclass(frozen=True)
class BarabasiAlbert:
    m: int


@dataclass(frozen=True)
class Custom:
    pass


GraphKind = Lattice2d | BarabasiAlbert | Custom


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph over nodes 0..n-1."""

    n: int
    indptr: np.ndarray  # int64, length n+1
    indices: np.ndarray  # int32, sorted within each row
    kind: GraphKind

    def degree(self, node: int) -> int:
        return int(self.indptr[node + 1] - self.indptr[node])

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    @property
    def num_edges(self) -> int:
        return len(self.indices) // 2

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield (u, v) with u < v in ascending order."""
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)


@dataclass(frozen=True)
class NeighborhoodTable:
    """Per-node sorted BFS balls of a fixed radius (centers excluded)."""

    radius: int
    indptr: np.ndarray
    indices: np.ndarray

    def ball(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]

    def contains(self, node: int, other: int) -> bool:
        ball = self.ball(node)
        pos = int(np.searchsorted(ball, other))
        return pos < len(ball) and ball[pos] == other


def _csr_from_adjacency(adjacency: list[set[int]], kind: GraphKind) -> Graph:
    n = len(adjacency)
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v, nbrs in enumerate(adjacency):
        indptr[v + 1] = indptr[v] + len(nbrs)
    indices = np.empty(indptr[-1], dtype=np.int32)
    for v, nbrs in enumerate(adjacency):
        indices[indptr[v]:indptr[v + 1]] = sorted(nbrs)
    graph = Graph(n=n, indptr=indptr, indices=indices, kind=kind)
    _validate(graph)
    return graph


def _validate(graph: Graph) -> None:
    for u in range(graph.n):
        nbrs = graph.neighbors(u)
        if len(nbrs) == 0:
            raise InvalidParameterError(f"node {u} is isolated")
        if np.any(nbrs == u):
            raise InvalidParameterError(f"node {u} has a self-loop")
        if len(np.unique(nbrs)) != len(nbrs):
            raise InvalidParameterError(f"node {u} has duplicate edges")
    if not _is_connected(graph):
        raise InvalidParameterError("graph must have exactly one connected component")


def _is_connected(graph: Graph) -> bool:
    seen = np.zeros(graph.n, dtype=bool)
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in graph.neighbors(u):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


def make_lattice2d_pbc(rows: int, cols: int) -> Graph:
    """Square lattice with periodic boundaries; node (r, c) has id r*cols + c.

    Each node gets its four wraparound neighbors, so both dimensions must be
    at least 3: with a dimension of 2 the wrap duplicates an edge, and with
    1 it produces a self-loop.
    """
    if rows < 3 or cols < 3:
        raise InvalidDimensionError(
            f"lattice dimensions must be at least 3x3, got {rows}x{cols}"
        )
    n = rows * cols
    indptr = np.arange(0, 4 * n + 4, 4, dtype=np.int64)[: n + 1]
    indices = np.empty(4 * n, dtype=np.int32)
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            nbrs = sorted((
                ((r - 1) % rows) * cols + c,
                ((r + 1) % rows) * cols + c,
                r * cols + (c - 1) % cols,
                r * cols + (c + 1) % cols,
            ))
            indices[4 * v:4 * v + 4] = nbrs
    return Graph(n=n, indptr=indptr, indices=indices, kind=Lattice2d(rows, cols))


def make_barabasi_albert(n: int, m: int, rng: Xoshiro256StarStar) -> Graph:
    """Preferential-attachment graph: an m-clique seed, then n-m nodes that
    each attach m edges to existing nodes with probability proportional to
    degree (sampled without replacement).

    Edge count is exactly m*(n-m) + m*(m-1)/2 and the graph is connected.
    """
    if m < 1 or n <= m:
        raise InvalidParameterError(f"need n > m >= 1, got n={n}, m={m}")
    adjacency: list[set[int]] = [set() for _ in range(n)]
    # repeated_nodes holds each node once per incident edge, so sampling an
    # element uniformly is degree-proportional sampling.
    repeated_nodes: list[int] = []
    for u in range(m):
        for v in range(u + 1, m):
            adjacency[u].add(v)
            adjacency[v].add(u)
        repeated_nodes.extend([u] * (m - 1))
    if m == 1:
        repeated_nodes.append(0)  # degree-0 seed would make sampling impossible
    for source in range(m, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated_nodes[rng.randbelow(len(repeated_nodes))])
        for t in sorted(targets):
            adjacency[source].add(t)
            adjacency[t].add(source)
            repeated_nodes.append(t)
        repeated_nodes.extend([source] * m)
    if m == 1:
        repeated_nodes.pop(0)
    return _csr_from_adjacency(adjacency, BarabasiAlbert(m))


def make_custom(n: int, edges: list[tuple[int, int]]) -> Graph:
    """Build a graph from an explicit edge list (validated like any other)."""
    adjacency: list[set[int]] = [set() for _ in range(n)]
    for u, v in edges:
        if u == v:
            raise InvalidParameterError(f"self-loop on node {u}")
        adjacency[u].add(v)
        adjacency[v].add(u)
    return _csr_from_adjacency(adjacency, Custom())


def k_ball(graph: Graph, node: int, radius: int) -> np.ndarray:
    """All nodes within BFS distance 1..radius of `node`, sorted, self excluded."""
    if radius < 1:
        raise InvalidParameterError(f"radius must be >= 1, got {radius}")
    dist = {node: 0}
    frontier = [node]
    for d in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for v in graph.neighbors(u):
                v = int(v)
                if v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
        if not frontier:
            break
    ball = sorted(v for v in dist if v != node)
    return np.asarray(ball, dtype=np.int32)


def precompute_neighborhoods(graph: Graph, radius: int) -> NeighborhoodTable:
    """Tabulate k_ball for every node.

    radius 1 reuses the adjacency arrays directly; they are the same data.
    """
    if radius < 1:
        raise InvalidParameterError(f"radius must be >= 1, got {radius}")
    if radius == 1:
        return NeighborhoodTable(radius=1, indptr=graph.indptr, indices=graph.indices)
    indptr = np.zeros(graph.n + 1, dtype=np.int64)
    balls = []
    for v in range(graph.n):
        ball = k_ball(graph, v, radius)
        balls.append(ball)
        indptr[v + 1] = indptr[v] + len(ball)
    indices = np.concatenate(balls).astype(np.int32)
    return NeighborhoodTable(radius=radius, indptr=indptr, indices=indices)


def diameter(graph: Graph) -> int:
    """Exact diameter via unweighted all-pairs shortest paths.

    Runs in source chunks to bound memory; intended for radius validation at
    config load, not for per-run use.
    """
    matrix = csr_matrix(
        (np.ones(len(graph.indices), dtype=np.int8), graph.indices, graph.indptr),
        shape=(graph.n, graph.n),
    )
    best = 0
    chunk = 256
    for start in range(0, graph.n, chunk):
        sources = np.arange(start, min(start + chunk, graph.n))
        dist = dijkstra(matrix, directed=False, unweighted=True, indices=sources)
        best = max(best, int(dist.max()))
    return best


def write_edge_list(graph: Graph, path) -> None:
    """Dump edges as "u v" lines in ascending order, after a node-count header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# nodes={graph.n}\n")
        for u, v in graph.edges():
            fh.write(f"{u} {v}\n")
