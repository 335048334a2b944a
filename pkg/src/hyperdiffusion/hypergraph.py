"""Weighted hypergraphs, cut accounting and representation conversions."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DegenerateCut,
    EmptyHyperedge,
    HypergraphError,
    NonpositiveWeight,
    SingletonHyperedge,
    VertexOutOfRange,
)


class Hypergraph:
    """Immutable weighted hypergraph on vertices ``0..n-1``.

    Hyperedges are stored canonically as sorted vertex tuples with duplicates
    merged. A flat CSR incidence (``edge_ptr``, ``edge_vertices``) backs the
    vectorized kernels: the members of hyperedge ``h`` are
    ``edge_vertices[edge_ptr[h]:edge_ptr[h+1]]`` in ascending order.

    Use :func:`build` rather than calling the constructor directly.
    """

    def __init__(self, n: int, edges: Sequence[tuple[int, ...]], weights: np.ndarray):
        self.n = int(n)
        self.edges = tuple(edges)
        self.weights = np.asarray(weights, dtype=float)
        self.weights.setflags(write=False)
        sizes = np.fromiter((len(e) for e in self.edges), dtype=np.int64, count=len(self.edges))
        self.edge_sizes = sizes
        self.edge_ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        if self.edges:
            self.edge_vertices = np.fromiter(
                (v for e in self.edges for v in e), dtype=np.int64, count=int(sizes.sum())
            )
        else:
            self.edge_vertices = np.zeros(0, dtype=np.int64)
        self.edge_of_entry = np.repeat(np.arange(len(self.edges)), sizes)
        self.degrees = np.bincount(
            self.edge_vertices, weights=self.weights[self.edge_of_entry], minlength=self.n
        ).astype(float)
        self.volume = float(self.degrees.sum())
        for arr in (self.edge_sizes, self.edge_ptr, self.edge_vertices, self.edge_of_entry, self.degrees):
            arr.setflags(write=False)
        self._incidence = None

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def max_rank(self) -> int:
        return int(self.edge_sizes.max()) if self.m else 0

    def is_graph(self) -> bool:
        return bool(self.m == 0 or np.all(self.edge_sizes == 2))

    def incidence(self) -> sp.csr_matrix:
        """Vertex-by-hyperedge 0/1 incidence matrix."""
        if self._incidence is None:
            data = np.ones(len(self.edge_vertices))
            self._incidence = sp.csr_matrix(
                (data, (self.edge_vertices, self.edge_of_entry)), shape=(self.n, self.m)
            )
        return self._incidence

    def dump(self) -> tuple[int, list[tuple[list[int], float]]]:
        return self.n, [(list(e), float(w)) for e, w in zip(self.edges, self.weights)]

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges == other.edges
            and np.array_equal(self.weights, other.weights)
        )

    def __repr__(self):
        return f"Hypergraph(n={self.n}, m={self.m}, volume={self.volume:g})"


def build(n: int, edges: Iterable[tuple[Iterable[int], float]]) -> Hypergraph:
    """Build a hypergraph from ``(vertices, weight)`` pairs.

    Hyperedges over the same vertex set are merged by summing weights.
    Repeated vertices inside one hyperedge are collapsed.

    Raises
    ------
    EmptyHyperedge, SingletonHyperedge, NonpositiveWeight, VertexOutOfRange
    """
    if n < 1:
        raise HypergraphError(f"vertex count must be >= 1, got {n}")
    merged: dict[tuple[int, ...], float] = {}
    for verts, w in edges:
        w = float(w)
        if not np.isfinite(w) or w <= 0:
            raise NonpositiveWeight(f"hyperedge weight must be positive, got {w}")
        key = tuple(sorted({int(v) for v in verts}))
        if not key:
            raise EmptyHyperedge("hyperedge has no vertices")
        if len(key) < 2:
            raise SingletonHyperedge(f"hyperedge {key} has fewer than 2 distinct vertices")
        if key[0] < 0 or key[-1] >= n:
            raise VertexOutOfRange(f"hyperedge {key} references a vertex outside [0, {n})")
        merged[key] = merged.get(key, 0.0) + w
    keys = sorted(merged)
    return Hypergraph(n, keys, np.array([merged[k] for k in keys], dtype=float))


def as_vertex_vector(x, n: int, name: str = "x") -> np.ndarray:
    """Validate a dense per-vertex vector (length ``n``, finite entries)."""
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise HypergraphError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise HypergraphError(f"{name} contains NaN or Inf")
    return arr


def d_projection(G: Hypergraph, x: np.ndarray) -> np.ndarray:
    """D-orthogonal projection of ``x`` onto the all-ones vector."""
    return np.full(G.n, float(G.degrees @ x) / G.volume)


def indicator(n: int, S) -> np.ndarray:
    x = np.zeros(n)
    x[_as_index_array(n, S)] = 1.0
    return x


def _as_index_array(n: int, S) -> np.ndarray:
    arr = np.asarray(S)
    if arr.dtype == bool:
        if arr.shape != (n,):
            raise HypergraphError("boolean mask has wrong length")
        return np.flatnonzero(arr)
    idx = np.unique(arr.astype(np.int64).ravel())
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise VertexOutOfRange("vertex subset references a vertex out of range")
    return idx


@dataclass(frozen=True)
class CutProfile:
    S: np.ndarray
    boundary_weight: float
    conductance: float


def boundary_weight(G: Hypergraph, mask: np.ndarray) -> float:
    inside = np.add.reduceat(mask[G.edge_vertices].astype(np.int64), G.edge_ptr[:-1]) if G.m else np.zeros(0)
    cut = (inside > 0) & (inside < G.edge_sizes)
    return float(G.weights[cut].sum())


def conductance(G: Hypergraph, S) -> CutProfile:
    """Boundary weight of ``S`` over the smaller side's volume."""
    idx = _as_index_array(G.n, S)
    mask = np.zeros(G.n, dtype=bool)
    mask[idx] = True
    # both sides summed directly so that phi(S) == phi(V \ S) bit for bit
    denom = min(float(G.degrees[mask].sum()), float(G.degrees[~mask].sum()))
    if idx.size == 0 or idx.size == G.n or denom <= 0:
        raise DegenerateCut("cut has a side of zero volume")
    bw = boundary_weight(G, mask)
    # the boundary weight never exceeds the smaller volume; clamp summation-order rounding
    return CutProfile(S=idx, boundary_weight=bw, conductance=min(bw / denom, 1.0))


def components(G: Hypergraph) -> tuple[int, np.ndarray]:
    """Connected components of the vertex set (via the incidence structure)."""
    B = G.incidence()
    adj = (B @ B.T).tocsr()
    return connected_components(adj, directed=False)


def connected(G: Hypergraph) -> bool:
    return components(G)[0] == 1


def bipartite_to_hypergraph(
    n_left: int, right_adjacency: Sequence[Iterable[int]], max_edge_size: int | None = None
) -> tuple[Hypergraph, int]:
    """Replace each right node by a unit-weight hyperedge over its neighbours.

    Right nodes with fewer than two distinct neighbours (or more than
    ``max_edge_size``) are dropped. Returns the hypergraph and the number of
    dropped right nodes.
    """
    edges = []
    skipped = 0
    for nbrs in right_adjacency:
        verts = {int(v) for v in nbrs}
        if len(verts) < 2 or (max_edge_size is not None and len(verts) > max_edge_size):
            skipped += 1
            continue
        edges.append((verts, 1.0))
    return build(n_left, edges), skipped


def clique_expansion(G: Hypergraph, scale: str = "none") -> Hypergraph:
    """Replace every hyperedge by a complete graph on its vertices.

    Each pair receives weight ``w_h`` (``scale="none"``), ``w_h/|h|``
    (``"size"``) or ``w_h/(|h|-1)`` (``"size-1"``).
    """
    pair_w: dict[tuple[int, int], float] = defaultdict(float)
    for e, w in zip(G.edges, G.weights):
        k = len(e)
        if scale == "none":
            pw = w
        elif scale == "size":
            pw = w / k
        elif scale == "size-1":
            pw = w / (k - 1)
        else:
            raise ValueError(f"unknown clique scaling {scale!r}")
        for a in range(k):
            for b in range(a + 1, k):
                pair_w[(e[a], e[b])] += pw
    return build(G.n, [(p, w) for p, w in pair_w.items()])


def knn_indices(points, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest neighbours of every point.

    Euclidean distance, self excluded, ties broken by ascending index.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if not 1 <= k < N:
        raise HypergraphError(f"need 1 <= k < number of points, got k={k}, N={N}")
    out = np.empty((N, k), dtype=np.int64)
    # exact coordinate differences (not the |a|^2-2ab+|b|^2 trick) so equal
    # distances compare equal and the index tie-break is reliable
    chunk = max(1, 4_000_000 // (N * X.shape[1]))
    for start in range(0, N, chunk):
        rows = np.arange(start, min(N, start + chunk))
        d2 = ((X[rows, None, :] - X[None, :, :]) ** 2).sum(axis=2)
        d2[np.arange(len(rows)), rows] = np.inf
        out[rows] = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return out


def knn_hypergraph(points, k: int) -> Hypergraph:
    """One hyperedge per point: the point together with its ``k`` nearest neighbours."""
    nbrs = knn_indices(points, k)
    return build(len(nbrs), [((i, *row), 1.0) for i, row in enumerate(nbrs.tolist())])


def knn_graph(points, k: int) -> Hypergraph:
    """Edges from each point to each of its ``k`` nearest neighbours (mutual pairs merge to weight 2)."""
    nbrs = knn_indices(points, k)
    return build(len(nbrs), [((i, j), 1.0) for i, row in enumerate(nbrs.tolist()) for j in row])


def graph_laplacian(G: Hypergraph) -> sp.csr_matrix:
    """Combinatorial Laplacian of a 2-uniform hypergraph."""
    if not G.is_graph():
        raise HypergraphError("graph Laplacian requires a 2-uniform hypergraph")
    e = np.array(G.edges, dtype=np.int64).reshape(-1, 2)
    w = G.weights
    A = sp.coo_matrix((np.r_[w, w], (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(G.n, G.n))
    return (sp.diags(G.degrees) - A).tocsr()
