"""Plain-text file formats.

Hypergraph file::

    n m
    w k v1 v2 ... vk        (m lines, 0-based vertex ids)

Bipartite edge list: one ``left right`` pair per line; lines starting with
``%`` or ``#`` are comments. Point clouds are CSV with one point per row.
Vectors are CSV with header ``vertex,value``. Metadata sidecars hold
``key = value`` lines.
"""

from __future__ import annotations

import csv
from collections import defaultdict

import numpy as np

from .errors import HypergraphError
from .hypergraph import Hypergraph, as_vertex_vector, build


def write_hypergraph(G: Hypergraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{G.n} {G.m}\n")
        for e, w in zip(G.edges, G.weights):
            fh.write(f"{float(w)!r} {len(e)} {' '.join(map(str, e))}\n")


def read_hypergraph(path) -> Hypergraph:
    with open(path) as fh:
        rows = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise HypergraphError(f"{path}: first line must be 'n m'")
    try:
        n, m = int(rows[0][0]), int(rows[0][1])
        edges = []
        for i, row in enumerate(rows[1:], start=2):
            w, k = float(row[0]), int(row[1])
            if len(row) != k + 2:
                raise HypergraphError(f"{path}: line {i} declares {k} vertices but lists {len(row) - 2}")
            edges.append(([int(v) for v in row[2:]], w))
    except (ValueError, IndexError) as exc:
        if isinstance(exc, HypergraphError):
            raise
        raise HypergraphError(f"{path}: malformed hypergraph file ({exc})") from None
    if len(edges) != m:
        raise HypergraphError(f"{path}: header announces {m} hyperedges, found {len(edges)}")
    return build(n, edges)


def read_bipartite(path) -> tuple[int, list[list[int]]]:
    """Left vertex count and the neighbour list of every right node (sorted by right id)."""
    nbrs: dict[int, list[int]] = defaultdict(list)
    n_left = 0
    with open(path) as fh:
        for i, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln or ln[0] in "%#":
                continue
            parts = ln.split()
            try:
                left, right = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                raise HypergraphError(f"{path}: line {i} is not a 'left right' pair") from None
            if left < 0:
                raise HypergraphError(f"{path}: line {i} has a negative vertex id")
            nbrs[right].append(left)
            n_left = max(n_left, left + 1)
    return n_left, [nbrs[r] for r in sorted(nbrs)]


def read_points(path) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.all(np.isfinite(X)):
        raise HypergraphError(f"{path}: point cloud contains NaN or Inf")
    return X


def write_points(X, path) -> None:
    np.savetxt(path, np.asarray(X), delimiter=",", fmt="%.17g")


def write_vector(x, path, header=("vertex", "value")) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for i, v in enumerate(x):
            wr.writerow([i, repr(float(v))])


def read_vector(path, n: int) -> np.ndarray:
    """Read ``vertex,value`` rows; unlisted vertices are zero."""
    x = np.zeros(n)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    for row in rows[1:] if rows and not _is_number(rows[0][0]) else rows:
        if not row:
            continue
        v = int(row[0])
        if not 0 <= v < n:
            raise HypergraphError(f"{path}: vertex {v} out of range")
        x[v] = float(row[1])
    return as_vertex_vector(x, n)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_meta(meta: dict, path) -> None:
    with open(path, "w") as fh:
        for k, v in meta.items():
            fh.write(f"{k} = {_fmt(v)}\n")


def read_meta(path) -> dict:
    out = {}
    with open(path) as fh:
        for ln in fh:
            if "=" in ln:
                k, v = ln.split("=", 1)
                out[k.strip()] = v.strip()
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(u) for u in v)
    return str(v)
