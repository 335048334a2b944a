"""Instance generators and independent oracles shared by the test modules."""

from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg

from hyperdiffusion.hypergraph import build, connected


def random_connected(rng, n, m, min_size=2, max_size=5, weights=(0.5, 2.0)):
    """Random hypergraph made connected by a path of pairs over a random permutation."""
    perm = rng.permutation(n)
    edges = [((int(perm[i]), int(perm[i + 1])), float(rng.uniform(*weights))) for i in range(n - 1)]
    for _ in range(m):
        k = int(rng.integers(min_size, min(max_size, n) + 1))
        edges.append((rng.choice(n, size=k, replace=False).tolist(), float(rng.uniform(*weights))))
    G = build(n, edges)
    assert connected(G)
    return G


def random_graph(rng, n, extra=None, weights=(0.5, 2.0)):
    """Random connected 2-uniform hypergraph."""
    extra = n if extra is None else extra
    return random_connected(rng, n, extra, 2, 2, weights)


def dense_laplacian(G):
    """Graph Laplacian assembled directly from the edge list."""
    L = np.zeros((G.n, G.n))
    for (i, j), w in zip(G.edges, G.weights):
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return L


def graph_poincare(G):
    """Exact Poincaré constant of a 2-uniform l2 model: half the Fiedler value of (L, D)."""
    vals = scipy.linalg.eigh(dense_laplacian(G), np.diag(G.degrees), eigvals_only=True)
    return 0.5 * float(vals[1])


def linf_min_norm_oracle(G, x):
    """Exact minimum D^{-1}-norm element of the l-infinity subdifferential.

    Enumerates supports of every top/bottom simplex, solves each restricted
    equality-constrained QP through its KKT system, and keeps the best
    feasible candidate. Tie sets use exact comparisons, so inputs should be
    exactly representable (small integers).
    """
    dinv = 1.0 / G.degrees
    blocks = []  # (vertex list, coefficient, sign)
    for e, w in zip(G.edges, G.weights):
        xe = x[list(e)]
        hi, lo = xe.max(), xe.min()
        if hi == lo:
            continue
        c = w * (hi - lo) / 2.0
        blocks.append(([v for v in e if x[v] == hi], c, 1.0))
        blocks.append(([v for v in e if x[v] == lo], c, -1.0))
    if not blocks:
        return np.zeros(G.n)
    choices = [
        [sub for r in range(1, len(vs) + 1) for sub in itertools.combinations(vs, r)] for vs, _, _ in blocks
    ]
    best, best_val = None, np.inf
    for supports in itertools.product(*choices):
        cols, owner = [], []
        for b, sup in enumerate(supports):
            for v in sup:
                col = np.zeros(G.n)
                col[v] = blocks[b][1] * blocks[b][2]
                cols.append(col)
                owner.append(b)
        A = np.array(cols).T  # z = z0 + A a, where the simplex masses are 1/2 each
        k, nb = A.shape[1], len(blocks)
        H = A.T @ (dinv[:, None] * A)
        E = np.zeros((nb, k))
        E[owner, np.arange(k)] = 1.0
        K = np.block([[H, E.T], [E, np.zeros((nb, nb))]])
        rhs = np.r_[np.zeros(k), np.full(nb, 0.5)]
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        a = sol[:k]
        if a.min() < -1e-12 or np.abs(E @ a - 0.5).max() > 1e-9:
            continue
        z = A @ a
        val = 0.5 * float(z @ (dinv * z))
        if val < best_val - 1e-15:
            best, best_val = z, val
    return best


def planted_two_cluster(rng, size=20, inner=40, crossing=2):
    """Two dense clusters of ``size`` vertices joined by ``crossing`` hyperedges.

    Returns the hypergraph and the vertex list of the first cluster.
    """
    edges = []
    for base in (0, size):
        perm = base + rng.permutation(size)
        edges += [((int(perm[i]), int(perm[i + 1])), 1.0) for i in range(size - 1)]
        for _ in range(inner):
            k = int(rng.integers(2, 6))
            edges.append(((base + rng.choice(size, k, replace=False)).tolist(), 1.0))
    for _ in range(crossing):
        a = rng.choice(size, int(rng.integers(1, 3)), replace=False)
        b = size + rng.choice(size, int(rng.integers(1, 3)), replace=False)
        edges.append((np.r_[a, b].tolist(), 1.0))
    G = build(2 * size, edges)
    assert connected(G)
    return G, list(range(size))
