"""Sweep-cut rounding and diffusion-based local partitioning."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstantVector
from .hypergraph import Hypergraph, as_vertex_vector, conductance, indicator
from .diffusion import diffuse
from .potentials import PotentialModel, d_norm_sq, potential


@dataclass
class SweepResult:
    """Best prefix cut of a sweep.

    ``profile[i]`` is the conductance of the first ``i + 1`` vertices of
    ``ordering`` (``inf`` when one side has zero volume). ``phi`` is
    recomputed from scratch for the selected prefix ``S``.
    """

    ordering: np.ndarray
    S: np.ndarray
    phi: float
    profile: np.ndarray
    t_star: int | None = None
    rayleigh: list | None = None

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["rank", "vertex", "phi"])
            for r, (v, p) in enumerate(zip(self.ordering, self.profile)):
                wr.writerow([r, int(v), repr(float(p))])


def _vertex_incidence(G: Hypergraph):
    order = np.argsort(G.edge_vertices, kind="stable")
    ptr = np.concatenate([[0], np.cumsum(np.bincount(G.edge_vertices, minlength=G.n))])
    return ptr, G.edge_of_entry[order]


def sweep_cut(G: Hypergraph, x) -> SweepResult:
    """Scan prefixes of ``x`` sorted descending (ties by index) and keep the best conductance.

    Boundary weight is maintained incrementally with one counter per
    hyperedge: a hyperedge is cut while its count of swept vertices is
    strictly between 0 and its size.

    Raises
    ------
    ConstantVector
        If ``x`` is constant.
    """
    x = as_vertex_vector(x, G.n)
    if G.n < 2 or x.max() == x.min():
        raise ConstantVector("cannot sweep a constant vector")
    ordering = np.lexsort((np.arange(G.n), -x))
    vptr, vedges = _vertex_incidence(G)
    count = np.zeros(G.m, dtype=np.int64)
    sizes = G.edge_sizes
    w = G.weights
    deg = G.degrees
    profile = np.empty(G.n - 1)
    boundary = 0.0
    vol = 0.0
    for i in range(G.n - 1):
        v = ordering[i]
        for h in vedges[vptr[v]: vptr[v + 1]]:
            count[h] += 1
            if count[h] == 1:
                boundary += w[h]
            if count[h] == sizes[h]:
                boundary -= w[h]
        vol += deg[v]
        denom = min(vol, G.volume - vol)
        profile[i] = min(boundary / denom, 1.0) if denom > 1e-12 * G.volume else math.inf
    best = int(np.argmin(profile))
    if not np.isfinite(profile[best]):
        raise ConstantVector("no prefix of the sweep has positive volume on both sides")
    S = np.sort(ordering[: best + 1])
    phi = conductance(G, S).conductance
    return SweepResult(ordering, S, phi, profile)


def local_partition(
    model: PotentialModel,
    v: int,
    phi_target: float,
    tol: float = 1e-8,
    oracle: str = "minnorm",
) -> SweepResult:
    """Diffuse from ``1_v`` and sweep the iterate with the smallest Rayleigh quotient.

    Runs ``T = ceil(1/(3 phi_target))`` steps. Among ``t = 1..T`` the state
    minimizing ``U(x_t) / (1/2 ||x_t - pi(1_v)||_D^2)`` is rounded by
    :func:`sweep_cut`; the chosen ``t`` is returned as ``t_star``.
    """
    if not 0 < phi_target <= 1:
        raise ValueError("phi_target must lie in (0, 1]")
    G = model.graph
    if not 0 <= v < G.n:
        raise ValueError(f"seed vertex {v} out of range")
    T = math.ceil(1.0 / (3.0 * phi_target) - 1e-9)
    x0 = indicator(G.n, [v])
    best = {"q": math.inf, "t": None, "x": None}
    pi0 = float(G.degrees @ x0) / G.volume

    def consider(t, x):
        var = d_norm_sq(G, x - pi0)
        if var <= 0:
            return
        q = potential(model, x) / (0.5 * var)
        if q < best["q"]:
            best.update(q=q, t=t, x=x.copy())

    trace = diffuse(model, x0, T, tol=tol, oracle=oracle, callback=lambda t, x, z: t >= 1 and consider(t, x))
    consider(T, trace.final)
    if best["x"] is None:
        raise ConstantVector("every diffusion iterate is constant")
    res = sweep_cut(G, best["x"])
    res.t_star = best["t"]
    res.rayleigh = trace.rayleigh[1:]
    return res
