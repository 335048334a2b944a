"""Subgradient oracles for the hypergraph Laplacian ``L(x) = dU(x)``.

Every element of ``L(x)`` has the form ``z = sum_h w_h f_h(x) y_h`` where
each witness ``y_h`` is orthogonal to ones, has dual norm at most one and
attains ``<y_h, x_h> = f_h(x)``. Witnesses are stored flat, aligned with the
hypergraph's CSR incidence (``graph.edge_vertices``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ToleranceNotReached
from .hypergraph import as_vertex_vector
from .potentials import LINF, PotentialModel


@dataclass
class SubgradientCertificate:
    """A subgradient ``z`` together with the per-hyperedge witnesses proving membership."""

    z: np.ndarray
    witnesses: np.ndarray
    shifts: np.ndarray
    model: PotentialModel

    def witness(self, h: int) -> np.ndarray:
        G = self.model.graph
        return self.witnesses[G.edge_ptr[h]: G.edge_ptr[h + 1]]

    def assembled(self) -> np.ndarray:
        """Recompute ``z`` from the witnesses."""
        return scatter(self.model, self.shifts, self.witnesses)

    def to_csv(self, path) -> None:
        G = self.model.graph
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["vertex", "z_value"])
            for i, v in enumerate(self.z):
                wr.writerow([i, repr(float(v))])
            wr.writerow([])
            wr.writerow(["edge", "shift", "vertex", "witness"])
            for h in range(G.m):
                for v, yv in zip(G.edges[h], self.witness(h)):
                    wr.writerow([h, repr(float(self.shifts[h])), v, repr(float(yv))])


@dataclass
class MinNormResult:
    z: np.ndarray
    gap: float
    iterations: int
    certificate: SubgradientCertificate


def scatter(model: PotentialModel, f: np.ndarray, y: np.ndarray) -> np.ndarray:
    G = model.graph
    coef = (G.weights * f)[G.edge_of_entry]
    return np.bincount(G.edge_vertices, weights=coef * y, minlength=G.n).astype(float)


def _tie_sets(model: PotentialModel, x: np.ndarray):
    """Top/bottom tie masks per incidence entry for the l-infinity hyperedges."""
    G = model.graph
    starts = G.edge_ptr[:-1]
    xf = x[G.edge_vertices]
    mx = np.maximum.reduceat(xf, starts)
    mn = np.minimum.reduceat(xf, starts)
    absmax = np.maximum.reduceat(np.abs(xf), starts)
    eps = np.minimum(1e-9 * (1.0 + absmax), (mx - mn) / 4.0)
    rep = G.edge_of_entry
    active = (model.kinds == LINF) & (mx > mn)
    on = active[rep]
    top = on & (xf >= (mx - eps)[rep])
    bot = on & (xf <= (mn + eps)[rep])
    return top, bot, active


def any_subgradient(model: PotentialModel, x, balanced: bool = False) -> SubgradientCertificate:
    """A deterministic element of ``L(x)``.

    l-infinity hyperedges put +1/2 on the lowest-index top entry and -1/2 on
    the lowest-index bottom entry (or spread the halves uniformly over the tie
    sets when ``balanced``); l2 hyperedges use the normalized centred vector;
    Lovász hyperedges use the greedy base-polytope vertex of the sorted order.
    """
    return _any(model, as_vertex_vector(x, model.n), balanced)


def _any(model: PotentialModel, x: np.ndarray, balanced: bool = False) -> SubgradientCertificate:
    G = model.graph
    f = np.zeros(G.m)
    y = np.zeros(len(G.edge_vertices))
    if G.m == 0:
        return SubgradientCertificate(np.zeros(G.n), y, f, model)
    _kernels.basic_witnesses(G.edge_ptr, G.edge_vertices, model.kinds, x, balanced, y, f)
    if model.lovasz_edges.size:
        model.lovasz_witnesses(x, y, f)
    return SubgradientCertificate(scatter(model, f, y), y, f, model)


class _LovaszBlock:
    """Active-set state of one Lovász hyperedge inside the Frank-Wolfe loop."""

    def __init__(self, model, h, x, coef):
        G = model.graph
        self.h = h
        self.norm = model.norms[h]
        self.verts = G.edge_vertices[G.edge_ptr[h]: G.edge_ptr[h + 1]]
        self.x_h = x[self.verts]
        self.coef = coef
        order = self.norm.ordered(self.x_h)
        first = self.norm.scale * self.norm.cut.greedy_vertex(order)
        self.atoms = {order.tobytes(): first}
        self.alpha = {order.tobytes(): 1.0}

    def y(self):
        return sum(a * self.atoms[key] for key, a in self.alpha.items())

    def fw_atom(self, gh):
        order = self.norm.ordered(self.x_h, tie_key=gh)
        return order.tobytes(), self.norm.scale * self.norm.cut.greedy_vertex(order)

    def gap(self, g):
        gh = g[self.verts]
        _, s = self.fw_atom(gh)
        return self.coef * float(gh @ (self.y() - s))

    def step(self, z, g, invd):
        gh = g[self.verts]
        key_s, s = self.fw_atom(gh)
        key_v = max(self.alpha, key=lambda k: float(gh @ self.atoms[k]))
        if key_s == key_v:
            return
        d = self.coef * (s - self.atoms[key_v])
        num = float(gh @ d)
        curv = float(invd[self.verts] @ (d * d))
        if num >= 0 or curv <= 0:
            return
        gamma = min(-num / curv, self.alpha[key_v])
        self.atoms.setdefault(key_s, s)
        self.alpha[key_s] = self.alpha.get(key_s, 0.0) + gamma
        self.alpha[key_v] -= gamma
        if self.alpha[key_v] <= 1e-15:
            del self.alpha[key_v]
        z[self.verts] += gamma * d
        g[self.verts] += invd[self.verts] * gamma * d


def min_norm_subgradient(
    model: PotentialModel,
    x,
    tol: float = 1e-8,
    max_iter: int = 100_000,
    target=None,
    warm_start: np.ndarray | None = None,
) -> MinNormResult:
    """Element of ``L(x)`` of minimum ``D^{-1}``-norm, by Frank-Wolfe.

    Minimizes ``1/2 ||z - target||^2_{D^{-1}}`` over ``z`` in ``L(x)``
    (``target`` defaults to zero, giving the min-norm element). The feasible
    set is a product of per-hyperedge faces; each round performs one pairwise
    Frank-Wolfe step with exact line search on every hyperedge. Iteration
    stops once the Frank-Wolfe duality gap is at most
    ``tol * (1 + ||z - target||^2_{D^{-1}})``.

    Parameters
    ----------
    warm_start : array, optional
        Flat witness vector from a previous call (e.g. the previous diffusion
        step). It is projected onto the current faces before use.

    Raises
    ------
    ToleranceNotReached
        After ``max_iter`` rounds; the best iterate is attached as ``.result``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = model.graph
    x = as_vertex_vector(x, G.n)
    start = _any(model, x, balanced=True)
    f, y = start.shifts, start.witnesses.copy()
    t = np.zeros(G.n) if target is None else as_vertex_vector(target, G.n, "target")
    deg = G.degrees
    invd = np.divide(1.0, deg, out=np.zeros(G.n), where=deg > 0)
    coef = G.weights * f

    if G.m:
        top, bot, active = _tie_sets(model, x)
    else:
        top = bot = np.zeros(0, dtype=bool)
        active = np.zeros(0, dtype=bool)
    if warm_start is not None and active.any():
        y = _project_warm(G, np.asarray(warm_start, dtype=float), top, bot, y)
    role = np.zeros(len(y), dtype=np.int8)
    role[top] = 1
    role[bot] = -1
    linf_edges = np.flatnonzero(active).astype(np.int64)
    blocks = [_LovaszBlock(model, h, x, coef[h]) for h in model.lovasz_edges if f[h] > 0]
    for b in blocks:
        y[G.edge_ptr[b.h]: G.edge_ptr[b.h + 1]] = b.y()

    z = scatter(model, f, y)
    g = invd * (z - t)
    gap = 0.0
    it = 0
    for it in range(max_iter + 1):
        gap = _kernels.linf_gap(G.edge_ptr, G.edge_vertices, role, y, coef, linf_edges, g)
        gap += sum(b.gap(g) for b in blocks)
        r = z - t
        if gap <= tol * (1.0 + float(invd @ (r * r))):
            break
        if it == max_iter:
            for b in blocks:
                y[G.edge_ptr[b.h]: G.edge_ptr[b.h + 1]] = b.y()
            cert = SubgradientCertificate(scatter(model, f, y), y, f, model)
            raise ToleranceNotReached(max_iter, MinNormResult(cert.z, gap, it, cert))
        _kernels.linf_sweep(G.edge_ptr, G.edge_vertices, role, y, coef, linf_edges, z, g, invd, 1)
        for b in blocks:
            b.step(z, g, invd)
    for b in blocks:
        y[G.edge_ptr[b.h]: G.edge_ptr[b.h + 1]] = b.y()
    cert = SubgradientCertificate(scatter(model, f, y), y, f, model)
    return MinNormResult(cert.z, max(gap, 0.0), it, cert)


def _project_warm(G, prev, top, bot, fallback):
    """Restrict a previous witness vector to the current tie sets and renormalize."""
    rep = G.edge_of_entry
    starts = G.edge_ptr[:-1]
    y = fallback.copy()
    a = np.where(top, np.maximum(prev, 0.0), 0.0)
    b = np.where(bot, np.maximum(-prev, 0.0), 0.0)
    sa = np.add.reduceat(a, starts)[rep]
    sb = np.add.reduceat(b, starts)[rep]
    use_a = top & (sa > 0)
    use_b = bot & (sb > 0)
    y[use_a] = 0.5 * a[use_a] / sa[use_a]
    y[use_b] = -0.5 * b[use_b] / sb[use_b]
    return y


def laplacian_oracle(model: PotentialModel, kind: str = "any", tol: float = 1e-8):
    """Return ``x -> z`` for the named oracle (``"any"`` or ``"minnorm"``)."""
    if kind == "any":
        return lambda x: any_subgradient(model, x).z
    if kind == "minnorm":
        return lambda x: min_norm_subgradient(model, x, tol=tol).z
    raise ValueError(f"unknown oracle {kind!r}")

