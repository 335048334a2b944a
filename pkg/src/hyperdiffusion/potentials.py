"""Hyperedge norms and the hypergraph potential.

The potential of a vertex vector ``x`` is

    U(x) = 1/2 * sum_h w_h * f_h(x)^2,   f_h(x) = min_u ||x_h - u 1||_h,

where ``f_h`` is the *shift value* of hyperedge ``h``. Three hyperedge norms
are supported: ``LInfNorm`` (the standard hypergraph potential), ``L2Norm``
(which reduces to the graph Laplacian quadratic form on 2-uniform inputs) and
``LovaszNorm`` built from a symmetric submodular cut function.
"""

from __future__ import annotations

import logging
import math
from typing import Mapping, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import _kernels
from .errors import ConstantVector, DisconnectedGraph, HypergraphError, InvalidCutFunction
from .hypergraph import Hypergraph, as_vertex_vector, clique_expansion, connected, graph_laplacian

log = logging.getLogger(__name__)

LINF, L2, LOVASZ = 0, 1, 2

MAX_CUT_GROUND_SET = 12


def tie_tolerance(x_h: np.ndarray) -> float:
    """Relative tolerance used to decide that two entries are tied."""
    spread = float(x_h.max() - x_h.min()) if x_h.size else 0.0
    return min(1e-9 * (1.0 + float(np.abs(x_h).max(initial=0.0))), spread / 4.0)


# ---------------------------------------------------------------------------
# cut functions


def _popcount_table(k: int) -> np.ndarray:
    masks = np.arange(1 << k)
    return np.array([bin(m).count("1") for m in masks])


class CutFunction:
    """Symmetric submodular set function on a ground set ``{0..k-1}``.

    ``table[mask]`` is the value of the subset whose members are the set bits
    of ``mask``. Validation is exhaustive, so ``k`` is capped at 12.
    """

    def __init__(self, table, validate: bool = True, atol: float = 1e-12):
        table = np.asarray(table, dtype=float)
        k = int(round(math.log2(table.size))) if table.size else -1
        if k < 1 or table.size != 1 << k:
            raise InvalidCutFunction("table length must be a power of two >= 2")
        if k > MAX_CUT_GROUND_SET:
            raise InvalidCutFunction(f"ground set of size {k} exceeds the cap of {MAX_CUT_GROUND_SET}")
        self.k = k
        self.table = table
        self.table.setflags(write=False)
        if validate:
            self.validate(atol)

    def validate(self, atol: float = 1e-12) -> None:
        t, k = self.table, self.k
        full = (1 << k) - 1
        if abs(t[0]) > atol or abs(t[full]) > atol:
            raise InvalidCutFunction("cut function must vanish on the empty and the full set")
        masks = np.arange(1 << k)
        if not np.allclose(t, t[full ^ masks], rtol=0, atol=atol):
            raise InvalidCutFunction("cut function is not symmetric")
        if not self.is_submodular(atol):
            raise InvalidCutFunction("cut function is not submodular")
        if np.any(self.singletons() <= 0):
            raise InvalidCutFunction("singleton cut values must be positive")

    def is_submodular(self, atol: float = 1e-12) -> bool:
        # local form: f(A+i) + f(A+j) >= f(A+i+j) + f(A) for i, j not in A
        t, k = self.table, self.k
        masks = np.arange(1 << k)
        for i in range(k):
            for j in range(i + 1, k):
                bi, bj = 1 << i, 1 << j
                A = masks[(masks & (bi | bj)) == 0]
                if np.any(t[A | bi] + t[A | bj] - t[A | bi | bj] - t[A] < -atol):
                    return False
        return True

    def singletons(self) -> np.ndarray:
        return self.table[1 << np.arange(self.k)]

    def value(self, S) -> float:
        mask = 0
        for v in S:
            mask |= 1 << int(v)
        return float(self.table[mask])

    def _prefix_masks(self, order: np.ndarray) -> np.ndarray:
        return np.cumsum(1 << order.astype(np.int64))

    def lovasz(self, x) -> float:
        """Lovász extension, evaluated on sorted level sets."""
        x = np.asarray(x, dtype=float)
        order = np.argsort(-x, kind="stable")
        xs = x[order]
        vals = self.table[self._prefix_masks(order)]
        return float(np.dot(xs[:-1] - xs[1:], vals[:-1]) + xs[-1] * vals[-1])

    def greedy_vertex(self, order) -> np.ndarray:
        """Vertex of the base polytope generated by the given element order."""
        order = np.asarray(order, dtype=np.int64)
        vals = self.table[self._prefix_masks(order)]
        y = np.empty(self.k)
        y[order] = np.diff(np.concatenate([[0.0], vals]))
        return y

    def subset_sums(self, y) -> np.ndarray:
        """``y(A)`` for every subset mask ``A``."""
        y = np.asarray(y, dtype=float)
        sums = np.zeros(1 << self.k)
        for i in range(self.k):
            b = 1 << i
            sums[b: 2 * b] = sums[:b] + y[i]
        return sums

    @classmethod
    def cardinality_based(cls, k: int, g) -> "CutFunction":
        """``delta(S) = g[min(|S|, k - |S|)]`` for a profile ``g`` with ``g[0] = 0``."""
        g = np.asarray(g, dtype=float)
        pc = _popcount_table(k)
        return cls(g[np.minimum(pc, k - pc)])

    @classmethod
    def standard(cls, k: int) -> "CutFunction":
        """All-or-nothing cut: 1 on every proper nonempty subset."""
        return cls.cardinality_based(k, np.r_[0.0, np.ones(k // 2)])

    @classmethod
    def from_file(cls, path) -> "CutFunction":
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
        k = int(lines[0][0])
        table = np.full(1 << k, np.nan)
        for mask, val in lines[1:]:
            table[int(mask)] = float(val)
        if np.isnan(table).any():
            raise InvalidCutFunction("cut function file does not list every subset")
        return cls(table)

    def to_file(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"{self.k}\n")
            for mask, val in enumerate(self.table):
                fh.write(f"{mask} {float(val)!r}\n")


def lovasz_value(cut: CutFunction, x_h) -> float:
    return cut.lovasz(x_h)


# ---------------------------------------------------------------------------
# hyperedge norms


class EdgeNorm:
    kind: int = -1

    def norm(self, v) -> float:
        raise NotImplementedError

    def min_shift(self, x_h) -> float:
        raise NotImplementedError

    def dual_norm(self, y) -> float:
        raise NotImplementedError

    def witness(self, x_h, balanced: bool = False) -> np.ndarray:
        raise NotImplementedError


class LInfNorm(EdgeNorm):
    kind = LINF

    def norm(self, v):
        return float(np.abs(v).max())

    def min_shift(self, x_h):
        x_h = np.asarray(x_h, dtype=float)
        return float(x_h.max() - x_h.min()) / 2.0

    def dual_norm(self, y):
        return float(np.abs(y).sum())

    def witness(self, x_h, balanced=False):
        """Half unit of mass on the top entries, minus half on the bottom ones."""
        x_h = np.asarray(x_h, dtype=float)
        y = np.zeros(x_h.size)
        hi, lo = x_h.max(), x_h.min()
        if hi == lo:
            return y
        eps = tie_tolerance(x_h)
        top = np.flatnonzero(x_h >= hi - eps)
        bot = np.flatnonzero(x_h <= lo + eps)
        if balanced:
            y[top] += 0.5 / top.size
            y[bot] -= 0.5 / bot.size
        else:
            y[top[0]] += 0.5
            y[bot[0]] -= 0.5
        return y

    def __repr__(self):
        return "LInfNorm()"


class L2Norm(EdgeNorm):
    kind = L2

    def norm(self, v):
        return float(np.linalg.norm(v))

    def min_shift(self, x_h):
        x_h = np.asarray(x_h, dtype=float)
        return float(np.linalg.norm(x_h - x_h.mean()))

    def dual_norm(self, y):
        return float(np.linalg.norm(y))

    def witness(self, x_h, balanced=False):
        x_h = np.asarray(x_h, dtype=float)
        c = x_h - x_h.mean()
        nrm = np.linalg.norm(c)
        return c / nrm if nrm > 0 else np.zeros_like(c)

    def __repr__(self):
        return "L2Norm()"


class LovaszNorm(EdgeNorm):
    """Norm whose shift value is a rescaled Lovász extension.

    The underlying norm is ``scale * (lovasz(v) + |sum(v)|)``. Its shift
    value is ``scale * lovasz(x_h)``. ``scale`` is chosen so that the norm
    never exceeds the Euclidean norm: every base-polytope vertex ``y``
    satisfies ``|y_v| <= delta({v})``, hence ``lovasz(v) <= ||y||_2 * ||v||_2``
    with ``||y||_2 <= sqrt(sum delta({v})^2)``, while ``|sum(v)| <= sqrt(k) ||v||_2``.
    """

    kind = LOVASZ

    def __init__(self, cut: CutFunction):
        self.cut = cut
        self.k = cut.k
        self.scale = 1.0 / (float(np.linalg.norm(cut.singletons())) + math.sqrt(cut.k))
        log.debug("Lovasz norm on %d elements rescaled by %.6g", cut.k, self.scale)

    def norm(self, v):
        v = np.asarray(v, dtype=float)
        return self.scale * (self.cut.lovasz(v) + abs(float(v.sum())))

    def min_shift(self, x_h):
        return self.scale * self.cut.lovasz(x_h)

    def dual_norm(self, y):
        """Dual norm, valid for vectors orthogonal to ones."""
        y = np.asarray(y, dtype=float)
        if abs(y.sum()) > 1e-9 * (1.0 + np.abs(y).sum()):
            raise HypergraphError("dual norm only implemented on vectors orthogonal to ones")
        sums = self.cut.subset_sums(y)[1:-1]
        vals = self.cut.table[1:-1]
        pos = vals > 0
        if np.any((~pos) & (sums > 1e-12)):
            return math.inf
        t = max(0.0, float((sums[pos] / vals[pos]).max(initial=0.0)))
        return t / self.scale

    def ordered(self, x_h, tie_key=None) -> np.ndarray:
        """Element order by descending ``x_h``; tied groups sorted by ``tie_key`` ascending."""
        x_h = np.asarray(x_h, dtype=float)
        order = np.argsort(-x_h, kind="stable")
        if tie_key is None:
            return order
        groups = tie_groups(x_h[order])
        out = []
        for g in np.split(order, np.flatnonzero(np.diff(groups)) + 1):
            out.extend(g[np.argsort(np.asarray(tie_key)[g], kind="stable")])
        return np.array(out, dtype=np.int64)

    def witness(self, x_h, balanced=False):
        x_h = np.asarray(x_h, dtype=float)
        if x_h.max() == x_h.min():
            return np.zeros(x_h.size)
        return self.scale * self.cut.greedy_vertex(self.ordered(x_h))

    def __repr__(self):
        return f"LovaszNorm(k={self.k})"


def tie_groups(sorted_desc: np.ndarray) -> np.ndarray:
    """Group labels for a descending-sorted vector.

    A new group starts when a value drops more than the tie tolerance below the
    first value of the current group (no chaining of near-ties).
    """
    eps = tie_tolerance(sorted_desc)
    labels = np.empty(sorted_desc.size, dtype=np.int64)
    g, lead = 0, sorted_desc[0] if sorted_desc.size else 0.0
    for i, v in enumerate(sorted_desc):
        if v < lead - eps:
            g += 1
            lead = v
        labels[i] = g
    return labels


def min_shift_norm(norm: EdgeNorm, x_h) -> float:
    return norm.min_shift(x_h)


def parse_norm(spec: str) -> EdgeNorm:
    """``linf``, ``l2`` or ``lovasz:<cut-function file>``."""
    if spec == "linf":
        return LInfNorm()
    if spec == "l2":
        return L2Norm()
    if spec.startswith("lovasz:"):
        return LovaszNorm(CutFunction.from_file(spec.split(":", 1)[1]))
    raise ValueError(f"unknown norm {spec!r}")


# ---------------------------------------------------------------------------
# potential model


class PotentialModel:
    """A hypergraph together with one norm per hyperedge and a regularizer.

    Parameters
    ----------
    graph : Hypergraph
    norm : EdgeNorm or sequence of EdgeNorm, optional
        Global default norm (``LInfNorm`` if omitted) or one norm per hyperedge.
    overrides : mapping of hyperedge index to EdgeNorm, optional
    lam : float
        Weight of the quadratic regularizer ``(lam/2) ||x||_D^2``.
    """

    def __init__(
        self,
        graph: Hypergraph,
        norm: EdgeNorm | Sequence[EdgeNorm] | None = None,
        overrides: Mapping[int, EdgeNorm] | None = None,
        lam: float = 0.0,
    ):
        if lam < 0:
            raise HypergraphError("regularizer must be nonnegative")
        self.graph = graph
        self.lam = float(lam)
        if norm is None:
            norm = LInfNorm()
        if isinstance(norm, EdgeNorm):
            norms = [norm] * graph.m
        else:
            norms = list(norm)
            if len(norms) != graph.m:
                raise HypergraphError("need exactly one norm per hyperedge")
        for h, nm in (overrides or {}).items():
            norms[h] = nm
        self.norms = norms
        self.kinds = np.array([nm.kind for nm in norms], dtype=np.int8)
        self.lovasz_edges = np.flatnonzero(self.kinds == LOVASZ)
        for h in self.lovasz_edges:
            if norms[h].k != graph.edge_sizes[h]:
                raise HypergraphError(
                    f"hyperedge {h} has {graph.edge_sizes[h]} vertices but its cut function has {norms[h].k}"
                )
        # packed cut tables for the compiled witness kernel
        self.lovasz_offsets = np.zeros(graph.m, dtype=np.int64)
        self.lovasz_scales = np.zeros(graph.m)
        tables = []
        off = 0
        for h in self.lovasz_edges:
            self.lovasz_offsets[h] = off
            self.lovasz_scales[h] = norms[h].scale
            tables.append(norms[h].cut.table)
            off += norms[h].cut.table.size
        self.lovasz_tables = np.concatenate(tables) if tables else np.zeros(0)

    @property
    def n(self) -> int:
        return self.graph.n

    def with_lam(self, lam: float) -> "PotentialModel":
        return PotentialModel(self.graph, self.norms, lam=lam)

    def local(self, x: np.ndarray, h: int) -> np.ndarray:
        G = self.graph
        return x[G.edge_vertices[G.edge_ptr[h]: G.edge_ptr[h + 1]]]

    def shifts(self, x: np.ndarray) -> np.ndarray:
        """Shift value ``f_h(x)`` of every hyperedge."""
        G = self.graph
        if G.m == 0:
            return np.zeros(0)
        starts = G.edge_ptr[:-1]
        xf = x[G.edge_vertices]
        f = np.empty(G.m)
        linf = self.kinds == LINF
        if linf.any():
            spread = np.maximum.reduceat(xf, starts) - np.minimum.reduceat(xf, starts)
            f[linf] = spread[linf] / 2.0
        l2 = self.kinds == L2
        if l2.any():
            mean = np.add.reduceat(xf, starts) / G.edge_sizes
            dev = xf - mean[G.edge_of_entry]
            f[l2] = np.sqrt(np.add.reduceat(dev * dev, starts))[l2]
        if self.lovasz_edges.size:
            self.lovasz_witnesses(x, np.empty(len(G.edge_vertices)), f)
        return f

    def lovasz_witnesses(self, x: np.ndarray, y: np.ndarray, f: np.ndarray) -> None:
        """Fill shift values and greedy witnesses of the Lovász hyperedges in place."""
        G = self.graph
        _kernels.lovasz_witnesses(
            G.edge_ptr, G.edge_vertices, self.lovasz_edges.astype(np.int64), self.lovasz_offsets,
            self.lovasz_tables, self.lovasz_scales, np.ascontiguousarray(x, dtype=float), y, f,
        )


def potential(model: PotentialModel, x, regularized: bool = False) -> float:
    """``U(x)``, plus ``(lam/2)||x||_D^2`` when ``regularized`` is set."""
    x = as_vertex_vector(x, model.n)
    f = model.shifts(x)
    u = 0.5 * float(np.dot(model.graph.weights, f * f))
    if regularized and model.lam > 0:
        u += 0.5 * model.lam * float(np.dot(model.graph.degrees, x * x))
    return u


def d_norm_sq(G: Hypergraph, x: np.ndarray) -> float:
    return float(np.dot(G.degrees, x * x))


def rayleigh(model: PotentialModel, x) -> float:
    """``U(x) / (1/2 ||x||_D^2)`` after removing the D-projection onto ones."""
    G = model.graph
    x = as_vertex_vector(x, G.n)
    xc = x - float(G.degrees @ x) / G.volume
    den = 0.5 * d_norm_sq(G, xc)
    if den <= 1e-300 or den <= 1e-28 * max(1.0, d_norm_sq(G, x)):
        raise ConstantVector("vector has no component D-orthogonal to ones")
    return potential(model, xc) / den


def estimate_lambda(model: PotentialModel, iterations: int = 50, restarts: int = 5, seed: int = 0) -> float:
    """Smallest Rayleigh quotient seen along diffusions from random starts.

    This is an *upper* bound on the Poincaré constant of the hypergraph
    (a minimum over sampled points), usable for reporting and iteration
    budgets only.
    """
    from .diffusion import heat_step

    G = model.graph
    if not connected(G):
        raise DisconnectedGraph("Poincaré constant estimate requires a connected hypergraph")
    rng = np.random.default_rng(seed)
    best = math.inf
    for _ in range(restarts):
        x = rng.standard_normal(G.n)
        x -= float(G.degrees @ x) / G.volume
        var0 = d_norm_sq(G, x)
        for _ in range(iterations + 1):
            if d_norm_sq(G, x) <= 1e-24 * var0:
                break
            best = min(best, rayleigh(model, x))
            x = heat_step(model, x)
    return best


def edge_poincare_factor(model: PotentialModel, h: int) -> float:
    """Constant ``c`` with ``f_h(x)^2 >= c * sum_{i<j in h} (x_i - x_j)^2``."""
    r = int(model.graph.edge_sizes[h])
    pairs = r * (r - 1) / 2
    kind = model.kinds[h]
    if kind == LINF:
        return 0.25 / pairs
    if kind == L2:
        return 1.0 / r
    nm = model.norms[h]
    proper_min = float(nm.cut.table[1:-1].min())
    return (nm.scale * proper_min) ** 2 / pairs


def poincare_lower_bound(model: PotentialModel) -> float:
    """Certified lower bound on the Poincaré constant.

    Every hyperedge satisfies ``f_h^2 >= c_h * sum_{pairs}(x_i-x_j)^2``, so
    ``U(x) >= min_h c_h * (1/2) x^T L_clique x`` and the constant is at least
    ``min_h c_h`` times the second generalized eigenvalue of the
    clique-expansion Laplacian against the hypergraph degree matrix.
    """
    G = model.graph
    if not connected(G):
        raise DisconnectedGraph("Poincaré bound requires a connected hypergraph")
    if G.n == 1:
        return 1.0
    c = min(edge_poincare_factor(model, h) for h in range(G.m))
    lam2 = generalized_fiedler_value(graph_laplacian(clique_expansion(G)), G.degrees)
    return max(0.0, min(1.0, c * lam2))


def generalized_fiedler_value(L, degrees: np.ndarray) -> float:
    """Second smallest eigenvalue of the pencil ``(L, diag(degrees))``."""
    n = len(degrees)
    if n <= 2000:
        vals = scipy.linalg.eigh(L.toarray(), np.diag(degrees), eigvals_only=True, subset_by_index=[0, 1])
        return float(vals[1])
    dinv = 1.0 / np.sqrt(degrees)
    N = scipy.sparse.diags(dinv) @ L @ scipy.sparse.diags(dinv)
    vals = scipy.sparse.linalg.eigsh(N, k=2, sigma=-1e-3, which="LM", return_eigenvectors=False)
    return float(np.sort(vals)[1])
