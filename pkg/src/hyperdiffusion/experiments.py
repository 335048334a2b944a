"""Experiment harnesses: resolvent benchmark and semi-supervised manifold labelling.

All randomness flows from ``numpy.random.default_rng`` (PCG64) seeded by the
configuration, so identical configurations give identical ``report.csv``
files. Wall-clock timings are written to a separate ``timing.csv``.
"""

from __future__ import annotations

import csv
import dataclasses
import logging
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from .diffusion import diffuse
from .errors import HypergraphError
from .hypergraph import Hypergraph, build, clique_expansion, graph_laplacian, knn_graph, knn_hypergraph
from .io import write_meta
from .potentials import LInfNorm, PotentialModel, poincare_lower_bound, potential
from .resolvent import ResolventProblem, graph_resolvent_series, last_iterate_heuristic, resolvent_solve

log = logging.getLogger(__name__)


@dataclass
class ExperimentConfig:
    """Serializable description of one experiment run."""

    dataset: str = "two-spirals"
    params: dict = field(default_factory=dict)
    norm: str = "linf"
    lam: float = 0.12
    alpha: float = 0.1
    eps: float = 0.1
    T: int = 100
    tol: float = 1e-8
    seed: int = 0
    out: str = "."
    steps: tuple = (30,)
    trials: int = 20
    seeds: int = 20
    k: int = 5
    oracle: str = "any"
    prox: str = "degree"

    def to_meta(self) -> dict:
        d = dataclasses.asdict(self)
        params = d.pop("params")
        d.update({f"params.{k}": v for k, v in sorted(params.items())})
        return d


# ---------------------------------------------------------------------------
# data generators


def two_spirals(rng, n_per: int = 300, noise: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Interlocking spirals ``±3θ(cos θ, sin θ)``, θ uniform on [π/2, 3π]."""
    theta = rng.uniform(np.pi / 2, 3 * np.pi, size=2 * n_per)
    base = 3 * theta[:, None] * np.c_[np.cos(theta), np.sin(theta)]
    base[n_per:] *= -1
    return _finish(rng, base, n_per, noise)


def rings(rng, n_per: int = 300, noise: float = 0.2) -> tuple[np.ndarray, np.ndarray]:
    """Radius-2 ring at the origin and radius-3 ring centred at (3, 0)."""
    theta = rng.uniform(0, 2 * np.pi, size=2 * n_per)
    unit = np.c_[np.cos(theta), np.sin(theta)]
    base = np.r_[2 * unit[:n_per], 3 * unit[n_per:] + [3.0, 0.0]]
    return _finish(rng, base, n_per, noise)


def hyperspheres(rng, n_per: int = 300, noise: float = 0.1, dim: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Sphere of radius 2 against the ball of radius 1.3, uniform samples in R^dim."""
    g = rng.standard_normal((2 * n_per, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = np.r_[np.full(n_per, 2.0), 1.3 * rng.uniform(size=n_per) ** (1.0 / dim)]
    return _finish(rng, g * r[:, None], n_per, noise)


def _finish(rng, base, n_per, noise):
    if noise < 0:
        raise HypergraphError("noise must be nonnegative")
    X = base + noise * rng.standard_normal(base.shape)
    y = np.r_[np.ones(n_per), -np.ones(n_per)]
    return X, y


GENERATORS = {"two-spirals": two_spirals, "rings": rings, "hyperspheres": hyperspheres}


def random_connected_hypergraph(
    rng, n: int, m: int, min_size: int = 2, max_size: int = 6, weight_range=(1.0, 1.0)
) -> Hypergraph:
    """``m`` random hyperedges plus a random spanning path of pairs (so the result is connected)."""
    if n < 2 or not 2 <= min_size <= max_size <= n:
        raise HypergraphError("invalid random hypergraph parameters")
    perm = rng.permutation(n)
    edges = [((int(perm[i]), int(perm[i + 1])), 1.0) for i in range(n - 1)]
    lo, hi = weight_range
    for _ in range(m):
        k = int(rng.integers(min_size, max_size + 1))
        verts = rng.choice(n, size=k, replace=False)
        edges.append((verts.tolist(), float(rng.uniform(lo, hi)) if hi > lo else float(lo)))
    return build(n, edges)


# ---------------------------------------------------------------------------
# scoring


def auc(scores, labels) -> float:
    """Area under the ROC curve with ``labels > 0`` as the positive class.

    Scores are min-max rescaled to [0, 1] first; tied scores count one half.
    """
    s = np.asarray(scores, dtype=float)
    pos = np.asarray(labels) > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise HypergraphError("AUC needs both classes")
    lo, hi = s.min(), s.max()
    s = (s - lo) / (hi - lo) if hi > lo else np.zeros_like(s)
    ranks = scipy.stats.rankdata(s)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def threshold_labels(x, degrees, energy, band: float = 0.1):
    """Pick a sweep threshold by the orthogonality-penalty rule.

    For each candidate ``tau`` the labelling is ``x > tau`` and its penalty is
    ``rho = <1[x > tau], 1>_D / n``. Candidates whose penalty lies within
    ``band`` (relative) of the ``tau = 0`` penalty are kept, and the one of
    least ``energy`` wins (first in ascending ``tau`` on ties). Returns
    ``(tau, labels in {0, 1})``.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    taus = np.unique(np.r_[0.0, x])
    rho0 = float(degrees[x > 0].sum()) / n
    best = (math.inf, 0.0, (x > 0).astype(float))
    for tau in taus:
        lab = (x > tau).astype(float)
        rho = float(degrees @ lab) / n
        if not (1 - band) * rho0 <= rho <= (1 + band) * rho0:
            continue
        e = energy(lab)
        if e < best[0]:
            best = (e, float(tau), lab)
    return best[1], best[2]


def classification_error(labels01, y) -> int:
    """Number of vertices whose ``2*label - 1`` differs from ``y``."""
    return int(np.sum((2 * np.asarray(labels01) - 1) != np.asarray(y)))


# ---------------------------------------------------------------------------
# manifold labelling


def graph_heat(G: Hypergraph, x0, T: int) -> list[np.ndarray]:
    """Iterates ``x_t = x_{t-1} - D^{-1} L x_{t-1}`` for ``t = 0..T``."""
    L = graph_laplacian(G)
    dinv = np.divide(1.0, G.degrees, out=np.zeros(G.n), where=G.degrees > 0)
    xs = [np.asarray(x0, dtype=float)]
    for _ in range(T):
        x = xs[-1]
        xs.append(x - dinv * (L @ x))
    return xs


def manifold_trial(rng, dataset: str, steps, k: int = 5, reveal: float = 0.05, tol: float = 1e-8, **gen_kw):
    """One trial of the semi-supervised comparison. Returns a list of row dicts."""
    X, y = GENERATORS[dataset](rng, **gen_kw)
    N = len(y)
    n_reveal = max(1, int(round(reveal * N)))
    revealed = rng.choice(N, size=n_reveal, replace=False)
    x0 = np.zeros(N)
    x0[revealed] = y[revealed]

    T = max(steps)
    H = knn_hypergraph(X, k)
    hmodel = PotentialModel(H, LInfNorm())
    with warnings.catch_warnings():
        # k-NN hypergraphs of noisy samples may split into several components
        warnings.simplefilter("ignore", RuntimeWarning)
        trace = diffuse(hmodel, x0, T, tol=tol)
    G = knn_graph(X, k)
    L = graph_laplacian(G)
    gx = graph_heat(G, x0, T)

    rows = []
    for t in sorted(steps):
        for method, x, graph, energy in (
            ("hypergraph", trace.iterates[t], H, lambda lab: potential(hmodel, lab)),
            ("graph", gx[t], G, lambda lab: float(lab @ (L @ lab))),
        ):
            tau, lab = threshold_labels(x, graph.degrees, energy)
            rows.append(
                {
                    "steps": t,
                    "method": method,
                    "auc": auc(x, y),
                    "tau": tau,
                    "error": classification_error(lab, y),
                    "revealed_pos": int((y[revealed] > 0).sum()),
                }
            )
    return rows


def bench_manifold(config: ExperimentConfig, write: bool = True) -> list[dict]:
    """Run ``config.trials`` labelling trials and write ``report.csv`` and ``summary.csv``."""
    if config.dataset not in GENERATORS:
        raise HypergraphError(f"unknown dataset {config.dataset!r}; choose from {sorted(GENERATORS)}")
    steps = tuple(int(s) for s in config.steps)
    if not steps or min(steps) < 0:
        raise HypergraphError("step counts must be nonnegative")
    rows = []
    for trial in range(config.trials):
        rng = np.random.default_rng([config.seed, trial])
        for r in manifold_trial(rng, config.dataset, steps, k=config.k, tol=config.tol, **config.params):
            rows.append({"trial": trial, **r})
    if write:
        os.makedirs(config.out, exist_ok=True)
        _write_rows(os.path.join(config.out, "report.csv"), rows)
        _write_rows(os.path.join(config.out, "summary.csv"), manifold_summary(rows))
        write_meta({"experiment": "bench-manifold", **config.to_meta()}, os.path.join(config.out, "meta.txt"))
    return rows


def manifold_summary(rows) -> list[dict]:
    out = []
    keys = sorted({(r["method"], r["steps"]) for r in rows})
    for method, t in keys:
        sel = [r for r in rows if r["method"] == method and r["steps"] == t]
        out.append(
            {
                "method": method,
                "steps": t,
                "median_auc": float(np.median([r["auc"] for r in sel])),
                "median_error": float(np.median([r["error"] for r in sel])),
            }
        )
    return out


# ---------------------------------------------------------------------------
# resolvent benchmark


def bench_resolvent(model: PotentialModel, config: ExperimentConfig, write: bool = True):
    """Averaged output against the last-iterate heuristic on ``config.seeds`` seeds.

    Each seed is ``s = e_v - pi(e_v)`` for a random vertex ``v``; both solvers
    get the same step size and ``config.T`` iterations. The clique-expansion
    geometric series (early stop at squared D-norm 1e-6) is timed alongside.
    Failures on one seed are logged and recorded; remaining seeds still run.

    Returns ``(rows, timing_rows)``.
    """
    G = model.graph
    rng = np.random.default_rng(config.seed)
    verts = rng.choice(G.n, size=min(config.seeds, G.n), replace=False)
    clique = clique_expansion(G)
    lam_lower = None
    rows, timing = [], []
    for i, v in enumerate(verts.tolist()):
        s = -np.full(G.n, G.degrees[v] / G.volume)
        s[v] += 1.0
        row = {"seed_index": i, "vertex": v}
        tim = {"seed_index": i, "vertex": v}
        try:
            if lam_lower is None:
                lam_lower = poincare_lower_bound(model)
            prob = ResolventProblem(model, config.lam, s, config.eps)
            kw = dict(lambda_lower=lam_lower, T=config.T, oracle=config.oracle, prox=config.prox, record_history=False)
            t0 = time.perf_counter()
            avg = resolvent_solve(prob, **kw)
            t1 = time.perf_counter()
            last = last_iterate_heuristic(prob, **kw)
            t2 = time.perf_counter()
            ser = graph_resolvent_series(clique, config.lam, s, config.T, early_stop=1e-6)
            t3 = time.perf_counter()
            ser_obj = _quadratic_objective(clique, config.lam, s, ser.x)
            row.update(
                objective_average=avg.objective,
                objective_last=last.objective,
                improvement=avg.objective / last.objective if last.objective != 0 else math.nan,
                iterations=avg.iterations,
                series_terms=ser.terms,
                series_objective=ser_obj,
                status="ok",
            )
            tim.update(
                seconds_average=t1 - t0,
                seconds_last=t2 - t1,
                seconds_series=t3 - t2,
                sec_per_iter_average=(t1 - t0) / avg.iterations,
                sec_per_iter_series=(t3 - t2) / ser.terms,
            )
        except Exception as exc:  # noqa: BLE001 - per-seed isolation
            log.warning("seed %d (vertex %d) failed: %s", i, v, exc)
            row.update(
                objective_average=math.nan,
                objective_last=math.nan,
                improvement=math.nan,
                iterations=0,
                series_terms=0,
                series_objective=math.nan,
                status=f"error: {type(exc).__name__}",
            )
        rows.append(row)
        timing.append(tim)
    if write:
        os.makedirs(config.out, exist_ok=True)
        _write_rows(os.path.join(config.out, "report.csv"), rows)
        _write_rows(os.path.join(config.out, "timing.csv"), timing)
        ok = [r["improvement"] for r in rows if r["status"] == "ok"]
        meta = {"experiment": "bench-resolvent", **config.to_meta(), "n": G.n, "m": G.m}
        meta["median_improvement"] = float(np.median(ok)) if ok else math.nan
        write_meta(meta, os.path.join(config.out, "meta.txt"))
    return rows, timing


def _quadratic_objective(G: Hypergraph, lam: float, s, x) -> float:
    """``(1/2) x^T (lam D + L) x - <s, x>`` for a graph."""
    L = graph_laplacian(G)
    return 0.5 * float(x @ (L @ x)) + 0.5 * lam * float(G.degrees @ (x * x)) - float(s @ x)


def _write_rows(path, rows) -> None:
    if not rows:
        open(path, "w").close()
        return
    fields = list(rows[0])
    for r in rows[1:]:
        fields.extend(k for k in r if k not in fields)
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=fields, restval="")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
