"""Resolvents of the hypergraph potential and personalized PageRank.

The workhorse is :func:`omd_minimize`, an optimistic mirror-descent scheme
for ``min_x F(x) - <s, x>`` where ``F`` is half a squared (possibly
non-smooth) norm, sandwiched between ``ell/2 ||x||_R^2`` and
``u/2 ||x||_R^2`` for a positive-definite ``R``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DisconnectedGraph, HypergraphError, InvalidEpsilon, NonpositiveConstants, Unbounded
from .hypergraph import Hypergraph, as_vertex_vector, clique_expansion, connected, graph_laplacian
from .laplacian import _any, min_norm_subgradient
from .potentials import (
    PotentialModel,
    d_norm_sq,
    edge_poincare_factor,
    generalized_fiedler_value,
    poincare_lower_bound,
    potential,
)

log = logging.getLogger(__name__)


class ProxOperator:
    """Symmetric positive-definite ``R`` with its inverse and Poincaré constants."""

    def __init__(self, apply, inverse_apply, ell: float, u: float, name: str = "custom"):
        if not (ell > 0 and u > 0):
            raise NonpositiveConstants(f"Poincaré constants must be positive, got ell={ell}, u={u}")
        self.apply = apply
        self.inverse_apply = inverse_apply
        self.ell = float(ell)
        self.u = float(u)
        self.name = name

    def norm_sq(self, v) -> float:
        return float(v @ self.apply(v))

    @classmethod
    def diagonal(cls, diag, ell, u, name="diagonal"):
        diag = np.asarray(diag, dtype=float)
        if np.any(diag <= 0):
            raise NonpositiveConstants("diagonal prox needs a positive diagonal")
        return cls(lambda v: diag * v, lambda v: v / diag, ell, u, name)

    @classmethod
    def matrix(cls, R, ell, u, name="matrix"):
        R = sp.csc_matrix(R)
        solve = spla.factorized(R)
        return cls(lambda v: R @ v, lambda v: solve(np.asarray(v, dtype=float)), ell, u, name)


@dataclass
class OMDResult:
    x_out: np.ndarray
    x_last: np.ndarray
    iterations: int
    eta: float
    history: list
    stopped_early: bool


def default_iterations(ell: float, u: float, eps: float) -> int:
    return math.ceil(4.0 * u / (ell * eps * eps))


def omd_minimize(
    subgradient: Callable[[np.ndarray], np.ndarray],
    s,
    prox: ProxOperator,
    eps: float,
    T: int | None = None,
    objective: Callable[[np.ndarray], float] | None = None,
    early_stop: float | None = None,
) -> OMDResult:
    """Multiplicative ``eps``-approximate minimizer of ``F(x) - <s, x>``.

    Parameters
    ----------
    subgradient : callable
        Returns any element of the subdifferential of ``F`` at ``x``.
    s : array
        Linear term.
    prox : ProxOperator
        Prox-generating operator ``R`` with constants ``ell <= F/(1/2||.||_R^2) <= u``.
    eps : float in (0, 1)
    T : int, optional
        Iteration count; defaults to ``ceil(4u / (ell eps^2))``.
    objective : callable, optional
        If given, ``objective(xhat_t)`` is recorded every iteration.
    early_stop : float, optional
        Stop once ``||x_{t+1} - x_t||_R^2`` drops below this value.

    Returns
    -------
    OMDResult
        ``x_out`` is ``(1 - eps/2)`` times the average of the optimistic
        points ``xhat_t``; ``x_last`` is the final ``xhat``.
    """
    if not 0 < eps < 1:
        raise InvalidEpsilon(f"eps must lie in (0, 1), got {eps}")
    s = np.asarray(s, dtype=float)
    if T is None:
        T = default_iterations(prox.ell, prox.u, eps)
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    eta = eps / (2.0 * prox.u)
    step_s = eta * prox.inverse_apply(s)
    x = np.zeros_like(s)
    total = np.zeros_like(s)
    xhat = x
    history = []
    done = 0
    stopped = False
    for t in range(T):
        xhat = x + step_s
        total += xhat
        done = t + 1
        g = subgradient(xhat)
        if objective is not None:
            history.append(objective(xhat))
        x_next = xhat - eta * prox.inverse_apply(g)
        if early_stop is not None and prox.norm_sq(x_next - x) < early_stop:
            stopped = True
            x = x_next
            break
        x = x_next
    x_out = (1.0 - eps / 2.0) * total / done
    return OMDResult(x_out, xhat.copy(), done, eta, history, stopped)


@dataclass
class ResolventProblem:
    """``min_x U(x) + (lam/2)||x||_D^2 - <s, x>`` to multiplicative accuracy ``eps``."""

    model: PotentialModel
    lam: float
    s: np.ndarray
    eps: float = 0.1

    def __post_init__(self):
        if self.lam < 0:
            raise HypergraphError("lambda must be nonnegative")
        if not 0 < self.eps < 1:
            raise InvalidEpsilon(f"eps must lie in (0, 1), got {self.eps}")
        self.s = as_vertex_vector(self.s, self.model.n, "s")

    def objective(self, x) -> float:
        G = self.model.graph
        return potential(self.model, x) + 0.5 * self.lam * d_norm_sq(G, x) - float(self.s @ x)


@dataclass
class ResolventSolution:
    x: np.ndarray
    objective: float
    iterations: int
    history: list
    meta: dict = field(default_factory=dict)


def resolvent_solve(
    problem: ResolventProblem,
    lambda_lower: float | None = None,
    T: int | None = None,
    oracle: str = "any",
    prox: str = "degree",
    early_stop: float | None = None,
    tol: float = 1e-8,
    record_history: bool = True,
) -> ResolventSolution:
    """Approximate the resolvent by mirror descent on the D-orthogonal subspace.

    The seed is split as ``s = s_perp + (<s,1>/Vol) D1``. Mirror descent runs
    on ``s_perp`` (its iterates stay D-orthogonal to ones), and the optimal
    parallel component ``<s,1>/(lam Vol) * 1`` is added back.

    Parameters
    ----------
    lambda_lower : float, optional
        Lower bound on the Poincaré constant. Defaults to the certified
        clique-expansion bound of :func:`~hyperdiffusion.potentials.poincare_lower_bound`;
        it only sets the default iteration budget.
    oracle : {"any", "minnorm"}
        Which element of ``L(x)`` to use each iteration.
    prox : {"degree", "clique"}
        ``R = D`` (default, with guarantees) or ``R = L_clique + eps D``
        (heuristic, no guarantees).

    Raises
    ------
    Unbounded
        ``lam == 0`` and ``<s, 1> != 0``.
    DisconnectedGraph
    """
    return _solve(problem, lambda_lower, T, oracle, prox, early_stop, tol, record_history, output="average")


def last_iterate_heuristic(
    problem: ResolventProblem,
    lambda_lower: float | None = None,
    T: int | None = None,
    oracle: str = "any",
    prox: str = "degree",
    early_stop: float | None = None,
    tol: float = 1e-8,
    record_history: bool = True,
) -> ResolventSolution:
    """Same loop and step size as :func:`resolvent_solve`, returning the last unscaled ``xhat``."""
    return _solve(problem, lambda_lower, T, oracle, prox, early_stop, tol, record_history, output="last")


def _solve(problem, lambda_lower, T, oracle, prox, early_stop, tol, record_history, output):
    model, lam, s, eps = problem.model, problem.lam, problem.s, problem.eps
    G = model.graph
    if not connected(G):
        raise DisconnectedGraph("resolvent computation requires a connected hypergraph")
    mass = float(s.sum())
    if lam == 0 and abs(mass) > 1e-12 * (1.0 + float(np.abs(s).sum())):
        raise Unbounded("problem is unbounded: lambda = 0 and <s, 1> != 0")
    if lambda_lower is None:
        lambda_lower = poincare_lower_bound(model)
        log.info("using certified Poincaré lower bound %.6g for the iteration budget", lambda_lower)
    s_perp = s - (mass / G.volume) * G.degrees
    parallel = mass / (lam * G.volume) if lam > 0 else 0.0

    R = _make_prox(model, prox, lam, lambda_lower, eps)
    G_w, deg = G.weights, G.degrees
    last = {}

    def subgrad(x):
        if oracle == "any":
            cert = _any(model, x)
        else:
            cert = min_norm_subgradient(model, x, tol=tol).certificate
        last["x"], last["f"] = x, cert.shifts
        return cert.z + lam * deg * x if lam > 0 else cert.z

    def obj(xp):
        # reuses the shift values of the subgradient call made at the same point
        f = last["f"] if last.get("x") is xp else model.shifts(xp)
        x = xp + parallel
        return 0.5 * float(G_w @ (f * f)) + 0.5 * lam * float(deg @ (x * x)) - float(s @ x)

    if oracle not in ("any", "minnorm"):
        raise ValueError(f"unknown oracle {oracle!r}")
    res = omd_minimize(subgrad, s_perp, R, eps, T=T, objective=obj if record_history else None, early_stop=early_stop)
    x = (res.x_out if output == "average" else res.x_last) + parallel
    meta = {
        "T": res.iterations,
        "eta": res.eta,
        "epsilon": eps,
        "lambda": lam,
        "lambda_lower": lambda_lower,
        "ell_R": R.ell,
        "u_R": R.u,
        "prox": prox,
        "oracle": oracle,
        "output": output,
        "stopped_early": res.stopped_early,
    }
    return ResolventSolution(x, problem.objective(x), res.iterations, res.history, meta)


def _make_prox(model: PotentialModel, prox: str, lam: float, lambda_lower: float, eps: float) -> ProxOperator:
    G = model.graph
    if prox == "degree":
        return ProxOperator.diagonal(G.degrees, lambda_lower + lam, 1.0 + lam, name="degree")
    if prox == "clique":
        Lc = graph_laplacian(clique_expansion(G))
        R = Lc + eps * sp.diags(G.degrees)
        factors = [edge_poincare_factor(model, h) for h in range(G.m)]
        # per-hyperedge f_h^2 <= pair_sum / 2 for every supported norm
        u = max(0.5, lam / eps)
        kappa = min(factors)
        lam2 = generalized_fiedler_value(Lc, G.degrees)
        ell = max(min(kappa, lam / eps), kappa * lam2 / (lam2 + eps))
        log.info("clique prox is a heuristic: constants ell=%.4g, u=%.4g carry no guarantee", ell, u)
        return ProxOperator.matrix(R, ell, u, name="clique")
    raise ValueError(f"unknown prox {prox!r}")


@dataclass
class FixedPointResidual:
    """``r = s - p - ((1-alpha)/(2 alpha)) z`` for the certified ``z`` in ``L(D^{-1} p)`` closest to closing the inclusion."""

    residual: np.ndarray
    norm: float
    z: np.ndarray
    gap: float


def ppr(
    model: PotentialModel,
    alpha: float,
    s,
    eps: float = 0.1,
    tol: float = 1e-10,
    **solve_kw,
) -> tuple[np.ndarray, FixedPointResidual]:
    """Hypergraph personalized PageRank vector.

    Solves the resolvent with ``lam = 2 alpha/(1 - alpha)`` and seed
    ``lam * s``; returns ``p = D x`` and the residual of the PageRank
    fixed-point inclusion, measured in the ``D^{-1}``-norm.
    """
    if not 0 < alpha < 1:
        raise HypergraphError(f"alpha must lie in (0, 1), got {alpha}")
    G = model.graph
    s = as_vertex_vector(s, G.n, "s")
    lam = 2.0 * alpha / (1.0 - alpha)
    sol = resolvent_solve(ResolventProblem(model, lam, lam * s, eps), **solve_kw)
    p = G.degrees * sol.x
    return p, fixed_point_residual(model, alpha, s, p, tol=tol)


def fixed_point_residual(model: PotentialModel, alpha: float, s, p, tol: float = 1e-10) -> FixedPointResidual:
    """Residual of ``p + ((1-alpha)/(2 alpha)) L(D^{-1} p) ∋ s``.

    ``L`` is set-valued, so the element used is the one closest (in the
    ``D^{-1}``-norm) to ``(2 alpha/(1-alpha)) (s - p)``; its certificate comes
    from the min-norm Frank-Wolfe solver with that target.
    """
    G = model.graph
    k = (1.0 - alpha) / (2.0 * alpha)
    x = p / G.degrees
    res = min_norm_subgradient(model, x, tol=tol, target=(s - p) / k)
    r = s - p - k * res.z
    return FixedPointResidual(r, math.sqrt(float(np.sum(r * r / G.degrees))), res.z, res.gap)


@dataclass
class SeriesResult:
    x: np.ndarray
    terms: int
    tail_bound: float


def graph_resolvent_series(
    graph: Hypergraph, lam: float, s, K: int, early_stop: float | None = None
) -> SeriesResult:
    """Truncated geometric series for ``(lam D + L)^{-1} s`` on a graph.

    Sums ``1/(lam+2) * sum_{k<K} (2/(lam+2))^k (I - D^{-1}L/2)^k D^{-1} s``.
    ``tail_bound`` is the ratio ``(2/(lam+2))^terms`` of the first omitted
    coefficient. With ``early_stop`` the sum ends once a term's squared
    D-norm falls below the threshold.
    """
    if lam < 0:
        raise HypergraphError("lambda must be nonnegative")
    if K < 1:
        raise ValueError("K must be >= 1")
    s = as_vertex_vector(s, graph.n, "s")
    L = graph_laplacian(graph)
    dinv = np.divide(1.0, graph.degrees, out=np.zeros(graph.n), where=graph.degrees > 0)
    r = 2.0 / (lam + 2.0)
    term = dinv * s / (lam + 2.0)
    acc = term.copy()
    k = 1
    while k < K:
        term = r * (term - 0.5 * dinv * (L @ term))
        acc += term
        k += 1
        if early_stop is not None and d_norm_sq(graph, term) < early_stop:
            break
    return SeriesResult(acc, k, r**k)
