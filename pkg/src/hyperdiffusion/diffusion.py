"""Discrete-time heat diffusion ``x_{t+1} = x_t - D^{-1} L^D(x_t)``."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ToleranceNotReached
from .hypergraph import as_vertex_vector, connected, d_projection
from .laplacian import any_subgradient, min_norm_subgradient
from .potentials import PotentialModel, d_norm_sq, potential

TRACE_ENTRY_BUDGET = 10**6


def _inv_degrees(G):
    return np.divide(1.0, G.degrees, out=np.zeros(G.n), where=G.degrees > 0)


def heat_step(model: PotentialModel, x, tol: float = 1e-8, oracle: str = "minnorm", warm_start=None):
    """One diffusion step. Returns the new state only; see :func:`diffuse` for traces."""
    return _step(model, as_vertex_vector(x, model.n), tol, oracle, warm_start)[0]


def _step(model, x, tol, oracle, warm_start):
    if oracle == "minnorm":
        res = min_norm_subgradient(model, x, tol=tol, warm_start=warm_start)
        z, gap, wit = res.z, res.gap, res.certificate.witnesses
    elif oracle == "any":
        cert = any_subgradient(model, x)
        z, gap, wit = cert.z, math.nan, cert.witnesses
    else:
        raise ValueError(f"unknown oracle {oracle!r}")
    return x - _inv_degrees(model.graph) * z, z, gap, wit


@dataclass
class DiffusionTrace:
    """Iterates and per-step diagnostics of a diffusion run.

    Row ``t`` of the diagnostics describes state ``x_t``: its potential, its
    D-variance around the conserved mean, its Rayleigh quotient (NaN once the
    variance vanishes) and the dual gap of the oracle call made *from* ``x_t``
    (NaN for the final state). ``iterates`` maps ``t`` to stored states; all
    states are kept unless the run is large, in which case only checkpoints
    are kept.
    """

    pi0: np.ndarray
    t: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    variance: list = field(default_factory=list)
    rayleigh: list = field(default_factory=list)
    dual_gap: list = field(default_factory=list)
    d_mean: list = field(default_factory=list)
    iterates: dict = field(default_factory=dict)
    final: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return self.t[-1] if self.t else 0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "potential", "variance", "rayleigh", "dual_gap"])
            for row in zip(self.t, self.potential, self.variance, self.rayleigh, self.dual_gap):
                wr.writerow([row[0]] + [repr(float(v)) for v in row[1:]])

    def iterates_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "vertex", "value"])
            for t in sorted(self.iterates):
                for i, v in enumerate(self.iterates[t]):
                    wr.writerow([t, i, repr(float(v))])


def diffuse(
    model: PotentialModel,
    x0,
    T: int,
    tol: float = 1e-8,
    oracle: str = "minnorm",
    warm_start: bool = True,
    callback=None,
) -> DiffusionTrace:
    """Run ``T`` diffusion steps from ``x0`` and record diagnostics.

    ``callback(t, x_t, z_t)`` is called after each oracle evaluation, where
    ``z_t`` is the subgradient used to leave ``x_t``.

    Raises
    ------
    ToleranceNotReached
        Propagated from the oracle, with the trace so far attached as ``.trace``.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    G = model.graph
    x = as_vertex_vector(x0, G.n).copy()
    if not connected(G):
        warnings.warn("diffusing on a disconnected hypergraph", RuntimeWarning, stacklevel=2)
    pi0 = d_projection(G, x)
    trace = DiffusionTrace(pi0=pi0)
    keep_all = G.n * (T + 1) <= TRACE_ENTRY_BUDGET
    every = max(1, math.ceil(T / 100))
    var0 = d_norm_sq(G, x - pi0)
    prev_w = None
    for t in range(T + 1):
        u = potential(model, x)
        var = d_norm_sq(G, x - pi0)
        trace.t.append(t)
        trace.potential.append(u)
        trace.variance.append(var)
        trace.rayleigh.append(u / (0.5 * var) if var > 1e-28 * max(var0, 1e-300) else math.nan)
        trace.d_mean.append(float(G.degrees @ x))
        if keep_all or t % every == 0 or t == T:
            trace.iterates[t] = x.copy()
        if t == T:
            trace.dual_gap.append(math.nan)
            break
        try:
            x_next, z, gap, wit = _step(model, x, tol, oracle, prev_w if warm_start else None)
        except ToleranceNotReached as exc:
            trace.dual_gap.append(math.nan)
            trace.final = x
            exc.trace = trace
            raise
        trace.dual_gap.append(gap)
        if callback is not None:
            callback(t, x, z)
        prev_w = wit
        x = x_next
    trace.final = x
    return trace
