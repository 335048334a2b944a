import csv
import math

import numpy as np
import pytest

from hyperdiffusion import diffusion as diffusion_mod
from hyperdiffusion.diffusion import diffuse, heat_step
from hyperdiffusion.errors import ToleranceNotReached
from hyperdiffusion.hypergraph import build, d_projection
from hyperdiffusion.laplacian import min_norm_subgradient
from hyperdiffusion.potentials import L2Norm, PotentialModel

from helpers import dense_laplacian, graph_poincare, random_connected, random_graph

QUAD = PotentialModel(build(4, [((0, 1, 2, 3), 1.0)]))
QUAD_X = np.array([-1.0, -1.0, 1.0, 2.0])
PAIR = PotentialModel(build(2, [((0, 1), 1.0)]), L2Norm())


def test_heat_step_examples():
    assert np.allclose(heat_step(QUAD, QUAD_X), [-5 / 8, -5 / 8, 1, 5 / 4], atol=1e-12, rtol=0)
    assert np.array_equal(heat_step(QUAD, [3.0] * 4), [3.0] * 4)
    assert np.allclose(heat_step(PAIR, [0.0, 1.0]), [0.5, 0.5], atol=1e-15)


def test_heat_step_any_oracle():
    assert np.allclose(heat_step(QUAD, QUAD_X, oracle="any"), [-1 / 4, -1, 1, 5 / 4])
    with pytest.raises(ValueError):
        heat_step(QUAD, QUAD_X, oracle="bogus")


def test_diffuse_examples():
    tr = diffuse(QUAD, QUAD_X, 0)
    assert tr.t == [0] and np.array_equal(tr.final, QUAD_X) and list(tr.iterates) == [0]
    tr = diffuse(QUAD, QUAD_X, 1)
    assert np.allclose(tr.final, [-5 / 8, -5 / 8, 1, 5 / 4], atol=1e-12)
    assert tr.potential[0] == 9 / 8
    tr = diffuse(PAIR, [0.3, -2.0], 1)
    assert np.allclose(tr.final, tr.pi0, atol=1e-15)
    assert tr.variance[1] <= 1e-30


def test_rayleigh_nan_after_convergence():
    tr = diffuse(PAIR, [0.0, 1.0], 2)
    assert math.isnan(tr.rayleigh[1]) and math.isnan(tr.rayleigh[2])
    assert math.isnan(tr.dual_gap[-1])


def test_negative_steps():
    with pytest.raises(ValueError):
        diffuse(QUAD, QUAD_X, -1)


def test_disconnected_warns():
    model = PotentialModel(build(4, [((0, 1), 1.0), ((2, 3), 1.0)]))
    with pytest.warns(RuntimeWarning):
        tr = diffuse(model, [1.0, 0.0, 0.0, 0.0], 3)
    assert tr.final[2] == 0.0 and tr.final[3] == 0.0


def test_diffusion_step_invariants():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(5, 31))
        model = PotentialModel(random_connected(rng, n, int(rng.integers(1, 2 * n)), 2, 6))
        G = model.graph
        x0 = rng.standard_normal(n) * rng.uniform(0.1, 10)
        z_seen = []

        def cb(t, x, z):
            z_seen.append((x.copy(), z.copy()))

        tr = diffuse(model, x0, 50, callback=cb)
        mean0 = tr.d_mean[0]
        for t in range(50):
            assert tr.variance[t + 1] - tr.variance[t] + 2 * tr.potential[t] <= 1e-7
            assert tr.variance[t + 1] <= tr.variance[t] + 1e-12
            assert abs(tr.d_mean[t + 1] - mean0) <= 1e-9 * max(1.0, abs(mean0), np.abs(x0) @ G.degrees)
            a, b = np.abs(tr.iterates[t]).max(), np.abs(tr.iterates[t + 1]).max()
            assert b <= a + 1e-9
        for x, z in z_seen:
            top, bot = x == x.max(), x == x.min()
            assert np.all(z[top] >= -1e-12) and np.all(z[bot] <= 1e-12)


def test_aggregate_bound_on_graphs():
    rng = np.random.default_rng(1)
    for _ in range(5):
        G = random_graph(rng, int(rng.integers(5, 30)))
        model = PotentialModel(G, L2Norm())
        lam = graph_poincare(G)
        tr = diffuse(model, rng.standard_normal(G.n), 100)
        for t, v in enumerate(tr.variance):
            assert v <= (1 - lam) ** t * tr.variance[0] * (1 + 1e-6) + 1e-300


def test_graph_step_matches_matrix_update():
    rng = np.random.default_rng(2)
    for _ in range(10):
        G = random_graph(rng, int(rng.integers(3, 40)))
        x = rng.standard_normal(G.n)
        L = dense_laplacian(G)
        assert np.allclose(heat_step(PotentialModel(G, L2Norm()), x), x - 0.5 * (L @ x) / G.degrees, atol=1e-8)


def test_trace_csv(tmp_path):
    tr = diffuse(QUAD, QUAD_X, 1)
    tr.to_csv(tmp_path / "t.csv")
    tr.iterates_to_csv(tmp_path / "i.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["t", "potential", "variance", "rayleigh", "dual_gap"]
    assert float(rows[1][1]) == 9 / 8 and len(rows) == 3
    it = list(csv.reader(open(tmp_path / "i.csv")))
    assert it[0] == ["t", "vertex", "value"]
    final = [float(r[2]) for r in it[1:] if r[0] == "1"]
    assert np.allclose(final, [-5 / 8, -5 / 8, 1, 5 / 4])


def test_trace_thinning(monkeypatch):
    monkeypatch.setattr(diffusion_mod, "TRACE_ENTRY_BUDGET", 100)
    model = PotentialModel(random_connected(np.random.default_rng(3), 10, 10))
    tr = diffuse(model, np.arange(10.0), 250)
    assert sorted(tr.iterates) == list(range(0, 250, 3)) + [250]
    assert len(tr.potential) == 251


def test_tolerance_failure_attaches_trace(monkeypatch):
    calls = {"n": 0}

    def flaky(model, x, tol, warm_start=None):
        calls["n"] += 1
        if calls["n"] == 2:
            raise ToleranceNotReached(7, None)
        return min_norm_subgradient(model, x, tol=tol, warm_start=warm_start)

    monkeypatch.setattr(diffusion_mod, "min_norm_subgradient", flaky)
    with pytest.raises(ToleranceNotReached) as info:
        diffuse(QUAD, QUAD_X, 5)
    tr = info.value.trace
    assert tr.t == [0, 1] and np.allclose(tr.final, [-5 / 8, -5 / 8, 1, 5 / 4])


def test_warm_start_does_not_change_trajectory():
    rng = np.random.default_rng(4)
    model = PotentialModel(random_connected(rng, 20, 25, 2, 5))
    x0 = rng.integers(-3, 4, 20).astype(float)
    a = diffuse(model, x0, 15, tol=1e-12, warm_start=True)
    b = diffuse(model, x0, 15, tol=1e-12, warm_start=False)
    assert np.allclose(a.final, b.final, atol=1e-6)


def test_projection_conserved_exactly_on_fixed_point():
    G = random_connected(np.random.default_rng(5), 8, 5)
    x = np.full(8, 0.25)
    tr = diffuse(PotentialModel(G), x, 3)
    assert np.array_equal(tr.final, x)
    assert np.allclose(tr.pi0, d_projection(G, x))
