import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperdiffusion.errors import ConstantVector, DisconnectedGraph, HypergraphError, InvalidCutFunction
from hyperdiffusion.hypergraph import build, d_projection
from hyperdiffusion.potentials import (
    CutFunction,
    L2Norm,
    LInfNorm,
    LovaszNorm,
    PotentialModel,
    estimate_lambda,
    lovasz_value,
    min_shift_norm,
    parse_norm,
    poincare_lower_bound,
    potential,
    rayleigh,
    tie_groups,
)

from helpers import graph_poincare, random_connected, random_graph


def random_cut(rng, k):
    """Cardinality-based part with a random concave profile plus a random graph cut."""
    half = k // 2
    inc = np.sort(rng.uniform(0.1, 1.0, size=half))[::-1]
    g = np.r_[0.0, np.cumsum(inc)]
    masks = np.arange(1 << k)
    pc = np.array([bin(m).count("1") for m in masks])
    table = g[np.minimum(pc, k - pc)]
    for i, j in itertools.combinations(range(k), 2):
        w = rng.uniform(0, 1) if rng.uniform() < 0.5 else 0.0
        table = table + w * (((masks >> i) & 1) != ((masks >> j) & 1))
    return CutFunction(table)


def brute_lovasz(cut, x):
    """Maximum of <y, x> over all greedy vertices of the base polytope (every permutation)."""
    return max(float(cut.greedy_vertex(p) @ x) for p in itertools.permutations(range(cut.k)))


# ---------------------------------------------------------------------------
# min-shift values


def test_min_shift_examples():
    assert min_shift_norm(LInfNorm(), [-1, -1, 1, 2]) == 1.5
    assert math.isclose(min_shift_norm(L2Norm(), [0, 2]), math.sqrt(2), rel_tol=1e-15)
    for nm in (LInfNorm(), L2Norm(), LovaszNorm(CutFunction.standard(3))):
        assert min_shift_norm(nm, [4.2, 4.2, 4.2]) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_min_shift_is_a_minimum(seed):
    # the shift value never exceeds the norm at any other shift
    rng = np.random.default_rng(seed)
    for nm in (LInfNorm(), L2Norm(), LovaszNorm(random_cut(rng, 4))):
        x = rng.standard_normal(4)
        f = nm.min_shift(x)
        for u in np.linspace(-3, 3, 61):
            assert f <= nm.norm(x - u) + 1e-12


# ---------------------------------------------------------------------------
# cut functions and the Lovász extension


def test_lovasz_examples():
    cut = CutFunction.standard(2)
    assert lovasz_value(cut, [0.0, 1.0]) == 1.0
    assert lovasz_value(cut, [3.0, 3.0]) == 0.0


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lovasz_indicators_exact(k):
    cut = random_cut(np.random.default_rng(k), k)
    for mask in range(1 << k):
        x = np.array([(mask >> i) & 1 for i in range(k)], dtype=float)
        assert cut.lovasz(x) == cut.table[mask]


@pytest.mark.parametrize("seed", range(10))
def test_lovasz_is_base_polytope_maximum(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 5))
    cut = random_cut(rng, k)
    x = rng.standard_normal(k)
    assert math.isclose(cut.lovasz(x), brute_lovasz(cut, x), rel_tol=1e-12, abs_tol=1e-12)


def test_cut_function_validation():
    with pytest.raises(InvalidCutFunction):
        CutFunction([0.0, 1.0, 1.0])  # not a power of two
    with pytest.raises(InvalidCutFunction):
        CutFunction([0.0, 1.0, 2.0, 0.0])  # not symmetric
    with pytest.raises(InvalidCutFunction):
        CutFunction([1.0, 1.0, 1.0, 1.0])  # nonzero on the empty set
    with pytest.raises(InvalidCutFunction):
        CutFunction.cardinality_based(4, [0.0, 1.0, 3.0])  # convex profile
    with pytest.raises(InvalidCutFunction):
        CutFunction.cardinality_based(4, [0.0, 0.0, 1.0])  # zero singletons
    with pytest.raises(InvalidCutFunction):
        CutFunction(np.zeros(1 << 13), validate=False)


def test_cut_function_file_roundtrip(tmp_path):
    cut = random_cut(np.random.default_rng(0), 4)
    cut.to_file(tmp_path / "c.txt")
    assert np.array_equal(CutFunction.from_file(tmp_path / "c.txt").table, cut.table)
    nm = parse_norm(f"lovasz:{tmp_path / 'c.txt'}")
    assert isinstance(nm, LovaszNorm) and nm.k == 4


def test_parse_norm():
    assert isinstance(parse_norm("linf"), LInfNorm)
    assert isinstance(parse_norm("l2"), L2Norm)
    with pytest.raises(ValueError):
        parse_norm("l3")


def test_tie_groups_do_not_chain():
    v = np.array([1.0, 1.0 - 1.5e-9, 1.0 - 3e-9, 0.0])  # tolerance here is 2e-9
    assert tie_groups(v).tolist() == [0, 0, 1, 2]


# ---------------------------------------------------------------------------
# norm properties


def _norms(rng):
    return [LInfNorm(), L2Norm()] + [LovaszNorm(random_cut(rng, k)) for k in (2, 3, 4, 4)]


def test_norms_dominated_by_euclidean():
    rng = np.random.default_rng(11)
    for nm in _norms(rng):
        k = getattr(nm, "k", 4)
        for _ in range(1000):
            x = rng.standard_normal(k) * rng.choice([1e-3, 1.0, 1e3])
            assert nm.norm(x) <= np.linalg.norm(x) * (1 + 1e-12)


def test_norm_axioms():
    rng = np.random.default_rng(12)
    for nm in _norms(rng):
        k = getattr(nm, "k", 4)
        for _ in range(200):
            x, y = rng.standard_normal(k), rng.standard_normal(k)
            c = rng.uniform(-5, 5)
            assert math.isclose(nm.norm(c * x), abs(c) * nm.norm(x), rel_tol=1e-10, abs_tol=1e-12)
            assert nm.norm(x + y) <= nm.norm(x) + nm.norm(y) + 1e-12
            assert nm.norm(x) > 0


def test_dual_norm_bounds_witness_pairing():
    # <y, v> <= ||y||_* ||v|| for y orthogonal to ones; witnesses have dual norm 1
    rng = np.random.default_rng(13)
    for nm in _norms(rng):
        k = getattr(nm, "k", 4)
        for _ in range(100):
            x = rng.standard_normal(k)
            y = nm.witness(x)
            assert abs(y.sum()) < 1e-12
            assert nm.dual_norm(y) <= 1 + 1e-9
            assert math.isclose(float(y @ x), nm.min_shift(x), rel_tol=1e-10, abs_tol=1e-12)
            v = rng.standard_normal(k)
            assert float(y @ v) <= nm.dual_norm(y) * nm.norm(v) + 1e-12


def test_lovasz_norm_construction_shift():
    rng = np.random.default_rng(14)
    for _ in range(50):
        k = int(rng.integers(2, 5))
        cut = random_cut(rng, k)

        def g(v):
            return cut.lovasz(v) + abs(float(np.sum(v)))

        for _ in range(10):
            x = rng.standard_normal(k)
            # g(x - u 1) = lovasz(x) + |sum(x) - k u| is piecewise linear in u; its
            # only kink is at the mean, so the candidates below contain the minimizer
            cands = np.r_[x, x.mean(), x.mean() + 1e-3, x.mean() - 1e-3]
            assert abs(min(g(x - u) for u in cands) - cut.lovasz(x)) <= 1e-10


# ---------------------------------------------------------------------------
# the potential


def quad_model(w=1.0):
    return PotentialModel(build(4, [((0, 1, 2, 3), w)]))


def test_potential_examples():
    assert potential(quad_model(), [-1, -1, 1, 2]) == 9 / 8
    assert potential(quad_model(3.0), [-1, -1, 1, 2]) == 27 / 8
    assert potential(quad_model(), [2.0] * 4) == 0.0
    m = PotentialModel(build(2, [((0, 1), 1.0)]), L2Norm())
    assert math.isclose(potential(m, [0, 1]), 0.25, rel_tol=1e-15)


def test_potential_regularized():
    G = build(2, [((0, 1), 1.0)])
    m = PotentialModel(G, L2Norm(), lam=2.0)
    assert math.isclose(potential(m, [0, 1], regularized=True), 0.25 + 1.0, rel_tol=1e-15)


def test_graph_potential_is_quarter_quadratic_form():
    rng = np.random.default_rng(3)
    G = random_graph(rng, 15)
    m = PotentialModel(G, L2Norm())
    x = rng.standard_normal(15)
    direct = 0.25 * sum(w * (x[i] - x[j]) ** 2 for (i, j), w in zip(G.edges, G.weights))
    assert math.isclose(potential(m, x), direct, rel_tol=1e-12)


def test_per_edge_overrides():
    G = build(3, [((0, 1), 1.0), ((1, 2), 1.0)])
    m = PotentialModel(G, LInfNorm(), overrides={1: L2Norm()})
    x = np.array([0.0, 2.0, 4.0])
    assert math.isclose(potential(m, x), 0.5 * (1.0 + 2.0), rel_tol=1e-15)
    with pytest.raises(HypergraphError):
        PotentialModel(G, [LInfNorm()])
    with pytest.raises(HypergraphError):
        PotentialModel(G, LovaszNorm(CutFunction.standard(3)))
    with pytest.raises(HypergraphError):
        PotentialModel(G, lam=-1.0)


def mixed_model(rng, n=12, m=10, lam=0.0):
    G = random_connected(rng, n, m, 2, 4)
    norms = []
    for e in G.edges:
        r = rng.uniform()
        if r < 0.4:
            norms.append(LInfNorm())
        elif r < 0.7:
            norms.append(L2Norm())
        else:
            norms.append(LovaszNorm(random_cut(rng, len(e))))
    return PotentialModel(G, norms, lam=lam)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.floats(-100, 100))
def test_potential_shift_invariant(seed, c):
    rng = np.random.default_rng(seed)
    model = mixed_model(rng)
    x = rng.integers(-4, 5, size=model.n).astype(float)
    assert potential(model, x + c) == pytest.approx(potential(model, x), rel=1e-12, abs=1e-12)


def test_linf_potential_exact_shift():
    rng = np.random.default_rng(4)
    model = PotentialModel(random_connected(rng, 10, 8))
    x = rng.integers(-8, 9, 10).astype(float)
    assert potential(model, x + 3.0) == potential(model, x)


def test_potential_norm_on_balanced_subspace():
    rng = np.random.default_rng(15)
    for _ in range(20):
        lam = float(rng.choice([0.0, 0.5]))
        model = mixed_model(rng, lam=lam)
        G = model.graph

        def N(v):
            return math.sqrt(2 * potential(model, v) + lam * G.degrees @ (v * v))

        for _ in range(10):
            x = rng.standard_normal(G.n)
            y = rng.standard_normal(G.n)
            x -= d_projection(G, x)
            y -= d_projection(G, y)
            c = rng.uniform(-3, 3)
            assert abs(N(c * x) - abs(c) * N(x)) <= 1e-10 * (1 + N(x))
            assert N(x + y) <= N(x) + N(y) + 1e-10


def test_rayleigh_examples():
    m = PotentialModel(build(2, [((0, 1), 1.0)]), L2Norm())
    assert math.isclose(rayleigh(m, [1, -1]), 1.0, rel_tol=1e-15)
    two = PotentialModel(build(4, [((0, 1), 1.0), ((2, 3), 1.0)]))
    assert rayleigh(two, [1, 1, -1, -1]) == 0.0
    x = np.array([0.3, -1.0, 2.0, 0.1])
    model = quad_model()
    assert math.isclose(rayleigh(model, 5 * x), rayleigh(model, x), rel_tol=1e-12)
    with pytest.raises(ConstantVector):
        rayleigh(model, [1.0] * 4)


def test_rayleigh_sandwich():
    rng = np.random.default_rng(16)
    for _ in range(50):
        model = mixed_model(rng)
        for _ in range(10):
            q = rayleigh(model, rng.standard_normal(model.n))
            assert 0 < q <= 1 + 1e-12


def test_estimate_lambda_examples():
    m = PotentialModel(build(2, [((0, 1), 1.0)]), L2Norm())
    assert math.isclose(estimate_lambda(m, iterations=3, restarts=2), 1.0, rel_tol=1e-12)
    with pytest.raises(DisconnectedGraph):
        estimate_lambda(PotentialModel(build(4, [((0, 1), 1.0), ((2, 3), 1.0)])))
    model = PotentialModel(random_connected(np.random.default_rng(5), 15, 10))
    vals = [estimate_lambda(model, iterations=t, restarts=3, seed=1) for t in (1, 5, 20)]
    assert vals[0] >= vals[1] >= vals[2]


def test_poincare_bound_is_exact_on_graphs():
    rng = np.random.default_rng(17)
    G = random_graph(rng, 20)
    assert math.isclose(poincare_lower_bound(PotentialModel(G, L2Norm())), graph_poincare(G), rel_tol=1e-9)


def test_poincare_bound_below_every_quotient():
    rng = np.random.default_rng(18)
    for _ in range(10):
        model = mixed_model(rng)
        lb = poincare_lower_bound(model)
        assert lb > 0
        for _ in range(50):
            assert rayleigh(model, rng.standard_normal(model.n)) >= lb * (1 - 1e-9)
        assert estimate_lambda(model, iterations=20, restarts=2) >= lb * (1 - 1e-9)
