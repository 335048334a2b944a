"""Hypergraph personalized PageRank next to its graph counterpart.

On a graph with the l2 norm the fixed point is a linear system, which is
solved here directly for comparison.
"""
import numpy as np

from hyperdiffusion import L2Norm, LInfNorm, PotentialModel, build, clique_expansion, ppr
from hyperdiffusion.experiments import random_connected_hypergraph

H = random_connected_hypergraph(np.random.default_rng(1), 30, 20, 3, 6)
s = np.zeros(H.n)
s[0] = 1.0

p_hyper, res = ppr(PotentialModel(H, LInfNorm()), alpha=0.2, s=s, eps=0.05)
print("hypergraph PPR top vertices:", np.argsort(-p_hyper)[:8].tolist(), f"(residual {res.norm:.2e})")

C = clique_expansion(H)
W = np.zeros((C.n, C.n))
for (i, j), w in zip(C.edges, C.weights):
    W[i, j] = W[j, i] = w
L = np.diag(C.degrees) - W
alpha = 0.2
# on a graph the fixed point is the linear system (I + (1 - alpha)/(4 alpha) L D^{-1}) p = s
M = np.eye(C.n) + (1 - alpha) / (4 * alpha) * L / C.degrees
p_exact = np.linalg.solve(M, s)
p_graph, _ = ppr(PotentialModel(C, L2Norm()), alpha=alpha, s=s, eps=0.05)
print("clique graph PPR top vertices:", np.argsort(-p_graph)[:8].tolist())
print("max deviation from the linear solve:", float(np.abs(p_graph - p_exact).max()))
