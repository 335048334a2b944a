"""Recover a planted cluster by diffusing from one of its vertices."""
import numpy as np

from hyperdiffusion import PotentialModel, build, conductance, local_partition

rng = np.random.default_rng(0)
size = 20
edges = []
for base in (0, size):
    perm = base + rng.permutation(size)
    edges += [((int(perm[i]), int(perm[i + 1])), 1.0) for i in range(size - 1)]
    edges += [((base + rng.choice(size, int(rng.integers(2, 6)), replace=False)).tolist(), 1.0) for _ in range(40)]
edges += [([3, 7, size + 1], 1.0), ([11, size + 5, size + 9], 1.0)]
G = build(2 * size, edges)

planted = conductance(G, range(size)).conductance
res = local_partition(PotentialModel(G), v=0, phi_target=planted)
print(f"planted conductance {planted:.4f}")
print(f"found   conductance {res.phi:.4f} at step {res.t_star}")
print("cut:", res.S.tolist())
