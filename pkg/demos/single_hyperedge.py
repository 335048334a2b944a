"""Heat diffusion on one hyperedge of four vertices.

Shows the gap between an arbitrary subgradient and the minimum-norm one,
then diffuses until the state is flat.
"""
import numpy as np

from hyperdiffusion import PotentialModel, any_subgradient, build, diffuse, min_norm_subgradient, potential

model = PotentialModel(build(4, [((0, 1, 2, 3), 1.0)]))
x = np.array([-1.0, -1.0, 1.0, 2.0])

print("U(x)           =", potential(model, x))
print("any subgradient =", any_subgradient(model, x).z)
print("min-norm        =", min_norm_subgradient(model, x).z)

trace = diffuse(model, x, 8)
for t in range(len(trace.potential)):
    print(f"t={t}  x={np.round(trace.iterates[t], 4)}  U={trace.potential[t]:.5f}  var={trace.variance[t]:.5f}")
