r"""
A Mott state that starts moving
===============================

The single-site state ``(-sqrt2|0> + |1> + |2>)/2`` has order parameter zero,
so it looks Mott-like, yet the interaction pushes ``alpha`` away from zero at
rate ``U <phi, N a phi> = sqrt2/4``.
"""

import math

import numpy as np

from hubbard_mf_lab import ModelParams, evolve_mf, order_parameter

witness = np.array([-math.sqrt(2.0), 1.0, 1.0]) / 2.0
params = ModelParams(J=0.0, mu=0.0, U=1.0)
print("alpha(0) =", order_parameter(witness))

times = np.linspace(0.05, 1.0, 20)
traj = evolve_mf(witness, params, 24, times)

# |alpha(t)| should track the straight line sqrt2/4 * t for small t
for t, alpha in zip(times[::4], traj.alphas[::4]):
    print(f"t={t:5.2f}  |alpha|={abs(alpha):.6f}  linear={math.sqrt(2) / 4 * t:.6f}")

print("norm drift:", traj.norm_drift, " richardson estimate:", traj.richardson_error)
