"""
Recovering signs
================

Measurement only yields mean_k ** 2.  Nudging one vector towards e_k and
rerunning shows whether the k-th mean component grows or shrinks, which
gives its sign.
"""
import numpy as np

from qmean import VectorSet, classical_mean, estimate_mean, recover_signs

rng = np.random.default_rng(3)
rows = rng.standard_normal((8, 4))
vs = VectorSet(rows)

est = estimate_mean(vs, with_signs=True)
print("classical mean:", np.round(classical_mean(vs), 4))
print("magnitudes:    ", np.round(est.magnitudes, 4))
print("signs:         ", est.signs)
print("signed mean:   ", np.round(est.estimated_mean, 4))

# components that cancel exactly report sign 0
print(recover_signs(VectorSet([[1, 0], [-1, 0]])))

# on exact distributions the probe size hardly matters
for eps in (0.2, 0.02, 0.002):
    print(eps, recover_signs(vs, epsilon=eps))
