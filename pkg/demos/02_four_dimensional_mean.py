"""
Mean of sixteen 4-d unit vectors
================================

A 10-qubit run: 4 index qubits, 3 data qubits and 3 mean qubits.
Sampling noise is compared against a four-sigma band.
"""
import numpy as np

from qmean import classical_mean, estimate_mean, exact_distribution, sample
from qmean.cli import bundled_experiment, parse_experiment

vs = parse_experiment(bundled_experiment("table2")).vector_set()
dist = exact_distribution(vs)
shots = 8192
hist = sample(dist, shots, seed=0)

print("outcome   exact    sampled  4 sigma")
for r, (p, c) in enumerate(zip(dist, hist.counts)):
    band = 4 * np.sqrt(p * (1 - p) / shots)
    print(f"  {r:03b}   {p:.5f}  {c / shots:.5f}  {band:.5f}")

# outcomes 001..011 never fire: the copy step only writes d..2d-1
est = estimate_mean(vs, mode="sampled", shots=shots, seed=0)
print("estimated |mean|:", np.round(est.magnitudes, 4))
print("classical mean:  ", np.round(classical_mean(vs), 4))

# more shots shrink the error roughly as 1/sqrt(shots)
for n in (512, 8192, 131072):
    e = estimate_mean(vs, mode="sampled", shots=n, seed=1)
    err = np.max(np.abs(e.magnitudes - np.abs(classical_mean(vs))))
    print(f"shots={n:>6}  max error {err:.4f}")
