"""
Mean of eight 2-d unit vectors
==============================

Eight vectors given as rotation angles are loaded into an 8-qubit circuit.
The mean register's outcome distribution is compared with the classical mean,
then 8192 shots are drawn and the mean is read back from the frequencies.
"""
import numpy as np

from qmean import VectorSet, build_circuit, classical_mean, estimate_mean, exact_distribution
from qmean.cli import bundled_experiment, parse_experiment

# the bundled experiment stores one RY angle per vector
spec = parse_experiment(bundled_experiment("table1"))
vs = spec.vector_set()
print("vectors:\n", np.round(vs.rows, 5))

circuit, layout = build_circuit(vs)
print(f"{layout.num_qubits} qubits, {len(circuit.ops)} gates")

# outcome d+k carries mean_k ** 2, outcome 0 carries the rest
dist = exact_distribution(vs)
alpha = classical_mean(vs)
for r, p in enumerate(dist):
    print(f"  {r:02b}  {p:.5f}")
print("mean squared:", np.round(alpha ** 2, 5))

# a finite run: magnitudes are square roots of observed frequencies
est = estimate_mean(vs, mode="sampled", shots=8192, seed=0)
print("counts:", est.counts.tolist())
print("estimated |mean|:", np.round(est.magnitudes, 4))
print("classical mean:  ", np.round(alpha, 4))
