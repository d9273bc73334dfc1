"""Classical reference values for the mean estimator.

Nothing here runs a circuit.  The intermediate states are written down
amplitude by amplitude so they can be compared with simulated circuit
prefixes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import RegisterLayout, VectorSet
from .statevec import StateVector


@dataclass(frozen=True)
class ClassicalSummary:
    mean: np.ndarray
    mean_norm_sq: float
    expected_distribution: np.ndarray


def classical_mean(vs: VectorSet) -> np.ndarray:
    return vs.rows.sum(axis=0) / vs.N


def expected_distribution(vs: VectorSet) -> np.ndarray:
    """Mean-register outcome probabilities over values ``0..2d-1``.

    Value ``d + k`` has probability ``mean[k]**2``; value 0 takes the rest.
    """
    alpha = classical_mean(vs)
    d = vs.d
    dist = np.zeros(2 * d)
    dist[d:] = alpha ** 2
    dist[0] = 1.0 - dist[d:].sum()
    return dist


def summarize(vs: VectorSet) -> ClassicalSummary:
    alpha = classical_mean(vs)
    return ClassicalSummary(alpha, float(alpha @ alpha), expected_distribution(vs))


def _walsh_sums(vs: VectorSet) -> np.ndarray:
    """``out[l, k] = (1/N) * sum_i (-1)**popcount(i & l) * v[i, k]``."""
    N = vs.N
    i = np.arange(N)
    parity = np.array([[bin(a & b).count("1") & 1 for a in i] for b in i])
    signs = 1.0 - 2.0 * parity
    return signs @ vs.rows / N


def construct_psi2(vs: VectorSet, layout: RegisterLayout | None = None) -> StateVector:
    """Uniform index superposition with row ``i`` loaded (shifted by ``d``) beside ``|i>``."""
    layout = layout or RegisterLayout.for_set(vs)
    layout.check(vs)
    amps = np.zeros(1 << layout.num_qubits, dtype=complex)
    d = vs.d
    scale = 1.0 / np.sqrt(vs.N)
    for i in range(vs.N):
        for k in range(d):
            amps[layout.basis_index(i, d + k, 0)] = scale * vs.rows[i, k]
    return StateVector(layout.num_qubits, amps)


def construct_psi4(vs: VectorSet, layout: RegisterLayout | None = None) -> StateVector:
    """State after the second index Hadamard and the index-zero copy.

    Index value ``l`` carries ``(1/N) sum_i (-1)**(i.l) v_i`` on the data
    register; for ``l = 0`` that vector is also copied into the mean register.
    """
    layout = layout or RegisterLayout.for_set(vs)
    layout.check(vs)
    amps = np.zeros(1 << layout.num_qubits, dtype=complex)
    d = vs.d
    branches = _walsh_sums(vs)
    for l in range(vs.N):
        for k in range(d):
            mean_value = d + k if l == 0 else 0
            amps[layout.basis_index(l, d + k, mean_value)] = branches[l, k]
    return StateVector(layout.num_qubits, amps)
