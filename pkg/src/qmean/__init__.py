"""State-vector simulation of an interference-based quantum mean estimator."""

__version__ = "0.1.0"

from .encoder import AngleTree, RegisterLayout, VectorSet, angles_from_vector, qram_ops, stateprep_ops
from .meanest import (
    GateCountReport,
    MeanEstimate,
    build_circuit,
    estimate_mean,
    exact_distribution,
    gate_counts,
    lower_multicontrolled,
    recover_signs,
)
from .oracle import classical_mean, expected_distribution
from .statevec import Circuit, GateOp, StateVector, apply, ground_state, register_probabilities, run, sample

__all__ = [
    "AngleTree",
    "Circuit",
    "GateCountReport",
    "GateOp",
    "MeanEstimate",
    "RegisterLayout",
    "StateVector",
    "VectorSet",
    "angles_from_vector",
    "apply",
    "build_circuit",
    "classical_mean",
    "estimate_mean",
    "exact_distribution",
    "expected_distribution",
    "gate_counts",
    "ground_state",
    "lower_multicontrolled",
    "qram_ops",
    "recover_signs",
    "register_probabilities",
    "run",
    "sample",
    "stateprep_ops",
]
