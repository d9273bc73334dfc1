"""Brute-force references shared by the test modules."""
import numpy as np

from qmean import VectorSet


def random_set(rng, N, d):
    return VectorSet(rng.standard_normal((N, d)))


def random_state(rng, q):
    v = rng.standard_normal(1 << q) + 1j * rng.standard_normal(1 << q)
    return v / np.linalg.norm(v)


def dense_matrix(op, q):
    """Full 2**q x 2**q matrix of a gate, built one basis column at a time."""
    u = op.unitary()
    mat = np.zeros((1 << q, 1 << q), dtype=complex)
    for b in range(1 << q):
        fires = all(((b >> c) & 1) == v for c, v in op.controls)
        if not fires:
            mat[b, b] = 1.0
            continue
        bit = (b >> op.target) & 1
        b0 = b & ~(1 << op.target)
        b1 = b0 | (1 << op.target)
        mat[b0, b] = u[0, bit]
        mat[b1, b] = u[1, bit]
    return mat


def dense_circuit_matrix(circuit):
    q = circuit.num_qubits
    total = np.eye(1 << q, dtype=complex)
    for op in circuit.ops:
        total = dense_matrix(op, q) @ total
    return total


# (criterion id, passed, detail) rows printed by the terminal-summary hook
ACCEPTANCE_RESULTS = []


def record(criterion, checks):
    """Record named sub-checks for one acceptance criterion and return overall status."""
    failed = [name for name, ok in checks if not ok]
    passed = not failed
    detail = "all checks passed" if passed else "failed: " + "; ".join(failed)
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    return passed, detail
