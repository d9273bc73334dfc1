"""Interference-based mean estimation circuit.

Pipeline over the index / data / mean registers:

1. H on every index qubit
2. QRAM block (shift qubit X, then index-controlled row loads)
3. H on every index qubit
4. copy: for each data qubit ``j``, X on mean qubit ``j`` controlled by data
   qubit ``j`` (closed) and every index qubit (open)
5. H on every index qubit

Afterwards mean-register value ``d + k`` has probability ``mean[k]**2``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .encoder import RegisterLayout, VectorSet, qram_ops
from .statevec import (
    RY,
    Circuit,
    GateOp,
    H,
    X,
    register_probabilities,
    run,
    sample,
    unitary_gate,
)

DEFAULT_SHOTS = 8192
DEFAULT_EPSILON = 0.02


@dataclass
class MeanEstimate:
    magnitudes: np.ndarray
    estimated_mean: np.ndarray
    zero_outcome_probability: float
    distribution: np.ndarray
    mode: str = "exact"
    shots: int | None = None
    seed: int | None = None
    signs: np.ndarray | None = None
    counts: np.ndarray | None = None

    @property
    def residual_probability(self) -> float:
        """Mass on mean values ``1..d-1``; zero up to rounding in exact mode."""
        d = self.magnitudes.size
        return float(self.distribution[1:d].sum())


@dataclass
class GateCountReport:
    by_kind: Counter = field(default_factory=Counter)
    by_arity: Counter = field(default_factory=Counter)
    by_kind_arity: Counter = field(default_factory=Counter)
    total: int = 0
    lowered_total: int = 0

    def as_dict(self) -> dict:
        return {
            "total": self.total,
            "lowered_total": self.lowered_total,
            "by_kind": dict(sorted(self.by_kind.items())),
            "by_arity": {str(k): v for k, v in sorted(self.by_arity.items())},
            "by_kind_arity": {f"{k}/{a}": v for (k, a), v in sorted(self.by_kind_arity.items())},
        }


def circuit_stages(vs: VectorSet, layout: RegisterLayout | None = None) -> list[tuple[str, list[GateOp]]]:
    """The five pipeline stages as ``(name, ops)`` pairs."""
    layout = layout or RegisterLayout.for_set(vs)
    layout.check(vs)
    hadamards = [H(q) for q in layout.index]
    all_open = tuple((q, 0) for q in layout.index)
    copy = [X(t, all_open + ((c, 1),)) for c, t in zip(layout.data, layout.mean)]
    return [
        ("spread", list(hadamards)),
        ("qram", qram_ops(vs, layout)),
        ("interfere", list(hadamards)),
        ("copy", copy),
        ("unmix", list(hadamards)),
    ]


def build_circuit(vs: VectorSet) -> tuple[Circuit, RegisterLayout]:
    layout = RegisterLayout.for_set(vs)
    ops = [op for _, stage in circuit_stages(vs, layout) for op in stage]
    return Circuit(layout.num_qubits, ops), layout


def exact_distribution(vs: VectorSet, lowered: bool = False) -> np.ndarray:
    """Mean-register probabilities over values ``0..2d-1`` from a full simulation."""
    circuit, layout = build_circuit(vs)
    if lowered:
        circuit = lower_multicontrolled(circuit)
    return register_probabilities(run(circuit), layout.mean)


def estimate_from_distribution(dist, d: int, **info) -> MeanEstimate:
    """Read magnitudes ``sqrt(P(d + k))`` off a mean-register distribution."""
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (2 * d,):
        raise ValueError(f"expected {2 * d} outcome probabilities, got shape {dist.shape}")
    mags = np.sqrt(np.clip(dist[d:], 0.0, None))
    return MeanEstimate(
        magnitudes=mags,
        estimated_mean=mags.copy(),
        zero_outcome_probability=float(dist[0]),
        distribution=dist,
        **info,
    )


def estimate_mean(
    vs: VectorSet,
    mode: str = "exact",
    shots: int = DEFAULT_SHOTS,
    seed: int = 0,
    with_signs: bool = False,
    epsilon: float = DEFAULT_EPSILON,
    lowered: bool = False,
) -> MeanEstimate:
    """Estimate the componentwise mean of ``vs``.

    ``mode="exact"`` uses the simulated outcome distribution directly;
    ``mode="sampled"`` draws ``shots`` measurements with ``seed`` and uses
    the observed frequencies.  With ``with_signs`` the signs come from
    :func:`recover_signs` and multiply the magnitudes.
    """
    exact = exact_distribution(vs, lowered=lowered)
    if mode == "exact":
        est = estimate_from_distribution(exact, vs.d, mode="exact")
    elif mode == "sampled":
        hist = sample(exact, shots, seed)
        est = estimate_from_distribution(
            hist.frequencies(), vs.d, mode="sampled", shots=int(shots), seed=int(seed)
        )
        est.counts = hist.counts
    else:
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    if with_signs:
        est.signs = recover_signs(vs, epsilon, base=exact)
        est.estimated_mean = est.signs * est.magnitudes
    return est


def _probe_row(vs: VectorSet, k: int) -> int:
    # Row whose k-th component is smallest in magnitude moves most under the probe.
    return int(np.argmin(np.abs(vs.rows[:, k])))


def recover_signs(vs: VectorSet, epsilon: float = DEFAULT_EPSILON, base=None) -> np.ndarray:
    """Signs of the mean components from one perturbed rerun per component.

    For component ``k`` a probe row ``i`` (the one with the smallest
    ``|v[i, k]|``) is replaced by ``normalize(v_i + epsilon * e_k)``, which
    raises its ``k``-th entry by a known ``N * shift``.  The rerun changes the
    outcome probability by ``2 * mean[k] * shift + shift**2``; subtracting the
    known ``shift**2`` leaves a statistic with the sign of ``mean[k]``.  It is
    reported as 0 inside the margin ``epsilon**2 / (4 N**2)``.
    """
    if not 0.0 < epsilon <= 0.25:
        raise ValueError("epsilon must lie in (0, 0.25]")
    d, N = vs.d, vs.N
    if base is None:
        base = exact_distribution(vs)
    margin = epsilon ** 2 / (4.0 * N ** 2)
    signs = np.zeros(d)
    for k in range(d):
        i = _probe_row(vs, k)
        rows = np.array(vs.rows)
        probe = rows[i].copy()
        probe[k] += epsilon
        probe /= np.linalg.norm(probe)
        shift = (probe[k] - rows[i, k]) / N
        rows[i] = probe
        probed = exact_distribution(VectorSet(rows))
        stat = probed[d + k] - base[d + k] - shift ** 2
        if stat > margin:
            signs[k] = 1.0
        elif stat < -margin:
            signs[k] = -1.0
    return signs


# -- lowering ---------------------------------------------------------------

def _sqrt_gate(op: GateOp) -> tuple[GateOp, GateOp]:
    """A gate V with V @ V == op's matrix, and its adjoint, on the same target."""
    if op.kind == "RY":
        return RY(op.angle / 2.0, op.target), RY(-op.angle / 2.0, op.target)
    t, z = linalg.schur(op.unitary(), output="complex")
    v = z @ np.diag(np.sqrt(np.diag(t))) @ z.conj().T
    return unitary_gate(v, op.target), unitary_gate(v.conj().T, op.target)


def _lower_closed(op: GateOp) -> list[GateOp]:
    if op.arity <= 1:
        return [op]
    *rest, last = op.controls
    v, v_dag = _sqrt_gate(op)
    flip = X(last[0], rest)
    return (
        [v.with_controls([last])]
        + _lower_closed(flip)
        + [v_dag.with_controls([last])]
        + _lower_closed(flip)
        + _lower_closed(v.with_controls(rest))
    )


def lower_op(op: GateOp) -> list[GateOp]:
    """Rewrite one gate into gates with at most one control."""
    if op.arity <= 1:
        return [op]
    opened = [q for q, v in op.controls if v == 0]
    sandwich = [X(q) for q in opened]
    closed = op.with_controls((q, 1) for q, _ in op.controls)
    return sandwich + _lower_closed(closed) + sandwich


def lower_multicontrolled(circuit: Circuit) -> Circuit:
    """Equivalent circuit whose gates carry at most one control each.

    A gate ``U`` with ``c >= 2`` closed controls becomes ``C(V)``,
    ``C^{c-1}(X)``, ``C(V^dagger)``, ``C^{c-1}(X)``, ``C^{c-1}(V)`` with
    ``V @ V == U``, recursively.  Open controls are flipped with X before and
    after the gate.  Square roots of RY stay RY; square roots of X and H are
    emitted as explicit ``U`` gates, since X has no real square root.
    """
    ops = []
    for op in circuit.ops:
        ops.extend(lower_op(op))
    return Circuit(circuit.num_qubits, ops)


def gate_counts(circuit: Circuit, lower: bool = True) -> GateCountReport:
    report = GateCountReport()
    for op in circuit.ops:
        report.by_kind[op.kind] += 1
        report.by_arity[op.arity] += 1
        report.by_kind_arity[op.kind, op.arity] += 1
    report.total = len(circuit.ops)
    if lower:
        report.lowered_total = sum(len(lower_op(op)) for op in circuit.ops)
    else:
        report.lowered_total = report.total
    return report
