"""Dense state-vector simulation.

Basis convention: qubit position ``p`` contributes ``2**p`` to a basis index,
so ``amps[b]`` is the amplitude of the computational basis state whose bit
``p`` is the value of qubit ``p``.  Internally the amplitude array is viewed
as a ``(2,) * q`` tensor in which qubit ``p`` lives on axis ``q - 1 - p``.

Gates act in place.  A multi-controlled gate is applied by restricting the
tensor view to the sub-block where every control reads its required value
and mixing the two target slices there; amplitudes outside that block are
never written.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DistributionError, LayoutError, SizeError

MAX_QUBITS = 24

_SQRT1_2 = 1.0 / np.sqrt(2.0)
_H = np.array([[_SQRT1_2, _SQRT1_2], [_SQRT1_2, -_SQRT1_2]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)

GATE_KINDS = ("H", "X", "RY", "U")


def ry_matrix(theta: float) -> np.ndarray:
    """RY(theta) = [[cos(theta/2), -sin(theta/2)], [sin(theta/2), cos(theta/2)]]."""
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class GateOp:
    """One (possibly multi-controlled) single-target gate.

    ``controls`` holds ``(qubit, value)`` pairs: value 1 is a closed control
    (fires on 1), value 0 an open control (fires on 0).  ``angle`` is used
    by ``RY`` only.  Kind ``U`` carries an explicit 2x2 unitary as a flat
    row-major tuple in ``matrix``; it is emitted by the lowering pass when a
    square root of X is required and is not otherwise needed.
    """

    kind: str
    target: int
    controls: tuple[tuple[int, int], ...] = ()
    angle: float = 0.0
    matrix: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        controls = tuple((int(q), int(v)) for q, v in self.controls)
        object.__setattr__(self, "controls", controls)
        positions = [q for q, _ in controls]
        if self.target < 0 or any(q < 0 for q in positions):
            raise LayoutError("qubit positions must be nonnegative")
        if self.target in positions:
            raise LayoutError(f"target {self.target} is also a control")
        if len(set(positions)) != len(positions):
            raise LayoutError("control positions must be distinct")
        if any(v not in (0, 1) for _, v in controls):
            raise LayoutError("control values must be 0 (open) or 1 (closed)")
        if self.kind == "RY" and not np.isfinite(self.angle):
            raise ValueError("RY angle must be finite")
        if self.kind == "U":
            if self.matrix is None or len(self.matrix) != 4:
                raise ValueError("U gate needs a 2x2 matrix")
            object.__setattr__(self, "matrix", tuple(complex(z) for z in self.matrix))

    @property
    def arity(self) -> int:
        return len(self.controls)

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target,) + tuple(q for q, _ in self.controls)

    def unitary(self) -> np.ndarray:
        """The 2x2 matrix applied to the target when the controls fire."""
        if self.kind == "H":
            return _H
        if self.kind == "X":
            return _X
        if self.kind == "RY":
            return ry_matrix(self.angle)
        return np.array(self.matrix, dtype=complex).reshape(2, 2)

    def with_controls(self, controls: Iterable[tuple[int, int]]) -> "GateOp":
        return GateOp(self.kind, self.target, tuple(controls), self.angle, self.matrix)

    def __repr__(self) -> str:
        name = f"RY({self.angle!r})" if self.kind == "RY" else self.kind
        if not self.controls:
            return f"{name}@{self.target}"
        ctrl = ",".join(f"{q}{'' if v else '~'}" for q, v in self.controls)
        return f"{name}@{self.target}[{ctrl}]"


def H(target: int, controls=()) -> GateOp:
    return GateOp("H", target, tuple(controls))


def X(target: int, controls=()) -> GateOp:
    return GateOp("X", target, tuple(controls))


def RY(theta: float, target: int, controls=()) -> GateOp:
    return GateOp("RY", target, tuple(controls), angle=float(theta))


def unitary_gate(matrix, target: int, controls=()) -> GateOp:
    m = np.asarray(matrix, dtype=complex).reshape(4)
    return GateOp("U", target, tuple(controls), matrix=tuple(m))


@dataclass
class Circuit:
    """An ordered gate list over ``num_qubits`` qubits."""

    num_qubits: int
    ops: list[GateOp] = field(default_factory=list)

    def __post_init__(self):
        _check_qubit_count(self.num_qubits)
        self.ops = list(self.ops)
        for op in self.ops:
            _check_op(op, self.num_qubits)

    def append(self, op: GateOp) -> None:
        _check_op(op, self.num_qubits)
        self.ops.append(op)

    def extend(self, ops: Iterable[GateOp]) -> None:
        for op in ops:
            self.append(op)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)


class StateVector:
    """Complex amplitudes of a ``num_qubits``-qubit pure state."""

    def __init__(self, num_qubits: int, amps):
        _check_qubit_count(num_qubits)
        amps = np.array(amps, dtype=np.complex128)
        if amps.shape != (1 << num_qubits,):
            raise SizeError(f"expected {1 << num_qubits} amplitudes, got shape {amps.shape}")
        self.num_qubits = num_qubits
        self.amps = amps

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amps.copy())

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def apply(self, op: GateOp) -> "StateVector":
        return apply(self, op)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.num_qubits)


def _check_qubit_count(q) -> None:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= MAX_QUBITS:
        raise SizeError(f"qubit count must be an integer in [1, {MAX_QUBITS}], got {q!r}")


def _check_op(op: GateOp, q: int) -> None:
    if any(p >= q for p in op.qubits):
        raise LayoutError(f"{op!r} addresses a qubit outside a {q}-qubit register")


def ground_state(q: int) -> StateVector:
    _check_qubit_count(q)
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(q, amps)


def basis_state(q: int, index: int) -> StateVector:
    _check_qubit_count(q)
    if not 0 <= index < (1 << q):
        raise LayoutError(f"basis index {index} out of range for {q} qubits")
    amps = np.zeros(1 << q, dtype=np.complex128)
    amps[index] = 1.0
    return StateVector(q, amps)


def apply(state: StateVector, op: GateOp) -> StateVector:
    """Apply ``op`` to ``state`` in place and return the state."""
    q = state.num_qubits
    _check_op(op, q)
    psi = state.tensor()
    sel: list = [slice(None)] * q
    # length-1 slices keep every selection a view, even when all axes are fixed
    for c, v in op.controls:
        sel[q - 1 - c] = slice(v, v + 1)
    ax = q - 1 - op.target
    sel[ax] = slice(0, 1)
    a0 = psi[tuple(sel)]
    sel[ax] = slice(1, 2)
    a1 = psi[tuple(sel)]
    if op.kind == "X":
        tmp = a0.copy()
        a0[...] = a1
        a1[...] = tmp
        return state
    u = op.unitary()
    n0 = u[0, 0] * a0 + u[0, 1] * a1
    n1 = u[1, 0] * a0 + u[1, 1] * a1
    a0[...] = n0
    a1[...] = n1
    return state


def run(circuit: Circuit, initial: StateVector | None = None) -> StateVector:
    """Fold ``apply`` over the circuit, starting from the ground state by default."""
    if initial is None:
        state = ground_state(circuit.num_qubits)
    else:
        if initial.num_qubits != circuit.num_qubits:
            raise LayoutError("initial state and circuit differ in qubit count")
        state = initial.copy()
    for op in circuit.ops:
        apply(state, op)
    return state


def register_probabilities(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Marginal distribution of the register formed by ``qubits``.

    ``qubits[j]`` supplies bit ``j`` of the register value, so entry ``r`` of
    the result is the total probability of basis states whose listed qubits
    spell ``r``.
    """
    q = state.num_qubits
    qubits = [int(p) for p in qubits]
    if len(set(qubits)) != len(qubits) or any(not 0 <= p < q for p in qubits):
        raise LayoutError(f"invalid qubit subset {qubits} for {q} qubits")
    probs = state.probabilities().reshape((2,) * q)
    keep = [q - 1 - p for p in reversed(qubits)]
    drop = tuple(a for a in range(q) if a not in keep)
    marg = probs.sum(axis=drop) if drop else probs
    remaining = sorted(keep)
    marg = np.transpose(marg, [remaining.index(a) for a in keep])
    return np.ascontiguousarray(marg).reshape(-1)


@dataclass(frozen=True)
class Histogram:
    """Shot counts per outcome; ``counts[r]`` is the number of draws of ``r``."""

    counts: np.ndarray
    shots: int
    seed: int

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def as_dict(self) -> dict[int, int]:
        return {int(r): int(c) for r, c in enumerate(self.counts) if c}

    def __eq__(self, other) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return (self.shots, self.seed) == (other.shots, other.seed) and np.array_equal(
            self.counts, other.counts
        )


def uniform_draws(n: int, seed: int) -> np.ndarray:
    """``n`` doubles in [0, 1) from PCG64 seeded with ``seed``.

    Each draw takes the top 53 bits of one raw 64-bit PCG64 output, so the
    stream depends only on the bit generator, not on numpy's float helpers.
    """
    bitgen = np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF)
    raw = bitgen.random_raw(n)
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def sample(probabilities, shots: int, seed: int = 0) -> Histogram:
    """Draw ``shots`` outcomes by per-shot inverse CDF over ``probabilities``.

    Shot ``s`` uses the ``s``-th value of :func:`uniform_draws` and picks
    the first outcome whose cumulative probability exceeds it.  Outcomes
    with zero probability are never drawn.
    """
    p = np.asarray(probabilities, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise DistributionError("probabilities must be a nonempty 1-D array")
    if np.any(p < -1e-12) or not np.all(np.isfinite(p)):
        raise DistributionError("probabilities must be finite and nonnegative")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise DistributionError(f"probabilities sum to {total!r}, not 1")
    if int(shots) < 1:
        raise ValueError("shots must be positive")
    p = np.clip(p, 0.0, None)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    u = uniform_draws(int(shots), seed)
    outcomes = np.searchsorted(cdf, u, side="right")
    counts = np.bincount(outcomes, minlength=p.size).astype(np.int64)
    return Histogram(counts=counts, shots=int(shots), seed=int(seed))
