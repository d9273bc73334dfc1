"""Amplitude encoding of real unit vectors and the index-controlled QRAM block.

A length-``d`` real unit vector is loaded by a binary tree of y-rotations.
The root splits the vector into halves and rotates the most significant data
qubit by ``2*atan2(|right|, |left|)``; every deeper node repeats the split on
its subvector, controlled on the path that leads to it.  The leaves act on
adjacent amplitude pairs ``(a, b)`` and use the signed ``2*atan2(b, a)``, which
is how negative components enter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LayoutError, NormalizationError, SizeError
from .statevec import RY, X, GateOp

NORM_TOL = 1e-9


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _log2(n: int) -> int:
    return n.bit_length() - 1


class VectorSet:
    """``N`` real unit vectors of dimension ``d``, stored as an ``(N, d)`` array.

    Rows are normalized on ingestion.  Both ``N`` and ``d`` must be powers of
    two and at least 2.
    """

    def __init__(self, rows, normalize: bool = True):
        arr = np.asarray(rows)
        if np.iscomplexobj(arr):
            if np.any(np.imag(arr) != 0):
                raise ValueError("complex-valued vectors cannot be loaded by RY rotations")
            arr = np.real(arr)
        arr = np.array(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise SizeError("vector set must be a 2-D array of rows")
        N, d = arr.shape
        if N < 2 or not _is_power_of_two(N):
            raise SizeError(f"N must be a power of two >= 2, got {N}")
        if d < 2 or not _is_power_of_two(d):
            raise SizeError(f"d must be a power of two >= 2, got {d}")
        if not np.all(np.isfinite(arr)):
            raise NormalizationError("vector components must be finite")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(norms == 0):
            raise NormalizationError(f"row {int(np.argmin(norms))} has zero norm")
        off = np.abs(norms - 1.0) > NORM_TOL
        if np.any(off):
            if not normalize:
                raise NormalizationError(f"row {int(np.argmax(off))} is not unit norm")
            arr = arr / norms[:, None]
        self.rows = arr
        self.rows.setflags(write=False)

    @classmethod
    def from_angles(cls, angle_rows) -> "VectorSet":
        """Build the set from per-vector flattened angle trees (root first)."""
        rows = []
        for angles in angle_rows:
            angles = np.atleast_1d(np.asarray(angles, dtype=float))
            d = len(angles) + 1
            rows.append(AngleTree.from_flat(angles, d).vector())
        return cls(rows)

    @property
    def N(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.N

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorSet):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)

    def __repr__(self) -> str:
        return f"VectorSet(N={self.N}, d={self.d})"


@dataclass(frozen=True)
class AngleTree:
    """Rotation angles of a state-preparation tree.

    ``levels[l]`` holds the ``2**l`` angles of depth ``l``; node ``t`` at
    depth ``l`` handles the subvector whose ``l`` leading index bits spell
    ``t``.
    """

    levels: tuple[np.ndarray, ...]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def dim(self) -> int:
        return 1 << self.depth

    def flat(self) -> np.ndarray:
        return np.concatenate(self.levels)

    @classmethod
    def from_flat(cls, angles, d: int) -> "AngleTree":
        angles = np.asarray(angles, dtype=float)
        if not _is_power_of_two(d) or d < 2 or angles.size != d - 1:
            raise LayoutError(f"{angles.size} angles do not form a tree for d={d}")
        levels, start = [], 0
        for l in range(_log2(d)):
            levels.append(angles[start:start + (1 << l)].copy())
            start += 1 << l
        return cls(tuple(levels))

    def vector(self) -> np.ndarray:
        """Amplitudes the tree prepares from |0...0>; evaluated classically."""
        amps = np.ones(1)
        for level in self.levels:
            c, s = np.cos(level / 2.0), np.sin(level / 2.0)
            amps = np.stack([amps * c, amps * s], axis=1).reshape(-1)
        return amps


def angles_from_vector(v) -> AngleTree:
    v = np.asarray(v, dtype=float)
    d = v.size
    if v.ndim != 1 or d < 2 or not _is_power_of_two(d):
        raise LayoutError(f"vector length must be a power of two >= 2, got {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
        raise NormalizationError(f"vector norm {np.linalg.norm(v)!r} is not 1")
    depth = _log2(d)
    levels = []
    for l in range(depth - 1):
        blocks = v.reshape(1 << (l + 1), -1)
        norms = np.linalg.norm(blocks, axis=1).reshape(-1, 2)
        levels.append(2.0 * np.arctan2(norms[:, 1], norms[:, 0]))
    pairs = v.reshape(-1, 2)
    leaf = 2.0 * np.arctan2(pairs[:, 1], pairs[:, 0])
    leaf[np.hypot(pairs[:, 0], pairs[:, 1]) == 0.0] = 0.0
    levels.append(leaf)
    return AngleTree(tuple(levels))


def stateprep_ops(tree: AngleTree, data_qubits: Sequence[int], extra_controls=()) -> list[GateOp]:
    """Gates preparing ``tree.vector()`` on ``data_qubits``.

    ``data_qubits[j]`` carries bit ``j`` of the amplitude index (least
    significant first).  Every gate also carries ``extra_controls``.
    """
    data_qubits = list(data_qubits)
    if len(data_qubits) != tree.depth:
        raise LayoutError(f"tree of depth {tree.depth} needs {tree.depth} data qubits, got {len(data_qubits)}")
    extra = tuple(extra_controls)
    ops = []
    msb_first = data_qubits[::-1]
    for l, level in enumerate(tree.levels):
        target = msb_first[l]
        path = msb_first[:l]
        for t, theta in enumerate(level):
            bits = [(t >> (l - 1 - j)) & 1 for j in range(l)]
            ops.append(RY(theta, target, extra + tuple(zip(path, bits))))
    return ops


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit positions of the index, data and mean registers.

    Index qubits occupy positions ``0..n-1``, data qubits ``n..n+m-1`` and
    mean qubits ``n+m..n+2m-1``; within each register the lowest position is
    the least significant bit.  The top data qubit is the shift qubit ``d_m``
    that moves every loaded vector into basis window ``[d, 2d-1]``.
    """

    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 2:
            raise LayoutError(f"need n >= 1 and m >= 2, got n={self.n}, m={self.m}")

    @classmethod
    def for_set(cls, vs: VectorSet) -> "RegisterLayout":
        return cls(n=_log2(vs.N), m=_log2(vs.d) + 1)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def d(self) -> int:
        return 1 << (self.m - 1)

    @property
    def num_qubits(self) -> int:
        return self.n + 2 * self.m

    @property
    def index(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def data(self) -> tuple[int, ...]:
        return tuple(range(self.n, self.n + self.m))

    @property
    def mean(self) -> tuple[int, ...]:
        return tuple(range(self.n + self.m, self.n + 2 * self.m))

    @property
    def shift_qubit(self) -> int:
        return self.data[-1]

    def basis_index(self, index: int, data: int, mean: int) -> int:
        return index | (data << self.n) | (mean << (self.n + self.m))

    def check(self, vs: VectorSet) -> None:
        if (self.N, self.d) != (vs.N, vs.d):
            raise LayoutError(f"layout for N={self.N}, d={self.d} does not fit {vs!r}")


def index_controls(layout: RegisterLayout, i: int) -> tuple[tuple[int, int], ...]:
    """Controls on every index qubit whose values spell ``i``."""
    return tuple((q, (i >> j) & 1) for j, q in enumerate(layout.index))


def qram_ops(vs: VectorSet, layout: RegisterLayout) -> list[GateOp]:
    """The QRAM block: X on the shift qubit, then one controlled load per row."""
    layout.check(vs)
    ops = [X(layout.shift_qubit)]
    value_qubits = layout.data[:-1]
    for i, row in enumerate(vs.rows):
        ops.extend(stateprep_ops(angles_from_vector(row), value_qubits, index_controls(layout, i)))
    return ops
