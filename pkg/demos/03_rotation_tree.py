"""
Preparing a real unit vector with a rotation tree
=================================================

A d-dimensional vector needs d-1 RY angles.  The root splits the weight
between the two halves, leaves carry the signs.
"""
import numpy as np

from qmean import Circuit, angles_from_vector, run, stateprep_ops

v = np.array([0.5, -0.1, 0.0, 0.3, -0.6, 0.2, 0.4, 0.3])
v /= np.linalg.norm(v)

tree = angles_from_vector(v)
for level, angles in enumerate(tree.levels):
    print(f"level {level}:", np.round(angles, 4))

# the tree can be evaluated classically ...
print("classical:", np.round(tree.vector(), 6))

# ... or turned into controlled rotations and simulated
ops = stateprep_ops(tree, [0, 1, 2])
for op in ops:
    print(" ", op.kind, op.target, op.controls, round(op.angle, 4))
amps = run(Circuit(3, ops)).amps
print("simulated:", np.round(amps.real, 6))
print("max error:", np.max(np.abs(amps - v)))
