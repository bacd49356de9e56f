"""The invariant suite, and what happens when the projector is built wrong.

    python demos/05_verify.py
"""

import numpy as np

import uplink_isac as ui
from uplink_isac.verify import check_joint_ml

print(ui.verify(seed=0).format())

# Forgetting the Gram inverse gives a matrix that is not a projector unless
# A_r has orthonormal columns; the equivalence check notices.
broken = lambda A: np.eye(A.shape[0]) - A @ A.conj().T
for c in check_joint_ml(np.random.default_rng(0), count=10, projector=broken):
    print(f"{c.name:<28} {'PASS' if c.passed else 'FAIL'}  residual={c.residual:.3g}")
