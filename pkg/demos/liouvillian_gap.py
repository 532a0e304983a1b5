"""Spectrum of the single-mode Liouvillian across a level crossing.

At one lossless sublattice the gap lambda_0 - lambda_1,+ vanishes with
|Delta_q|^2: about 4 |Delta|^2 / gamma at d_z = 0 and gamma |Delta|^2 / (4 d_z^2)
far away.  The closed-form eigenvalues are compared with a dense
eigendecomposition at each point.

    python demos/liouvillian_gap.py
"""

import numpy as np
from scipy import linalg
from scipy.optimize import linear_sum_assignment

from kzlindblad import BlochVector, DissipationConfig
from kzlindblad.liouvillian import assemble, eigenvalues_closed_form, gap_expansion, spectral_gap

d = DissipationConfig(0.5, 0.0)
mod = 0.05
print(f"{'d_z':>6} {'gap':>11} {'expansion':>11} {'max |closed - dense|':>21}")
for dz in np.linspace(-2, 2, 9):
    b = BlochVector(mod, 0.0, dz)
    cf = eigenvalues_closed_form(b, d).values()
    dense = linalg.eigvals(assemble(b, d))
    # match the two sets pairwise before comparing
    cost = np.abs(cf[:, None] - dense[None, :])
    rows, cols = linear_sum_assignment(cost)
    print(f"{dz:6.2f} {spectral_gap(b, d):11.3e} {gap_expansion(b, d):11.3e} {cost[rows, cols].max():21.1e}")
