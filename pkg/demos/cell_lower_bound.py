"""Comparing the oscillating energy against its homogenized lower bound, cell by cell.

On cells of side delta the inhomogeneous energy of a field u is at least
the homogenized energy, minus a penalty of order (delta/eps)^2 / alpha,
minus a compatibility term measuring how far the cell integrals of
W(x, <u>) sit from W_hom(<u>).  All constants are measured on the field
itself (Poincare ratio per cell, Lipschitz moments of W), so the slack
printed below must be non-negative.  Note how the compatibility term
depends on where W is sampled inside each pixel.

Run:  python demos/cell_lower_bound.py
"""
import numpy as np

from pfh import GridSpec, HexWeight, ScalarField, homogenize
from pfh.energy import CellPartition, compatibility_gap, homogenization_lower_bound

eps, delta = 0.025, 0.05
g = GridSpec(256, L=3.2, origin=-1.6)
x = g.coords()[0]
u = ScalarField(g, np.tanh((0.8 - np.abs(x)) / (np.sqrt(2) * eps)))
spec = HexWeight(delta=delta)
W = homogenize(spec)
part = CellPartition(g, delta)

for pts in ("midpoint", "nodes"):
    print(f"compatibility gap, {pts:>8} samples: {compatibility_gap(spec, W, part, points=pts):.3e}")

for alpha in (0.5, 1.0, 2.0, 4.0):
    r = homogenization_lower_bound(u, eps, delta, alpha, spec, W, part)
    print(f"alpha={alpha:<4} lhs={r.lhs:.5f}  rhs={r.rhs:+.5f}  slack={r.slack:.4f}  worst cell slack={r.min_cell_slack:.2e}")
