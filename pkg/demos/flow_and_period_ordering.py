"""Gradient flow from a strip, and how the period of the microstructure matters.

Each preset starts from a strip of +1 on -1 < x1 < 1 in a periodic box of
side 4 and runs 100 semi-implicit steps at eps = 0.025.  The two flat
interfaces cost about c_hom = 2 sqrt(2)/3 each per unit length, so the normalized
energy of the homogeneous run settles near 4 sqrt(2)/3 = 1.886.

With the hexagonal weight the picture depends on delta.  A coarse period
lets the interfaces find the low-weight valleys, so the energy drops
well below the homogeneous value.  A fine period is averaged out and the
energy approaches the homogeneous one.  In between there is no ordering:
at delta = 0.2 the energy after 100 steps is above the homogeneous value.

This takes about ten seconds.

Run:  python demos/flow_and_period_ordering.py
"""
import warnings

from pfh import parse_config, preset, run_flow
from pfh.energy import ResolutionWarning

warnings.simplefilter("ignore", ResolutionWarning)  # n=256 is slightly under-resolved at eps=0.025


def terminal(name, delta=0.1):
    cfg = parse_config(preset(name, delta=delta)).target
    return run_flow(cfg).trace.normalized[-1]


hom = terminal("homogeneous")
print(f"homogeneous          {hom:.5f}")
for delta in (0.4, 0.2, 0.1, 0.05, 0.025):
    e = terminal("hex", delta)
    print(f"hex  delta={delta:<6}   {e:.5f}   ({(e - hom) / hom:+.2%} against homogeneous)")
print(f"wells delta=0.1      {terminal('wells'):.5f}")
