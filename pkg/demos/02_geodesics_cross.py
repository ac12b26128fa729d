"""
Geodesics cross the singular set
================================

Sixteen unit-energy rays leave (-1/2, 0) on the Grushin cylinder. Those
heading right pass through x = 0 without stalling, although the metric is
infinite there. The fan is written as CSV files plus a gnuplot script.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from grushinlab.geodesics import figure1_scenario, write_figure1

rays = figure1_scenario(16)
for r, tr in enumerate(rays):
    x, y, px, py = tr.states[-1]
    crossed = "crossed" if tr.states[:, 0].max() > 0 else "       "
    print(f"ray {r:2d}: p(0) = ({tr.states[0, 2]:+.3f}, {tr.states[0, 3]:+.3f})  {crossed}  "
          f"end = ({x:+.4f}, {np.mod(y, 2 * np.pi):.4f})  drift = {tr.energy_drift:.1e}")

# the p_y = 0 ray is a straight line at unit speed: it ends at x = -1/2 + 1.3
print("horizontal ray ends at x =", rays[0].final.x)

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
write_figure1(rays, out)
print("wrote", out / "figure1.gp")
