"""
Quantum confinement, one mode at a time
=======================================

Heat started away from the singular set leaks through x = 0 only when the
mode potential k/x^2 is limit circle (k < 3/4) and the boundary condition
keeps the psi_- component. With k >= 3/4 there is nothing to choose: the
flux at 0 vanishes and a Schroedinger packet bounces back.
"""

import numpy as np

from grushinlab.evolution import (
    DICHOTOMY_CONDITIONS,
    DICHOTOMY_STRENGTHS,
    BoundaryCondition,
    dichotomy_case,
    eigenmode,
    evolution_grid,
    schrodinger_evolve,
    wave_packet,
)
from grushinlab.grids import ModeField
from grushinlab.sturm1d import Potential1D

print("   k  condition   max relative flux  verdict")
for k in DICHOTOMY_STRENGTHS:
    for bc in DICHOTOMY_CONDITIONS:
        rep = dichotomy_case(k, bc)
        print(f"{k:4.2f}  {bc:10s}  {rep['max_relative_flux']:17.2e}  {rep['verdict']}")

# a packet moving toward 0 in the critical potential k = 3/4
x = evolution_grid()
run = schrodinger_evolve(Potential1D.inverse_square(0.75), ModeField(x, wave_packet(x, 1.0, 0.15, -8.0)),
                         BoundaryCondition.parse("friedrichs"), 1e-4, 0.25, stride=250)
for t, f in zip(run.times, run.fields):
    d = np.abs(f.values) ** 2
    near = x <= 0.05
    print(f"t = {t:.3f}: <x> = {np.trapezoid(x * d, x):.3f}, "
          f"P(x < 0.05) = {np.trapezoid(d[near], x[near]):.1e}")
print("norm drift:", np.ptp(run.norms()))

# lowest eigenvalues of two realizations of the free operator on (0, 4)
for bc in ("friedrichs", "mix:1.0"):
    lam, _ = eigenmode(Potential1D.inverse_square(0.0), BoundaryCondition.parse(bc))
    print(f"k = 0, {bc}: lowest eigenvalue {lam:.6f}")
