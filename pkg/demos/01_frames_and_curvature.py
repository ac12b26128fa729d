"""
Metric, curvature and Laplacian from a frame
============================================

A 2-step almost-Riemannian structure is given locally by the frame
X1 = d/dx, X2 = f(x, y) d/dy. On the Grushin cylinder f = x, the metric
blows up on the singular set x = 0 and so does the Gaussian curvature.
"""

import numpy as np

from grushinlab.frames import (
    FrameProfile,
    Phi,
    gauss_curvature,
    laplacian_grid,
    metric,
    singular_set_locate,
    step2_check,
)
from grushinlab.grids import Field2D, y_grid

grushin = FrameProfile.grushin()
for x in (0.5, 0.1, 0.01):
    g = metric(grushin, x, 0.0)
    print(f"x = {x:5.2f}: g22 = {g.g22:10.1f}, K = {gauss_curvature(grushin, x, 0.0):12.1f}")

# K = -2/x^2 for f = x, so cK enters as an inverse-square potential
x = np.geomspace(1e-3, 1, 4)
print("x^2 K, flat cylinder:     ", x**2 * gauss_curvature(grushin, x, 0.0))

# f = x e^phi with phi = 0.4 x sin(y): the leading term is unchanged
bent = FrameProfile.grushin(Phi.separable(0.4))
print("x^2 K, phi = 0.4 x sin y: ", x**2 * gauss_curvature(bent, x, 1.0))
print("2-step on the singular set:", step2_check(bent, y_grid(32)))
print("singular set at y = 1:     ", singular_set_locate(bent, 1.0, (-1, 1.3)))

# the Laplacian of u = x^3 on the flat cylinder is 6x - 3x = 3x
xs = np.linspace(0.2, 1.0, 81)
u = Field2D(xs, y_grid(16), np.repeat((xs**3)[:, None], 16, axis=1))
lap = laplacian_grid(grushin, u)
print("max |Delta x^3 - 3x| on interior nodes:", np.nanmax(np.abs(lap[1:-1, 0] - 3 * xs[1:-1])))
