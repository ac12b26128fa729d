"""
Where is -Delta + cK essentially self-adjoint?
==============================================

On the alpha-Grushin cylinder (f = |x|^alpha) the mode-0 potential is
k/x^2 with k = ((1 - 4c) alpha^2 + (2 - 4c) alpha) / 4, so the operator is
essentially self-adjoint exactly when k >= 3/4. The region is drawn as text
and written to CSV.
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from grushinlab.grushin_spectral import alpha_boundaries, classify_alpha_grushin, region_map, \
    region_map_by_rule, write_region_csv

for c in (0.0, 0.2, 0.25, 2 - np.sqrt(3), 0.3, 1.0):
    b = alpha_boundaries(c)
    if b is None:
        print(f"c = {c:.4f}: no real boundary, k < 3/4 for every alpha")
    else:
        print(f"c = {c:.4f}: boundaries {b.upper:+.4f}, {b.lower:+.4f}  degenerate={b.degenerate}")

print(classify_alpha_grushin(1, 0).to_dict())
print(classify_alpha_grushin(1, 0.2).to_dict())

grid = region_map((-5, 8), (0, 4.2), (1300, 420))
print("agreement with the case list:", bool(np.all(grid.esa == region_map_by_rule(grid))))

# coarse picture: rows c from 4.2 down to 0, columns alpha from -5 to 8
small = region_map((-5, 8), (0, 4.2), (66, 22))
for i in range(small.c.size - 1, -1, -1):
    print(f"{small.c[i]:4.1f} " + "".join("#" if e else "." for e in small.esa[i]))
print("     alpha = -5" + " " * 50 + "8")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp()) / "map.csv"
write_region_csv(grid, out)
print("wrote", out)
