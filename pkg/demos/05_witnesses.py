"""
Witnesses of non-self-adjointness
=================================

For 0 < c < 1/2 on the Grushin cylinder, the functions
h_+- = psi_+-(x) P_eps(x) (Frobenius solutions times a cutoff) lie in the
domain of the adjoint but not in the closure, so the operator has nonzero
deficiency. Multiplying by e^{iky} gives infinitely many independent ones.
"""

import math

import numpy as np

from grushinlab.frames import FrameProfile, Phi
from grushinlab.grushin_spectral import (
    CurvatureLaplacianSpec,
    adjoint_membership_test,
    build_witness,
    closure_membership_test,
    conjugation_errors,
    mode_family,
    normalized_gram,
    weak_image_norms,
    witness_exponent,
)

spec = CurvatureLaplacianSpec(FrameProfile.grushin(), 0.3)
errors, orders = conjugation_errors(spec)
print("conjugation identity: errors", errors, "orders", orders)

for c in (0.1, 0.3, 0.375, 0.45):
    spec = CurvatureLaplacianSpec(FrameProfile.grushin(), c)
    for sign in ("plus", "minus"):
        w = build_witness(spec, sign)
        print(f"c = {c:5.3f} {sign:5s}: fitted alpha {witness_exponent(w):.6f} "
              f"(expected {0.5 + (1 if sign == 'plus' else -1) * math.sqrt(1 - 2 * c):.6f}), "
              f"adjoint {adjoint_membership_test(w, spec)}, closure {closure_membership_test(w)}")

# the adjoint test: the weak image stays bounded as the test functions approach 0
spec = CurvatureLaplacianSpec(FrameProfile.grushin(Phi.separable(0.4)), 0.3)
w = build_witness(spec, "minus")
print("weak image norms of h_- (bent profile):", weak_image_norms(w, spec))

w = build_witness(CurvatureLaplacianSpec(FrameProfile.grushin(), 0.3), "plus")
sv = np.linalg.svd(normalized_gram(mode_family(w, range(10))), compute_uv=False)
print("singular values of the Gram matrix of 10 modes:", sv.min(), "...", sv.max())
