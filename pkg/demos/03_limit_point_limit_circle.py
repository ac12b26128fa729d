"""
Limit point or limit circle at 0
================================

For -u'' + k/x^2 u the endpoint 0 is limit point exactly when k >= 3/4.
The analytic rule is checked against the ODE itself: both solutions are
integrated down to x = 1e-6 and their decay exponents are fitted.
"""

from grushinlab.sturm1d import (
    Potential1D,
    classify_zero_analytic,
    deficiency_cross_check,
    deficiency_indices,
    frobenius_solutions,
    hardy_check,
    indicial_roots,
    zero_numeric_report,
)

print("    k  analytic        numeric         exponents")
for k in (-2, -0.2, 0, 0.25, 0.5, 0.7, 0.8, 1, 2, 6):
    p = Potential1D.inverse_square(k)
    rep = zero_numeric_report(p)
    ex = ", ".join(f"{e:+.3f}" for e in rep.exponents)
    print(f"{k:5g}  {classify_zero_analytic(p).value:14s}  {rep.verdict.value:14s}  {ex}")

# the Bessel-type operator s_c has k = 3/4 - 2c: limit circle for every c > 0
for c in (0.1, 0.25, 0.4):
    p = Potential1D.bessel(c)
    cc = deficiency_cross_check(p)
    print(f"s_c, c = {c}: indices {deficiency_indices(p).as_tuple()}, "
          f"L^2 solutions of -u'' + Vu = iu near 0: {cc.n_square_integrable}")

# Frobenius pair with a 1/x term: psi = x^a (1 + a_1 x)
fp = frobenius_solutions(1.0, 0.5)
print("roots", indicial_roots(0.5), "first coefficients", fp.a_plus, fp.a_minus)

# Hardy: integral u^2/x^2 <= 4 integral u'^2, the reason 3/4 = 1 - 1/4 is the threshold
import numpy as np

x = np.linspace(0.5, 2.5, 20001)
u = np.where((x > 1) & (x < 2), np.sin(np.pi * (x - 1)), 0.0)
lhs, rhs = hardy_check(x, u)
print(f"Hardy for sin on [1, 2]: {lhs:.4f} <= 4 * {rhs:.4f}")
