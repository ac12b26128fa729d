"""Half-line Sturm-Liouville operators -d^2/dx^2 + V on (0, inf).

V(x) = k/x^2 + g1/x + V_reg(x). The endpoint x = 0 is classified as limit
point / limit circle either by the closed inequality k >= 3/4 or by an
independent numerical oracle that integrates -u'' + V u = 0 toward 0 and
measures the power-law decay of two independent solutions.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    ComplexIndicialError,
    InconclusiveError,
    OutOfRangeError,
    ParameterError,
    UndecidableError,
    UnsupportedPotentialError,
)
from .grids import FIT_RESIDUAL_MAX, FIT_WINDOW, fit_power_law

CRITICAL_STRENGTH = 0.75
BOUNDARY_BAND = 0.02
# |alpha_-(3/4 +- band) + 1/2| for band = 0.02; exponent margin around the L^2 threshold -1/2
EXPONENT_MARGIN = 0.005
X_MIN_NUMERIC = 1e-6
LOG_STEP = 1e-3
BOUNDED = "bounded"
CONFINING = "confining"


class Endpoint(str, enum.Enum):
    LIMIT_POINT = "LimitPoint"
    LIMIT_CIRCLE = "LimitCircle"
    UNDECIDABLE = "BoundaryUndecidable"


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Potential1D:
    """V(x) = k/x^2 + g1/x + V_reg(x) on (0, inf).

    `at_infinity` declares the large-x behaviour used by the analytic
    criterion: "bounded" (V_reg bounded above, C^1) or "confining"
    (V_reg -> +inf at most polynomially, e.g. m^2 x^2 mode terms).
    """

    k: float
    g1: float = 0.0
    regular: Callable = field(default=_zero, compare=False)
    at_infinity: str = BOUNDED
    name: str = ""

    def __post_init__(self):
        xs = np.geomspace(1e-8, 1.0, 200)
        vals = np.asarray(self.regular(xs), dtype=float)
        if not np.all(np.isfinite(vals)) or np.max(np.abs(vals)) > 1e8:
            raise ParameterError("regular part must be bounded on (0, 1]")

    @classmethod
    def inverse_square(cls, k: float, g1: float = 0.0) -> "Potential1D":
        return cls(float(k), float(g1), name=f"k={k:g}, g1={g1:g}")

    @classmethod
    def bessel(cls, c: float) -> "Potential1D":
        """s_c = -d^2/dx^2 + (3/4 - 2c)/x^2."""
        return cls(0.75 - 2.0 * c, 0.0, name=f"s_c, c={c:g}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.k / x**2 + self.g1 / x + self.regular(x)

    def scaled(self, x) -> np.ndarray:
        """x^2 V(x), bounded near 0."""
        x = np.asarray(x, dtype=float)
        return self.k + self.g1 * x + x**2 * self.regular(x)


@dataclass(frozen=True)
class EndpointClassification:
    at_zero: Endpoint
    at_infinity: Endpoint


@dataclass(frozen=True)
class DeficiencyIndices:
    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.n_plus != self.n_minus or self.n_plus not in (0, 1, 2):
            raise ParameterError(f"invalid deficiency indices ({self.n_plus}, {self.n_minus})")

    def as_tuple(self):
        return (self.n_plus, self.n_minus)


# --------------------------------------------------------------------------- analytic criteria


def classify_zero_analytic(p: Potential1D) -> Endpoint:
    """Limit point at 0 iff k >= 3/4 (closed inequality), else limit circle.

    k < 0 is the decreasing case, also limit circle.
    """
    return Endpoint.LIMIT_POINT if p.k >= CRITICAL_STRENGTH else Endpoint.LIMIT_CIRCLE


def classify_infinity_analytic(p: Potential1D) -> Endpoint:
    if p.at_infinity in (BOUNDED, CONFINING):
        return Endpoint.LIMIT_POINT
    raise UnsupportedPotentialError(f"no limit point criterion for behaviour {p.at_infinity!r}")


def infinity_notes(p: Potential1D) -> list[str]:
    if p.at_infinity == CONFINING:
        return ["limit point at infinity assumed for a polynomially growing potential"]
    return []


# --------------------------------------------------------------------------- numeric oracle


def _integrate_to_zero(q, w0, v0, x_min=X_MIN_NUMERIC, step=LOG_STEP):
    """RK4 for w'' = w' + q(t) w in t = log x, from t = 0 down to log(x_min).

    Here w(t) = u(e^t) and q(t) = x^2 (V(x) - lambda). Returns (x, w, v) with
    v = x u'(x). Works for real or complex data.
    """
    n = int(math.ceil(-math.log(x_min) / step))
    h = -math.log(x_min) / n
    ts = -h * np.arange(n + 1)
    qs_full = q(np.exp(-0.5 * h * np.arange(2 * n + 1)))
    ws = np.empty(n + 1, dtype=complex if np.iscomplexobj(qs_full) or isinstance(w0, complex)
                  else float)
    vs = np.empty_like(ws)
    w, v = w0, v0
    ws[0], vs[0] = w, v
    dt = -h
    qs = qs_full.tolist()
    for i in range(n):
        q0, qm, q1 = qs[2 * i], qs[2 * i + 1], qs[2 * i + 2]
        k1w, k1v = v, v + q0 * w
        w2, v2 = w + 0.5 * dt * k1w, v + 0.5 * dt * k1v
        k2w, k2v = v2, v2 + qm * w2
        w3, v3 = w + 0.5 * dt * k2w, v + 0.5 * dt * k2v
        k3w, k3v = v3, v3 + qm * w3
        w4, v4 = w + dt * k3w, v + dt * k3v
        k4w, k4v = v4, v4 + q1 * w4
        w = w + dt / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        ws[i + 1], vs[i + 1] = w, v
    return np.exp(ts), ws, vs


@dataclass
class ExponentFit:
    exponent: float
    residual: float
    method: str


def solution_exponent(x, w, v, q0: float | None = None) -> ExponentFit:
    """Power-law exponent of the amplitude sqrt(|u|^2 + |x u'|^2) near 0.

    A direct log-log fit on [1e-5, 1e-4] is tried first. In the oscillatory
    regime q0 = lim x^2 V < -1/4 the solutions are x^(1/2) times a slow
    oscillation, and the fit uses the Pruefer envelope
    sqrt((x u' - u/2)^2 + nu^2 u^2), nu^2 = -q0 - 1/4, which is free of phase.
    """
    amp = np.sqrt(np.abs(w) ** 2 + np.abs(v) ** 2)
    direct = fit_power_law(x, amp, FIT_WINDOW, check=False)
    if direct.residual <= FIT_RESIDUAL_MAX and (q0 is None or q0 >= -0.25):
        return ExponentFit(direct.exponent, direct.residual, "direct")
    if q0 is not None and q0 < -0.25:
        nu2 = -q0 - 0.25
        env = np.sqrt(np.abs(v - 0.5 * w) ** 2 + nu2 * np.abs(w) ** 2)
        fit = fit_power_law(x, env, FIT_WINDOW, check=False)
        if fit.residual <= FIT_RESIDUAL_MAX:
            return ExponentFit(fit.exponent, fit.residual, "envelope")
        raise InconclusiveError(f"envelope fit residual {fit.residual:.3g}")
    raise InconclusiveError(f"power-law fit residual {direct.residual:.3g} > {FIT_RESIDUAL_MAX}")


def _integrability(exponent: float) -> Endpoint | None:
    """True/False/None for square-integrable / not / undecidable near 0."""
    if exponent > -0.5 + EXPONENT_MARGIN:
        return True
    if exponent < -0.5 - EXPONENT_MARGIN:
        return False
    return None


@dataclass
class NumericZeroReport:
    exponents: tuple
    residuals: tuple
    methods: tuple
    verdict: Endpoint


def zero_numeric_report(p: Potential1D, spectral: complex = 0.0) -> NumericZeroReport:
    """Solve -u'' + (V - spectral) u = 0 from x = 1 toward 0 for the data
    (u, u')(1) = (1, 0) and (0, 1); limit circle iff both are L^2 near 0."""
    if spectral == 0:
        q = p.scaled
    else:
        def q(x):
            return p.scaled(x) - spectral * x**2
    q0 = float(np.real(q(np.array([X_MIN_NUMERIC]))[0]))
    fits = []
    for w0, v0 in ((1.0, 0.0), (0.0, 1.0)):
        if spectral != 0:
            w0, v0 = complex(w0), complex(v0)
        x, w, v = _integrate_to_zero(q, w0, v0)
        fits.append(solution_exponent(x, w, v, q0))
    flags = [_integrability(f.exponent) for f in fits]
    if any(f is False for f in flags):
        verdict = Endpoint.LIMIT_POINT
    elif any(f is None for f in flags):
        verdict = Endpoint.UNDECIDABLE
    else:
        verdict = Endpoint.LIMIT_CIRCLE
    return NumericZeroReport(
        tuple(f.exponent for f in fits),
        tuple(f.residual for f in fits),
        tuple(f.method for f in fits),
        verdict,
    )


def classify_zero_numeric(p: Potential1D) -> Endpoint:
    return zero_numeric_report(p).verdict


# --------------------------------------------------------------------------- deficiency indices


def classify(p: Potential1D, numeric: bool = False) -> EndpointClassification:
    at_zero = classify_zero_numeric(p) if numeric else classify_zero_analytic(p)
    return EndpointClassification(at_zero, classify_infinity_analytic(p))


def deficiency_from_classification(cls: EndpointClassification) -> DeficiencyIndices:
    if Endpoint.UNDECIDABLE in (cls.at_zero, cls.at_infinity):
        raise UndecidableError("endpoint classification is BoundaryUndecidable")
    n = (cls.at_zero == Endpoint.LIMIT_CIRCLE) + (cls.at_infinity == Endpoint.LIMIT_CIRCLE)
    return DeficiencyIndices(n, n)


def deficiency_indices(p: Potential1D, numeric: bool = False) -> DeficiencyIndices:
    """Weyl's table: (0,0) LP at both ends, (1,1) LC at one, (2,2) LC at both."""
    return deficiency_from_classification(classify(p, numeric))


def _far_start(p: Potential1D, spectral: complex, target: float = 30.0, x_cap: float = 200.0):
    """Right endpoint X with integral_1^X Re sqrt(V - spectral) >= target."""
    xs = np.linspace(1.0, x_cap, 20001)
    kappa = np.sqrt(np.asarray(p(xs), dtype=complex) - spectral)
    acc = np.concatenate([[0.0], np.cumsum(0.5 * (kappa.real[1:] + kappa.real[:-1]) * np.diff(xs))])
    idx = np.searchsorted(acc, target)
    return float(xs[min(idx, xs.size - 1)])


def _integrate_inward(p: Potential1D, spectral: complex, x_far: float, h: float = 1e-3):
    """Solution of u'' = (V - spectral) u decaying at infinity, carried from x_far to x = 1."""
    kappa = cmath.sqrt(complex(p(x_far)) - spectral)
    if kappa.real < 0:
        kappa = -kappa
    u, du = 1.0 + 0j, -kappa
    n = int(math.ceil((x_far - 1.0) / h))
    step = -(x_far - 1.0) / n
    xs = x_far + step * np.arange(2 * n + 1) / 2.0
    g = (np.asarray(p(xs), dtype=complex) - spectral).tolist()
    for i in range(n):
        g0, gm, g1 = g[2 * i], g[2 * i + 1], g[2 * i + 2]
        k1u, k1d = du, g0 * u
        k2u, k2d = du + 0.5 * step * k1d, gm * (u + 0.5 * step * k1u)
        k3u, k3d = du + 0.5 * step * k2d, gm * (u + 0.5 * step * k2u)
        k4u, k4d = du + step * k3d, g1 * (u + step * k3u)
        u = u + step / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
        du = du + step / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        scale = abs(u) + abs(du)
        if scale > 1e50:
            u, du = u / scale, du / scale
    scale = abs(u) + abs(du)
    return u / scale, du / scale


@dataclass
class DeficiencyCrossCheck:
    """Counts for -u'' + V u = spectral * u with spectral = +-i.

    `n_square_integrable` is the number (0 or 1) of independent solutions in
    L^2(0, inf): the solution decaying at infinity, tested for square
    integrability at 0. `n_at_zero` counts solutions that are L^2 near 0.
    """

    spectral: complex
    n_square_integrable: int
    n_at_zero: int
    exponent_at_zero: float

    @property
    def weyl_count(self) -> int:
        return self.n_at_zero + 1 - 2


def deficiency_cross_check(p: Potential1D, sign: int = +1) -> DeficiencyCrossCheck:
    """Independent check of the Weyl table by solving (A* -+ i) u = 0."""
    if classify_infinity_analytic(p) != Endpoint.LIMIT_POINT:
        raise UnsupportedPotentialError("cross-check assumes limit point at infinity")
    spectral = 1j if sign > 0 else -1j
    x_far = _far_start(p, spectral)
    u1, du1 = _integrate_inward(p, spectral, x_far)

    def q(x):
        return p.scaled(x) - spectral * x**2

    x, w, v = _integrate_to_zero(q, complex(u1), complex(du1))
    fit = solution_exponent(x, w, v, float(np.real(q(np.array([X_MIN_NUMERIC]))[0])))
    flag = _integrability(fit.exponent)
    if flag is None:
        raise UndecidableError(f"exponent {fit.exponent:.4f} inside the boundary margin")
    report = zero_numeric_report(p, spectral)
    if report.verdict == Endpoint.UNDECIDABLE:
        raise UndecidableError("two-solution count at 0 is undecidable")
    n_zero = 2 if report.verdict == Endpoint.LIMIT_CIRCLE else 1
    return DeficiencyCrossCheck(spectral, int(flag), n_zero, fit.exponent)


# --------------------------------------------------------------------------- Frobenius asymptotics


def indicial_roots(g2: float) -> tuple[float, float]:
    """Roots alpha_+ >= alpha_- of P(alpha) = alpha (alpha - 1) - g2."""
    disc = 4.0 * g2 + 1.0
    if disc < 0:
        raise ComplexIndicialError(f"4 g2 + 1 = {disc} < 0")
    r = 0.5 * math.sqrt(disc)
    return 0.5 + r, 0.5 - r


def indicial_polynomial(alpha, g2):
    return alpha * (alpha - 1.0) - g2


_LOG_TOL = 1e-14


@dataclass(frozen=True)
class FrobeniusPair:
    """Two-term expansions psi_+- of the solutions of -u'' + (g2/x^2 + g1/x) u = 0 near 0."""

    g1: float
    g2: float
    alpha_plus: float
    alpha_minus: float
    a_plus: float | None
    a_minus: float | None
    log_case: bool

    def evaluate(self, sign: str, x):
        """(psi, psi', psi'') at x > 0 for sign in {"plus", "minus"}."""
        x = np.asarray(x, dtype=float)
        g1 = self.g1
        if abs(self.g2) <= _LOG_TOL:
            if sign == "plus":
                return x.copy(), np.ones_like(x), np.zeros_like(x)
            L = np.log(x)
            return 1.0 + g1 * x * L, g1 * (L + 1.0), g1 / x
        if abs(self.g2 + 0.25) <= _LOG_TOL:
            s, L = np.sqrt(x), np.log(x)
            if sign == "plus":
                return (s + g1 * x * s, 0.5 / s + 1.5 * g1 * s,
                        -0.25 / (x * s) + 0.75 * g1 / s)
            val = (1.0 + g1 * x) * s * L + 2.0 * s
            d1 = 0.5 * L / s + 1.0 / s + g1 * (1.5 * s * L + s) + 1.0 / s
            d2 = -0.25 * L / (x * s) + g1 * (0.75 * L / s + 2.0 / s) - 0.5 / (x * s)
            return val, d1, d2
        a, c = (self.alpha_plus, self.a_plus) if sign == "plus" else (self.alpha_minus, self.a_minus)
        p0 = np.power(x, a)
        p1 = p0 * x
        return (
            p0 + c * p1,
            a * p0 / x + c * (a + 1) * p0,
            a * (a - 1) * p0 / x**2 + c * (a + 1) * a * p0 / x,
        )

    def psi_plus(self, x):
        return self.evaluate("plus", x)[0]

    def psi_minus(self, x):
        return self.evaluate("minus", x)[0]

    def alpha(self, sign: str) -> float:
        return self.alpha_plus if sign == "plus" else self.alpha_minus

    def residual(self, sign: str, x):
        """(-d^2/dx^2 + g2/x^2 + g1/x) psi evaluated with exact derivatives."""
        val, _, d2 = self.evaluate(sign, x)
        x = np.asarray(x, dtype=float)
        return -d2 + self.g2 / x**2 * val + self.g1 / x * val


def frobenius_solutions(g1: float, g2: float) -> FrobeniusPair:
    """psi_+- = x^a + a_+- x^(a+1) with a_+- = g1 / ((a+1) a - g2), or the log forms
    psi_+ = x, psi_- = 1 + g1 x log x (g2 = 0) and the double-root forms at g2 = -1/4."""
    if not (-0.25 - _LOG_TOL <= g2 < 0.75):
        raise OutOfRangeError(f"g2 = {g2} outside [-1/4, 3/4)")
    ap, am = indicial_roots(max(g2, -0.25))
    if abs(g2) <= _LOG_TOL or abs(g2 + 0.25) <= _LOG_TOL:
        return FrobeniusPair(g1, 0.0 if abs(g2) <= _LOG_TOL else -0.25, ap, am, None, None, True)
    a_p = g1 / ((ap + 1.0) * ap - g2)
    a_m = g1 / ((am + 1.0) * am - g2)
    return FrobeniusPair(g1, g2, ap, am, a_p, a_m, False)


def asymptotic_pair(k: float, g1: float = 0.0) -> FrobeniusPair:
    """Two-term expansions for any k >= -1/4, extending frobenius_solutions past k = 3/4.

    Above 3/4 the roots differ by more than 1, so the two-term recursion stays regular.
    """
    if k < 0.75:
        return frobenius_solutions(g1, k)
    ap, am = indicial_roots(k)
    return FrobeniusPair(g1, k, ap, am, g1 / ((ap + 1) * ap - k), g1 / ((am + 1) * am - k), False)


# --------------------------------------------------------------------------- Hardy inequality


def hardy_check(x, u) -> tuple[float, float]:
    """(integral of |u|^2 / x^2, integral of |u'|^2) by trapezoid quadrature.

    Hardy: lhs <= 4 rhs for u compactly supported in (0, inf).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u)
    nz = np.nonzero(np.abs(u) > 0)[0]
    if nz.size == 0:
        return 0.0, 0.0
    if np.any(x[nz] <= 0) or nz[0] == 0:
        raise ParameterError("support must stay away from x = 0")
    du = np.gradient(u, x)
    lhs = float(np.trapezoid(np.abs(u) ** 2 / x**2, x))
    rhs = float(np.trapezoid(np.abs(du) ** 2, x))
    return lhs, rhs
