"""Curvature Laplacian -Delta + cK near the singular set of a Grushin-type structure.

Two routes are covered:

* the alpha-Grushin cylinder f = x^alpha, where the mode-0 potential is
  k(alpha, c)/x^2 and essential self-adjointness reduces to k >= 3/4;
* general f = x e^phi, where U psi = (x e^phi)^(-1/2) psi turns -Delta + cK into
  H_c + eta_c with an inverse-square leading term g2/x^2, g2 = 3/4 - 2c,
  and Frobenius witnesses show non-self-adjointness for c in (0, 1/2).
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import io
from .errors import InconclusiveError, ModeCouplingError, ParameterError
from .frames import GRUSHIN, FrameProfile, gauss_curvature, laplacian_grid
from .grids import FIT_WINDOW, X_MIN, Field2D, fit_power_law, inner_product, log_grid, y_grid
from .sturm1d import BOUNDED, CONFINING, FrobeniusPair, Potential1D, frobenius_solutions

SQRT3 = math.sqrt(3.0)
C_DOUBLE_LOW = 2.0 - SQRT3
C_DOUBLE_HIGH = 2.0 + SQRT3
EPSILON_DEFAULT = 0.1
CLOSURE_EXPONENT = 1.5
CLOSURE_MARGIN = 0.01


# --------------------------------------------------------------------------- alpha-Grushin


def k_strength(alpha, c):
    """k(alpha, c) = ((1 - 4c) alpha^2 + (2 - 4c) alpha) / 4."""
    return ((1.0 - 4.0 * c) * alpha**2 + (2.0 - 4.0 * c) * alpha) / 4.0


class AlphaBoundaries(NamedTuple):
    upper: float
    lower: float
    degenerate: bool = False


def _reduced_discriminant(c: float) -> float:
    # (c - 2)^2 - 3 in factored form; exact zero at the double-root parameters
    d = (c - C_DOUBLE_LOW) * (c - C_DOUBLE_HIGH)
    return 0.0 if abs(d) < 1e-14 else d


def alpha_boundaries(c: float) -> AlphaBoundaries | None:
    """Real roots of (1 - 4c) a^2 + (2 - 4c) a - 3 = 0, largest first.

    None when the discriminant 16((c-2)^2 - 3) is negative. At c = 1/4 the
    equation is linear with single root 3, returned as (3, inf, degenerate).
    """
    if c < 0:
        raise ParameterError("c must be non-negative")
    a, b = 1.0 - 4.0 * c, 2.0 - 4.0 * c
    if a == 0.0:
        return AlphaBoundaries(3.0, math.inf, True)
    d = _reduced_discriminant(c)
    if d < 0:
        return None
    # stable quadratic formula: q = -(b + sign(b) sqrt(disc)) / 2, roots q/a and -3/q
    root = 4.0 * math.sqrt(d)
    q = -0.5 * (b + math.copysign(root, b))
    r1 = q / a
    r2 = -3.0 / q if q != 0 else r1
    return AlphaBoundaries(max(r1, r2), min(r1, r2))


def alpha_boundaries_closed_form(c: float):
    """The closed form [(1 - 2c) +- 2 sqrt((c-2+sqrt3)(c-2-sqrt3))] / (4c - 1).

    Returns the pair in the order of the +- sign; for c < 1/4 the "+" root is
    the smaller one.
    """
    d = (c - 2.0 + SQRT3) * (c - 2.0 - SQRT3)
    if d < 0 or c == 0.25:
        return None
    s = 2.0 * math.sqrt(d)
    return ((1.0 - 2.0 * c) + s) / (4.0 * c - 1.0), ((1.0 - 2.0 * c) - s) / (4.0 * c - 1.0)


class Rule(enum.IntEnum):
    BELOW_QUARTER = 0  # 0 <= c < 1/4: alpha >= upper or alpha <= lower
    QUARTER_EXACTLY = 1  # c = 1/4: alpha >= 3
    QUARTER_TO_LEFT = 2  # 1/4 < c <= 2 - sqrt3: lower <= alpha <= upper
    COMPLEX_BAND = 3  # 2 - sqrt3 < c < 2 + sqrt3: never
    ABOVE_RIGHT = 4  # c >= 2 + sqrt3: lower <= alpha <= upper

    @property
    def label(self) -> str:
        return ("BelowQuarter", "QuarterExactly", "QuarterToLeft", "ComplexBand", "AboveRight")[self]


def rule_for(c: float) -> Rule:
    if c < 0:
        raise ParameterError("c must be non-negative")
    if c < 0.25:
        return Rule.BELOW_QUARTER
    if c == 0.25:
        return Rule.QUARTER_EXACTLY
    if c <= C_DOUBLE_LOW:
        return Rule.QUARTER_TO_LEFT
    if c < C_DOUBLE_HIGH:
        return Rule.COMPLEX_BAND
    return Rule.ABOVE_RIGHT


def esa_by_rule(alpha, c: float):
    """Essential self-adjointness from the case list and alpha_boundaries only."""
    alpha = np.asarray(alpha, dtype=float)
    rule = rule_for(c)
    if rule == Rule.COMPLEX_BAND:
        return np.zeros(alpha.shape, dtype=bool)
    if rule == Rule.QUARTER_EXACTLY:
        return alpha >= 3.0
    hi, lo, _ = alpha_boundaries(c)
    if rule == Rule.BELOW_QUARTER:
        return (alpha >= hi) | (alpha <= lo)
    return (alpha >= lo) & (alpha <= hi)


@dataclass(frozen=True)
class RegionVerdict:
    alpha: float
    c: float
    k_strength: float
    essentially_self_adjoint: bool
    rule: Rule

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c": self.c,
            "k": self.k_strength,
            "esa": self.essentially_self_adjoint,
            "rule": self.rule.label,
        }


def classify_alpha_grushin(alpha: float, c: float) -> RegionVerdict:
    """-Delta_alpha + cK_alpha is e.s.a. iff its mode-0 potential k/x^2 has k >= 3/4."""
    k = float(k_strength(alpha, c))
    return RegionVerdict(float(alpha), float(c), k, k >= 0.75, rule_for(c))


@dataclass
class RegionGrid:
    """Verdicts on the nodes alpha[j], c[i]; arrays are indexed [i, j] (row = c)."""

    alpha: np.ndarray
    c: np.ndarray
    k: np.ndarray
    esa: np.ndarray
    rule: np.ndarray

    def verdict(self, i: int, j: int) -> RegionVerdict:
        return RegionVerdict(float(self.alpha[j]), float(self.c[i]), float(self.k[i, j]),
                             bool(self.esa[i, j]), Rule(int(self.rule[i, j])))

    def columns(self):
        """Row-major flattening: c outer, alpha inner."""
        A, C = np.meshgrid(self.alpha, self.c)
        return A.ravel(), C.ravel(), self.k.ravel(), self.esa.ravel(), self.rule.ravel()


def _thread_count() -> int:
    raw = os.environ.get("GRUSHINLAB_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, min(n, os.cpu_count() or 1))


def region_map(alpha_range=(-5.0, 8.0), c_range=(0.0, 4.2), resolution=(1300, 420)) -> RegionGrid:
    """Classify every node of an inclusive alpha x c lattice.

    Rows are split into chunks and may be processed in a thread pool
    (GRUSHINLAB_THREADS); the result does not depend on the schedule.
    """
    na, nc = resolution
    if na < 2 or nc < 2:
        raise ParameterError("resolution must be at least 2 x 2")
    alpha = np.linspace(alpha_range[0], alpha_range[1], na)
    c = np.linspace(c_range[0], c_range[1], nc)
    if c[0] < 0:
        raise ParameterError("c must be non-negative")
    k = np.empty((nc, na))
    esa = np.empty((nc, na), dtype=bool)
    rule = np.empty((nc, na), dtype=np.int8)

    def work(rows):
        cc = c[rows][:, None]
        k[rows] = k_strength(alpha[None, :], cc)
        esa[rows] = k[rows] >= 0.75
        rule[rows] = np.array([rule_for(v) for v in c[rows]], dtype=np.int8)[:, None]

    chunks = np.array_split(np.arange(nc), min(nc, 4 * _thread_count()))
    threads = _thread_count()
    if threads == 1:
        for ch in chunks:
            work(ch)
    else:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, chunks))
    return RegionGrid(alpha, c, k, esa, rule)


def region_map_by_rule(grid: RegionGrid) -> np.ndarray:
    """Independent verdicts for the same lattice from the case list."""
    return np.vstack([esa_by_rule(grid.alpha, float(cv)) for cv in grid.c])


def write_region_csv(grid: RegionGrid, path):
    a, c, k, esa, rule = grid.columns()
    labels = np.array([r.label for r in Rule])[rule]
    return io.write_csv(path, ["alpha", "c", "k", "esa", "rule"], [a, c, k, esa.astype(int), labels])


# --------------------------------------------------------------------------- transformed operator


@dataclass(frozen=True)
class CurvatureLaplacianSpec:
    profile: FrameProfile
    c: float

    def __post_init__(self):
        if self.c < 0:
            raise ParameterError("c must be non-negative")

    def require_witness_range(self):
        if not (0.0 < self.c < 0.5):
            raise ParameterError(f"c = {self.c} outside (0, 1/2)")
        if self.profile.kind != GRUSHIN:
            raise ParameterError("witness pipeline needs a Grushin-kind profile")


class _SidePhi:
    """phi seen from one side of Z, in the distance variable s = |x|."""

    def __init__(self, phi, side: str):
        if side not in ("plus", "minus"):
            raise ParameterError(f"side must be 'plus' or 'minus', got {side!r}")
        self.phi = phi
        self.sigma = 1.0 if side == "plus" else -1.0

    def __call__(self, s, y):
        return self.phi(self.sigma * np.asarray(s, float), y)

    def dx(self, s, y):
        return self.sigma * self.phi.dx(self.sigma * np.asarray(s, float), y)

    def dxx(self, s, y):
        return self.phi.dxx(self.sigma * np.asarray(s, float), y)

    def dy(self, s, y):
        return self.phi.dy(self.sigma * np.asarray(s, float), y)

    def dyy(self, s, y):
        return self.phi.dyy(self.sigma * np.asarray(s, float), y)


@dataclass
class TransformedOperator:
    """U(-Delta + cK)U^-1 = H_c + eta_c on one side of Z, written as

        -d^2/ds^2 - a_yy d^2/dy^2 - a_y d/dy + V(s, y),

    a_yy = s^2 e^{2phi}, a_y = 2 s^2 e^{2phi} phi_y, and
    V = g2/s^2 + ((1-4c)/2) phi_s/s + eta_c with
    eta_c = (1/4 - c) phi_s^2 + (c - 1/2) phi_ss - (3/4) s^2 phi_y^2 e^{2phi} - (1/2) s^2 phi_yy e^{2phi}.
    """

    spec: CurvatureLaplacianSpec
    side: str = "plus"
    phi: _SidePhi = field(init=False, repr=False)

    def __post_init__(self):
        self.phi = _SidePhi(self.spec.profile.phi, self.side)

    @property
    def c(self) -> float:
        return self.spec.c

    @property
    def g2(self) -> float:
        return 0.75 - 2.0 * self.c

    def g1_of_y(self, y):
        y = np.asarray(y, dtype=float)
        return (1.0 - 4.0 * self.c) / 2.0 * self.phi.dx(np.zeros_like(y), y)

    def eta_c(self, s, y):
        p = self.phi
        e2 = np.exp(2.0 * p(s, y))
        c = self.c
        return ((0.25 - c) * p.dx(s, y) ** 2 + (c - 0.5) * p.dxx(s, y)
                - 0.75 * s**2 * p.dy(s, y) ** 2 * e2 - 0.5 * s**2 * p.dyy(s, y) * e2)

    def coefficients(self, s, y):
        """(a_yy, a_y, V) at the points (s, y), s > 0."""
        s, y = np.broadcast_arrays(np.asarray(s, float), np.asarray(y, float))
        e2 = np.exp(2.0 * self.phi(s, y))
        a_yy = s**2 * e2
        a_y = 2.0 * s**2 * e2 * self.phi.dy(s, y)
        V = self.g2 / s**2 + (1.0 - 4.0 * self.c) / 2.0 * self.phi.dx(s, y) / s + self.eta_c(s, y)
        return a_yy, a_y, V

    def apply_exact(self, s, y, u, u_s, u_ss, u_y, u_yy):
        """The operator applied to u given its exact partial derivatives."""
        a_yy, a_y, V = self.coefficients(s, y)
        return -u_ss - a_yy * u_yy - a_y * u_y + V * u

    def mode_potential(self, m: int) -> Potential1D:
        """Potential of Fourier mode m; only for y-independent phi."""
        if not self.spec.profile.phi.y_independent:
            raise ModeCouplingError("Fourier modes couple when phi depends on y")
        p, c, m2 = self.phi, self.c, float(m) ** 2
        g1 = float(self.g1_of_y(0.0))
        half = (1.0 - 4.0 * c) / 2.0
        phix0 = float(p.dx(0.0, 0.0))

        def regular(s):
            s = np.asarray(s, dtype=float)
            return (half * (p.dx(s, 0.0) - phix0) / s + self.eta_c(s, 0.0)
                    + m2 * s**2 * np.exp(2.0 * p(s, 0.0)))

        return Potential1D(self.g2, g1, regular, CONFINING if m else BOUNDED,
                           name=f"mode {m}, c={c:g}")


def transform_operator(spec: CurvatureLaplacianSpec, side: str = "plus") -> TransformedOperator:
    spec.require_witness_range()
    return TransformedOperator(spec, side)


def conjugation_errors(spec: CurvatureLaplacianSpec, sizes=(40, 80, 160)):
    """Max error of x^(-1/2) e^(-phi/2) (-Delta_h + cK)(x^(1/2) e^(phi/2) u) against
    (H_c + eta_c) u with exact derivatives, on [0.5, 1.5] x S^1, for n x 2n grids.

    Returns (errors, observed orders).
    """
    op = transform_operator(spec)
    prof = spec.profile
    errors = []
    for n in sizes:
        xs = np.linspace(0.5, 1.5, n + 1)
        ys = y_grid(2 * n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        g = np.exp(-8.0 * (X - 1.0) ** 2)
        g_x = -16.0 * (X - 1.0) * g
        g_xx = (256.0 * (X - 1.0) ** 2 - 16.0) * g
        h = 1.0 + 0.5 * np.sin(Y) + 0.2 * np.cos(2 * Y)
        h_y = 0.5 * np.cos(Y) - 0.4 * np.sin(2 * Y)
        h_yy = -0.5 * np.sin(Y) - 0.8 * np.cos(2 * Y)
        u = g * h
        root = np.sqrt(np.abs(prof.f(X, Y)))
        v = Field2D(xs, ys, root * u)
        lap = laplacian_grid(prof, v)
        conj = (-lap + spec.c * gauss_curvature(prof, X, Y) * v.values) / root
        exact = op.apply_exact(X, Y, u, g_x * h, g_xx * h, g * h_y, g * h_yy)
        errors.append(float(np.max(np.abs(conj[1:-1] - exact[1:-1]))))
    errors = np.array(errors)
    orders = np.log2(errors[:-1] / errors[1:]) if len(sizes) > 1 else np.array([])
    return errors, orders


# --------------------------------------------------------------------------- witnesses


def cutoff(x, epsilon: float):
    """P_eps: 1 on (0, eps/2], 0 on [eps, inf), quintic smoothstep in between (C^2)."""
    t = np.clip((np.asarray(x, dtype=float) - 0.5 * epsilon) / (0.5 * epsilon), 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


@dataclass
class WitnessFunction:
    """Samples of the transformed witness psi(s, y) P_eps(s), s = |x| on one side of Z."""

    sign: str
    epsilon: float
    c: float
    samples: Field2D
    alpha_exponent: float
    side: str = "plus"
    log_case: bool = False
    profile: FrameProfile = field(default_factory=FrameProfile.grushin)
    kind: str = "frobenius"

    @property
    def distance(self) -> np.ndarray:
        return self.samples.x

    @property
    def signed_x(self) -> np.ndarray:
        return self.samples.x if self.side == "plus" else -self.samples.x

    def metadata(self) -> dict:
        return {
            "kind": self.kind,
            "sign": self.sign,
            "epsilon": self.epsilon,
            "c": self.c,
            "side": self.side,
            "alpha": self.alpha_exponent,
            "log_case": self.log_case,
            "profile": json.dumps(self.profile.to_config(), sort_keys=True, separators=(",", ":")),
        }


def witness_grid(epsilon: float, x_min: float = X_MIN):
    return log_grid(x_min, epsilon), y_grid(64)


def build_witness(spec: CurvatureLaplacianSpec, sign: str, epsilon: float = EPSILON_DEFAULT,
                  side: str = "plus", x_min: float = X_MIN) -> WitnessFunction:
    """psi_sign(s; g1(y)) P_eps(s) with psi from the two-term Frobenius expansion,
    g2 = 3/4 - 2c and y treated as a parameter."""
    spec.require_witness_range()
    if sign not in ("plus", "minus"):
        raise ParameterError(f"sign must be 'plus' or 'minus', got {sign!r}")
    if not (0.0 < epsilon < spec.profile.x_max):
        raise ParameterError("epsilon must lie in (0, x_max)")
    op = TransformedOperator(spec, side)
    s, ys = witness_grid(epsilon, x_min)
    g1 = op.g1_of_y(ys)
    vals = np.empty((s.size, ys.size))
    pairs: dict[float, FrobeniusPair] = {}
    for j, gv in enumerate(g1):
        fp = pairs.setdefault(float(gv), frobenius_solutions(float(gv), op.g2))
        vals[:, j] = fp.evaluate(sign, s)[0]
    vals *= cutoff(s, epsilon)[:, None]
    fp = next(iter(pairs.values()))
    return WitnessFunction(sign, float(epsilon), float(spec.c), Field2D(s, ys, vals),
                           fp.alpha(sign), side, fp.log_case, spec.profile)


def power_witness(exponent: float, spec: CurvatureLaplacianSpec, epsilon: float = EPSILON_DEFAULT,
                  x_min: float = X_MIN) -> WitnessFunction:
    """s^p P_eps(s), a candidate that is not built from the operator."""
    s, ys = witness_grid(epsilon, x_min)
    vals = np.repeat((s**exponent * cutoff(s, epsilon))[:, None], ys.size, axis=1)
    return WitnessFunction("plus", float(epsilon), float(spec.c), Field2D(s, ys, vals),
                           float(exponent), "plus", False, spec.profile, kind="power")


def witness_exponent(w: WitnessFunction, window=FIT_WINDOW) -> float:
    """Exponent of the mode-0 Fourier component fitted on the window."""
    mode0 = w.samples.fourier_mode(0)
    return fit_power_law(mode0.x, mode0.values, window).exponent


def closure_membership_test(w: WitnessFunction) -> bool:
    """False certifies that w is not in the closure domain (mode 0 not o(x^{3/2}))."""
    if w.samples.x[0] > FIT_WINDOW[0] * (1 + 1e-12):
        raise InconclusiveError("witness must be sampled down to 1e-5 or below")
    return witness_exponent(w) > CLOSURE_EXPONENT + CLOSURE_MARGIN


# weak-form adjoint test: Gaussian bumps in t = log s, times e^{imy}
BUMP_WIDTH = 0.25
BUMP_SPACING = 0.25
ADJOINT_LEVELS = (1e-3, 1e-4, 1e-5)
ADJOINT_MODES = 4


def _bump_basis(t, centers):
    d = (t[None, :] - centers[:, None]) / BUMP_WIDTH
    G = np.exp(-0.5 * d**2)
    Gt = -d / BUMP_WIDTH * G
    Gtt = (d**2 - 1.0) / BUMP_WIDTH**2 * G
    return G, Gt, Gtt


def _trapezoid_weights(t):
    w = np.empty_like(t)
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    return w


def weak_image_norms(w: WitnessFunction, spec: CurvatureLaplacianSpec, levels=ADJOINT_LEVELS,
                     modes: int | None = None) -> np.ndarray:
    """Squared norm of the projection of the distribution A h onto test functions
    supported in (level, eps e), for each level.

    A is the (formally symmetric) transformed operator, so <Phi, A h> = <A Phi, h>
    for test functions Phi vanishing near s = 0; A Phi is evaluated exactly.
    The projection norms increase as the level decreases and converge iff
    A h is square integrable near the singular set.
    """
    op = TransformedOperator(spec, w.side)
    s, ys, h = w.samples.x, w.samples.y, w.samples.values
    if modes is None:
        modes = 0 if (spec.profile.phi.y_independent and np.ptp(h, axis=1).max() == 0) \
            else ADJOINT_MODES
    S, Y = np.meshgrid(s, ys, indexing="ij")
    a_yy, a_y, V = op.coefficients(S, Y)
    t = np.log(s)
    quad_w = _trapezoid_weights(t) * s  # ds = s dt
    dy = 2.0 * np.pi / ys.size
    ms = np.arange(-modes, modes + 1)
    phase = np.exp(-1j * np.outer(ys, ms))  # conj(e^{imy})
    H_m = (h @ phase) * dy  # (ns, nm)
    Q_m = np.stack([((m**2 * a_yy + 1j * m * a_y + V) * h) @ phase[:, k] * dy
                    for k, m in enumerate(ms)], axis=1)
    out = []
    t_top = math.log(w.epsilon) + 3 * BUMP_WIDTH
    for level in levels:
        if level <= s[0] * math.exp(8 * BUMP_WIDTH):
            raise ParameterError(f"level {level} too close to the sampling limit {s[0]}")
        centers = np.arange(math.log(level), t_top + 1e-12, BUMP_SPACING)
        G, Gt, Gtt = _bump_basis(t, centers)
        D = (Gtt - Gt) / s**2  # d^2/ds^2 of G(log s)
        # b[n, m] = integral of conj(A Phi_nm) h = sum_s (-D H_m + G Q_m) ds
        b = (-D * quad_w) @ H_m + (G * quad_w) @ Q_m
        gram = 2.0 * np.pi * (G * quad_w) @ G.T
        evals, evecs = np.linalg.eigh(gram)
        keep = evals > evals.max() * 1e-13
        proj = evecs[:, keep].T @ b
        out.append(float(np.sum(np.abs(proj) ** 2 / evals[keep, None])))
    return np.array(out)


def adjoint_membership_test(w: WitnessFunction, spec: CurvatureLaplacianSpec) -> bool:
    """True iff the weak image norms converge as test functions approach s = 0
    (last two levels within 10%); growth signals A h outside L^2."""
    n = weak_image_norms(w, spec)
    if not np.all(np.isfinite(n)):
        return False
    prev, last = n[-2], n[-1]
    if prev == 0.0:
        return last == 0.0
    return abs(last / prev - 1.0) <= 0.1


# --------------------------------------------------------------------------- gluing


def glue_to_manifold(w: WitnessFunction, chart=None, n_chart: int = 801,
                     untransform: bool = False) -> Field2D:
    """Zero extension of w to the chart [a, b] x S^1.

    The chart grid is uniform outside the witness zone and follows the
    witness samples inside it. With `untransform`, returns U^-1 h = (|x| e^phi)^(1/2) h.
    """
    a, b = chart if chart is not None else (-w.profile.x_max, w.profile.x_max)
    if w.epsilon >= 0.5 * (b - a) or not (a < 0 < b):
        raise ParameterError("chart must contain the witness zone around x = 0")
    xw = w.signed_x
    lo, hi = min(xw[0], xw[-1]), max(xw[0], xw[-1])
    base = np.linspace(a, b, n_chart)
    base = base[(base < min(lo, 0.0)) | (base > max(hi, 0.0))]
    base = np.concatenate([base, [0.0]])
    xs = np.concatenate([base, xw])
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    vals = np.concatenate([np.zeros((base.size, w.samples.y.size)), w.samples.values])[order]
    if untransform:
        X, Y = np.meshgrid(xs, w.samples.y, indexing="ij")
        vals = vals * np.sqrt(np.abs(w.profile.f(X, Y)))
    return Field2D(xs, w.samples.y, vals, {"witness": w.metadata(), "untransform": untransform})


def mode_family(w: WitnessFunction, modes=range(10), **glue_kw) -> list[Field2D]:
    """Glued fields e^{iky} h for k in modes."""
    base = glue_to_manifold(w, **glue_kw)
    return [Field2D(base.x, base.y, base.values * np.exp(1j * k * base.y)[None, :], dict(base.meta))
            for k in modes]


def normalized_gram(fields, weight=None) -> np.ndarray:
    n = len(fields)
    G = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = inner_product(fields[i], fields[j], weight)
    d = np.sqrt(np.real(np.diag(G)))
    return G / np.outer(d, d)


# --------------------------------------------------------------------------- witness files


def write_witness_csv(w: WitnessFunction, path):
    S, Y = np.meshgrid(w.signed_x, w.samples.y, indexing="ij")
    return io.write_csv(path, ["x", "y", "value"], [S.ravel(), Y.ravel(), w.samples.values.ravel()],
                        w.metadata())


def read_witness_csv(path) -> WitnessFunction:
    meta, cols = io.read_csv(path)
    try:
        profile = FrameProfile.from_config(json.loads(meta["profile"]))
        ys = np.unique(cols["y"])
        xs = np.unique(np.abs(cols["x"]))
        vals = np.asarray(cols["value"], dtype=float).reshape(xs.size, ys.size)
        side = meta["side"]
        return WitnessFunction(meta["sign"], float(meta["epsilon"]), float(meta["c"]),
                               Field2D(xs, ys, vals), float(meta["alpha"]), side,
                               meta["log_case"] in ("1", "True", "true"), profile,
                               meta.get("kind", "frobenius"))
    except (KeyError, ValueError) as exc:
        raise ParameterError(f"malformed witness file {path}: {exc}") from exc


def check_witness(w: WitnessFunction) -> dict:
    spec = CurvatureLaplacianSpec(w.profile, w.c)
    return {
        "adjoint_member": adjoint_membership_test(w, spec),
        "closure_member": closure_membership_test(w),
        "alpha_fit": witness_exponent(w),
        "alpha_expected": w.alpha_exponent,
        "weak_image_norms": weak_image_norms(w, spec).tolist(),
    }
