"""Normal-form frames {d/dx, f(x,y) d/dy} of 2-step almost-Riemannian structures.

The frame function is
    Riemannian (F1):  f = exp(phi)
    Grushin (F2):     f = x exp(phi),   phi(0, y) = 0
    alpha-Grushin:    f = x**alpha      (phi ignored)
and the induced metric is g = diag(1, 1/f^2) with area form dx dy / |f|.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import bisect

from . import io
from .errors import DomainError, ParameterError, SingularityError
from .grids import Field2D

Z_TOLERANCE = 1e-8
FD_STEP = 1e-5
FD_STEP_SECOND = 1e-3

RIEMANNIAN = "riemannian"
GRUSHIN = "grushin"
ALPHA_GRUSHIN = "alpha_grushin"
KINDS = (RIEMANNIAN, GRUSHIN, ALPHA_GRUSHIN)


# --------------------------------------------------------------------------- phi catalog


@dataclass(frozen=True)
class Phi:
    """Scalar field phi(x, y) with its first and second partial derivatives.

    Catalog entries (`constant`, `linear`, `separable`) carry hand-coded
    derivatives. `expression` wraps an arbitrary callable and falls back on
    Richardson-extrapolated central differences.
    """

    name: str = "constant"
    beta: float = 0.0
    level: float = 0.0
    func: Callable | None = field(default=None, compare=False)
    source: str | None = None

    # catalog constructors
    @classmethod
    def constant(cls, value: float = 0.0) -> "Phi":
        return cls("constant", level=float(value))

    @classmethod
    def linear(cls, beta: float) -> "Phi":
        return cls("linear", beta=float(beta))

    @classmethod
    def separable(cls, beta: float) -> "Phi":
        return cls("separable", beta=float(beta))

    @classmethod
    def expression(cls, func, source: str | None = None) -> "Phi":
        if isinstance(func, str):
            source = func
            func = _compile_expression(func)
        return cls("expression", func=func, source=source)

    @property
    def y_independent(self) -> bool:
        if self.name in ("constant", "linear"):
            return True
        if self.name == "separable":
            return self.beta == 0.0
        return False

    def __call__(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.name == "constant":
            return np.full(np.broadcast(x, y).shape, self.level)
        if self.name == "linear":
            return self.beta * x + 0.0 * y
        if self.name == "separable":
            return self.beta * x * np.sin(y)
        return np.asarray(self.func(x, y), float)

    def dx(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.name == "constant":
            return np.zeros(np.broadcast(x, y).shape)
        if self.name == "linear":
            return np.full(np.broadcast(x, y).shape, self.beta)
        if self.name == "separable":
            return self.beta * np.sin(y) + 0.0 * x
        return _richardson_first(lambda s: self.func(x + s, y), FD_STEP)

    def dy(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.name in ("constant", "linear"):
            return np.zeros(np.broadcast(x, y).shape)
        if self.name == "separable":
            return self.beta * x * np.cos(y)
        return _richardson_first(lambda s: self.func(x, y + s), FD_STEP)

    def dxx(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.name in ("constant", "linear", "separable"):
            return np.zeros(np.broadcast(x, y).shape)
        return _richardson_second(lambda s: self.func(x + s, y), FD_STEP_SECOND)

    def dyy(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.name in ("constant", "linear"):
            return np.zeros(np.broadcast(x, y).shape)
        if self.name == "separable":
            return -self.beta * x * np.sin(y)
        return _richardson_second(lambda s: self.func(x, y + s), FD_STEP_SECOND)

    def to_config(self) -> dict:
        if self.name == "constant":
            return {"name": "constant", "value": self.level}
        if self.name in ("linear", "separable"):
            return {"name": self.name, "beta": self.beta}
        if self.source is None:
            raise ParameterError("callable phi without source text cannot be serialized")
        return {"name": "expression", "expr": self.source}

    @classmethod
    def from_config(cls, cfg: dict) -> "Phi":
        cfg = dict(cfg)
        name = cfg.pop("name", "constant")
        allowed = {"constant": {"value"}, "linear": {"beta"}, "separable": {"beta"},
                   "expression": {"expr"}}
        if name not in allowed:
            raise ParameterError(f"unknown phi profile {name!r}")
        unknown = set(cfg) - allowed[name]
        if unknown:
            raise ParameterError(f"unknown keys for phi {name!r}: {sorted(unknown)}")
        if name == "constant":
            return cls.constant(cfg.get("value", 0.0))
        if name == "linear":
            return cls.linear(cfg["beta"])
        if name == "separable":
            return cls.separable(cfg["beta"])
        return cls.expression(cfg["expr"])


_EXPR_NAMESPACE = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "sinh", "cosh", "arctan", "pi")
}


def _compile_expression(text: str):
    code = compile(text, "<phi>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMESPACE and name not in ("x", "y"):
            raise ParameterError(f"phi expression uses unknown name {name!r}")

    def func(x, y):
        return eval(code, {"__builtins__": {}}, {**_EXPR_NAMESPACE, "x": x, "y": y})

    return func


def _richardson_first(g, h):
    d1 = (g(h) - g(-h)) / (2 * h)
    d2 = (g(2 * h) - g(-2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


def _richardson_second(g, h):
    g0 = g(0.0)
    d1 = (g(h) - 2 * g0 + g(-h)) / h**2
    d2 = (g(2 * h) - 2 * g0 + g(-2 * h)) / (4 * h**2)
    return (4 * d1 - d2) / 3


# --------------------------------------------------------------------------- profile


@dataclass(frozen=True)
class FrameProfile:
    kind: str = GRUSHIN
    phi: Phi = field(default_factory=Phi)
    alpha: float | None = None
    x_max: float = 4.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown frame kind {self.kind!r}")
        if self.kind == ALPHA_GRUSHIN and self.alpha is None:
            raise ParameterError("alpha_grushin profile needs alpha")
        if self.kind == GRUSHIN:
            ys = np.linspace(0.0, 2 * np.pi, 17)
            if np.max(np.abs(self.phi(0.0, ys))) > 1e-10:
                raise ParameterError("Grushin normal form requires phi(0, y) = 0")

    @classmethod
    def grushin(cls, phi: Phi | None = None, x_max: float = 4.0) -> "FrameProfile":
        return cls(GRUSHIN, phi or Phi.constant(0.0), x_max=x_max)

    @classmethod
    def riemannian(cls, phi: Phi | None = None, x_max: float = 4.0) -> "FrameProfile":
        return cls(RIEMANNIAN, phi or Phi.constant(0.0), x_max=x_max)

    @classmethod
    def alpha_grushin(cls, alpha: float, x_max: float = 4.0) -> "FrameProfile":
        return cls(ALPHA_GRUSHIN, Phi.constant(0.0), alpha=float(alpha), x_max=x_max)

    # frame function and its derivatives; vectorized over x, y
    def _check_alpha_domain(self, x):
        a = self.alpha
        if float(a).is_integer():
            if a < 0 and np.any(np.asarray(x) == 0):
                raise SingularityError(f"x^{a} undefined at x = 0")
        elif np.any(np.asarray(x) <= 0):
            raise DomainError(f"non-integer alpha={a} requires x > 0")

    def f(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.kind == RIEMANNIAN:
            return np.exp(self.phi(x, y))
        if self.kind == GRUSHIN:
            return x * np.exp(self.phi(x, y))
        self._check_alpha_domain(x)
        return np.power(x, self.alpha) + 0.0 * y

    def f_x(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.kind == RIEMANNIAN:
            return self.phi.dx(x, y) * np.exp(self.phi(x, y))
        if self.kind == GRUSHIN:
            return np.exp(self.phi(x, y)) * (1.0 + x * self.phi.dx(x, y))
        self._check_alpha_domain(x)
        a = self.alpha
        if a == 0:
            return np.zeros(np.broadcast(x, y).shape)
        if a == 1:
            return np.ones(np.broadcast(x, y).shape)
        with np.errstate(divide="ignore"):
            return a * np.power(x, a - 1) + 0.0 * y

    def f_xx(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        e = np.exp(self.phi(x, y))
        px = self.phi.dx(x, y)
        if self.kind == RIEMANNIAN:
            return (self.phi.dxx(x, y) + px**2) * e
        if self.kind == GRUSHIN:
            return e * (2.0 * px + x * self.phi.dxx(x, y) + x * px**2)
        self._check_alpha_domain(x)
        a = self.alpha
        if a in (0, 1):
            return np.zeros(np.broadcast(x, y).shape)
        with np.errstate(divide="ignore"):
            return a * (a - 1) * np.power(x, a - 2) + 0.0 * y

    def f_y(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if self.kind == ALPHA_GRUSHIN:
            return np.zeros(np.broadcast(x, y).shape)
        return self.f(x, y) * self.phi.dy(x, y)

    def distance_to_singular_set(self, x) -> np.ndarray:
        """|x| for Grushin and alpha-Grushin (alpha != 0); inf when Z is empty."""
        x = np.asarray(x, float)
        if self.kind == RIEMANNIAN or (self.kind == ALPHA_GRUSHIN and self.alpha == 0):
            return np.full(x.shape, np.inf)
        return np.abs(x)

    def require_regular(self, x):
        if np.any(self.distance_to_singular_set(x) < Z_TOLERANCE):
            raise SingularityError("evaluation within 1e-8 of the singular set")

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "x_max": self.x_max}
        if self.kind == ALPHA_GRUSHIN:
            cfg["alpha"] = self.alpha
        else:
            cfg["phi"] = self.phi.to_config()
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "FrameProfile":
        cfg = dict(cfg)
        unknown = set(cfg) - {"kind", "phi", "alpha", "x_max"}
        if unknown:
            raise ParameterError(f"unknown frame profile keys: {sorted(unknown)}")
        kind = cfg.get("kind", GRUSHIN)
        x_max = float(cfg.get("x_max", 4.0))
        if kind == ALPHA_GRUSHIN:
            return cls.alpha_grushin(cfg["alpha"], x_max=x_max)
        phi = Phi.from_config(cfg.get("phi", {"name": "constant", "value": 0.0}))
        return cls(kind, phi, x_max=x_max)


@dataclass(frozen=True)
class MetricData:
    g11: float
    g22: float
    area_weight: float


# --------------------------------------------------------------------------- operations


def frame_value(profile: FrameProfile, x, y):
    """f(x, y) for the profile's normal form."""
    out = profile.f(x, y)
    return float(out) if np.ndim(out) == 0 else out


def metric(profile: FrameProfile, x: float, y: float) -> MetricData:
    profile.require_regular(x)
    f = float(profile.f(x, y))
    return MetricData(1.0, 1.0 / f**2, 1.0 / abs(f))


def gauss_curvature(profile: FrameProfile, x, y):
    """K = (f f_xx - 2 f_x^2) / f^2."""
    profile.require_regular(x)
    f = profile.f(x, y)
    out = (f * profile.f_xx(x, y) - 2.0 * profile.f_x(x, y) ** 2) / f**2
    return float(out) if np.ndim(out) == 0 else out


def gauss_curvature_expanded(profile: FrameProfile, x, y):
    """Grushin-kind curvature written through phi:
    K = -2/x^2 - 2 phi_x / x + phi_xx - phi_x^2."""
    if profile.kind != GRUSHIN:
        raise ParameterError("expanded curvature formula applies to Grushin kind only")
    profile.require_regular(x)
    x = np.asarray(x, float)
    px = profile.phi.dx(x, y)
    out = -2.0 / x**2 - 2.0 * px / x + profile.phi.dxx(x, y) - px**2
    return float(out) if np.ndim(out) == 0 else out


def _locate(grid: np.ndarray, value: float, periodic: bool = False) -> int:
    if periodic:
        value = value % (2 * np.pi)
        d = np.abs((grid - value + np.pi) % (2 * np.pi) - np.pi)
    else:
        d = np.abs(grid - value)
    i = int(np.argmin(d))
    scale = max(1.0, abs(value))
    if d[i] > 1e-9 * scale:
        raise ParameterError(f"{value} is not a grid node")
    return i


def _x_weights(xg: np.ndarray, i: int):
    h1 = xg[i] - xg[i - 1]
    h2 = xg[i + 1] - xg[i]
    d1 = np.array([-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))])
    d2 = 2.0 * np.array([1.0 / (h1 * (h1 + h2)), -1.0 / (h1 * h2), 1.0 / (h2 * (h1 + h2))])
    return d1, d2


def laplacian_apply(profile: FrameProfile, u: Field2D, x: float, y: float) -> float:
    """Second-order finite-difference value of
    Delta u = u_xx + f^2 u_yy - (f_x / f) u_x + f f_y u_y
    at the grid node (x, y)."""
    i = _locate(u.x, x)
    j = _locate(u.y, y, periodic=True)
    if i == 0 or i == u.x.size - 1:
        raise ParameterError("x stencil leaves the grid")
    stencil = u.x[i - 1 : i + 2]
    if np.any(profile.distance_to_singular_set(stencil) < Z_TOLERANCE) or (
        profile.kind != RIEMANNIAN and (stencil[0] < 0 < stencil[2])
    ):
        raise SingularityError("finite-difference stencil crosses the singular set")
    return float(_laplacian_nodes(profile, u, np.array([i]), np.array([j]))[0])


def _laplacian_nodes(profile, u: Field2D, ii, jj):
    xg, yg, v = u.x, u.y, u.values
    ny = yg.size
    dy = 2 * np.pi / ny
    out = np.empty(ii.shape, dtype=np.result_type(v, float))
    for n, (i, j) in enumerate(zip(ii, jj)):
        d1, d2 = _x_weights(xg, i)
        col = v[i - 1 : i + 2, j]
        ux, uxx = d1 @ col, d2 @ col
        jp, jm = (j + 1) % ny, (j - 1) % ny
        uy = (v[i, jp] - v[i, jm]) / (2 * dy)
        uyy = (v[i, jp] - 2 * v[i, j] + v[i, jm]) / dy**2
        xv, yv = xg[i], yg[j]
        f = profile.f(xv, yv)
        out[n] = uxx + f**2 * uyy - profile.f_x(xv, yv) / f * ux + f * profile.f_y(xv, yv) * uy
    return out


def laplacian_grid(profile: FrameProfile, u: Field2D) -> np.ndarray:
    """Delta u at every node with a full x stencil; the two x-boundary rows are NaN."""
    profile.require_regular(u.x)
    xg, yg = u.x, u.y
    ny = yg.size
    dy = 2 * np.pi / ny
    X, Y = np.meshgrid(xg[1:-1], yg, indexing="ij")
    h1 = (xg[1:-1] - xg[:-2])[:, None]
    h2 = (xg[2:] - xg[1:-1])[:, None]
    um, u0, up = u.values[:-2], u.values[1:-1], u.values[2:]
    ux = (-h2 / (h1 * (h1 + h2))) * um + ((h2 - h1) / (h1 * h2)) * u0 + (h1 / (h2 * (h1 + h2))) * up
    uxx = 2.0 * (um / (h1 * (h1 + h2)) - u0 / (h1 * h2) + up / (h2 * (h1 + h2)))
    uy = (np.roll(u0, -1, axis=1) - np.roll(u0, 1, axis=1)) / (2 * dy)
    uyy = (np.roll(u0, -1, axis=1) - 2 * u0 + np.roll(u0, 1, axis=1)) / dy**2
    f = profile.f(X, Y)
    inner = uxx + f**2 * uyy - profile.f_x(X, Y) / f * ux + f * profile.f_y(X, Y) * uy
    out = np.full(u.values.shape, np.nan, dtype=inner.dtype)
    out[1:-1] = inner
    return out


def step2_check(profile: FrameProfile, y_samples) -> bool:
    """True iff d_x f(0, y) != 0 wherever f(0, y) = 0 on the sampled y values."""
    if profile.kind == RIEMANNIAN:
        return True
    if profile.kind == ALPHA_GRUSHIN:
        a = profile.alpha
        # f = x^a: Z empty for a = 0, f_x(0) = 1 only for a = 1, degenerate or singular otherwise
        return a == 0 or a == 1
    y = np.asarray(y_samples, float)
    zero = np.abs(profile.f(0.0, y)) <= 1e-10
    fx = np.abs(profile.f_x(0.0, y))
    return bool(np.all(fx[zero] > 1e-10))


def singular_set_locate(profile: FrameProfile, y: float, bracket, samples: int = 1025) -> list:
    """Roots of x -> f(x, y) in the bracket, by bisection to 1e-12, sorted ascending."""
    a, b = map(float, bracket)
    if not a < b:
        raise ParameterError("bracket must satisfy a < b")
    if profile.kind == ALPHA_GRUSHIN and not float(profile.alpha).is_integer() and a <= 0:
        raise DomainError("non-integer alpha requires a bracket inside x > 0")
    xs = np.linspace(a, b, samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        fs = np.asarray(profile.f(xs, y), float)
    g = lambda s: float(profile.f(s, y))  # noqa: E731
    roots = []
    for k in range(samples):
        if fs[k] == 0.0:
            roots.append(float(xs[k]))
        elif k + 1 < samples and fs[k + 1] != 0.0 and np.sign(fs[k]) != np.sign(fs[k + 1]):
            if np.isfinite(fs[k]) and np.isfinite(fs[k + 1]):
                roots.append(bisect(g, xs[k], xs[k + 1], xtol=1e-12, rtol=4 * np.finfo(float).eps))
    return sorted(roots)


QUANTITIES = ("K", "g22", "area_weight")


def sample_quantity(profile: FrameProfile, quantity: str, xs, ys) -> np.ndarray:
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
    profile.require_regular(X)
    if quantity == "K":
        return gauss_curvature(profile, X, Y)
    f = profile.f(X, Y)
    if quantity == "g22":
        return 1.0 / f**2
    if quantity == "area_weight":
        return 1.0 / np.abs(f)
    raise ParameterError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")


def write_quantity_csv(profile: FrameProfile, quantity: str, xs, ys, path):
    """CSV with columns x,y,value on the rectangular grid xs x ys (row-major in x)."""
    values = sample_quantity(profile, quantity, xs, ys)
    X, Y = np.meshgrid(np.asarray(xs, float), np.asarray(ys, float), indexing="ij")
    meta = {"quantity": quantity, "profile": _json_inline(profile.to_config())}
    return io.write_csv(path, ["x", "y", "value"], [X.ravel(), Y.ravel(), values.ravel()], meta)


def _json_inline(cfg) -> str:
    return json.dumps(cfg, sort_keys=True)


def load_profile(path) -> FrameProfile:
    return FrameProfile.from_config(io.read_json(path))
