"""Heat and Schroedinger evolution for a single mode, -d^2/dx^2 + V on (x_min, X).

The boundary condition at x_min selects a realization of the operator: the
solution follows the two-term asymptotics of psi_+ (Friedrichs-like) or of
psi_+ + theta psi_- (another extension, only available in the limit circle
case). The far end x = X is a Dirichlet wall.

The grid is uniform in t = log x and the unknown is w = u / sqrt(x). The
discrete operator is W^-1 S with S symmetric and W diagonal; the evolution runs
on W^(1/2) w, where W^(-1/2) S W^(-1/2) is symmetric tridiagonal. Units: hbar = m = 1 and the Schroedinger equation
is i u_t = (-d^2/dx^2 + V) u.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import diags
from scipy.sparse.linalg import eigsh

from . import io
from .errors import InconclusiveError, ParameterError
from .grids import ModeField, fit_power_law, log_grid
from .sturm1d import CRITICAL_STRENGTH, Potential1D, asymptotic_pair

X_MIN_EVOLUTION = 1e-5
X_WALL = 4.0
PER_DECADE = 128
CONFINED_FLUX = 1e-6
LEAKING_FLUX = 1e-3

FRIEDRICHS = "friedrichs"
MIX = "mix"
FAR_WALL = "far_wall"


@dataclass(frozen=True)
class BoundaryCondition:
    """Condition at x_min: friedrichs, mix (with theta) or far_wall (Dirichlet)."""

    kind: str = FRIEDRICHS
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in (FRIEDRICHS, MIX, FAR_WALL):
            raise ParameterError(f"unknown boundary condition {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        """'friedrichs', 'far_wall' or 'mix:<theta>'."""
        name, _, arg = text.partition(":")
        if name == MIX:
            try:
                return cls(MIX, float(arg))
            except ValueError as exc:
                raise ParameterError(f"bad mix parameter in {text!r}") from exc
        if arg:
            raise ParameterError(f"{name} takes no parameter")
        return cls(name)

    def label(self) -> str:
        return f"{MIX}:{self.theta!r}" if self.kind == MIX else self.kind

    def boundary_function(self, p: Potential1D):
        """(sign, theta) pairs whose combination psi the condition at x_min follows, or None.

        A mix condition on a limit point potential has no psi_- to mix in and
        falls back to Friedrichs.
        """
        if self.kind == FAR_WALL:
            return None
        if self.kind == MIX and p.k < CRITICAL_STRENGTH:
            return (("plus", 1.0), ("minus", self.theta))
        return (("plus", 1.0),)


def _fitted_strength(k: float, dt: float) -> float:
    """Replacement for 1/4 + k making x^(1/2 +- mu), mu^2 = 1/4 + k, exact discrete solutions."""
    m2 = 0.25 + k
    if m2 >= 0:
        return 2.0 * (np.cosh(np.sqrt(m2) * dt) - 1.0) / dt**2
    return 2.0 * (np.cos(np.sqrt(-m2) * dt) - 1.0) / dt**2


@dataclass
class Discretization:
    x: np.ndarray  # all nodes, x[0] = x_min, x[-1] = X (wall)
    unknown: slice  # nodes carrying unknowns
    weights: np.ndarray  # dt x^2, halved at the ends
    diag: np.ndarray  # symmetric operator matrix, diagonal
    off: np.ndarray  # and first off-diagonal
    beta: float | None  # boundary coefficient of the first row

    @property
    def nodes(self) -> np.ndarray:
        return self.x[self.unknown]

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def to_scaled(self, u):
        return np.sqrt(self.weights / self.nodes) * u

    def from_scaled(self, v):
        return np.sqrt(self.nodes / self.weights) * v


def discretize(p: Potential1D, bc: BoundaryCondition, x_min: float = X_MIN_EVOLUTION,
               x_max: float = X_WALL, per_decade: int = PER_DECADE) -> Discretization:
    """Three-point scheme in t = log x for w = u / sqrt(x).

    -u'' + V u = x^(-3/2) (-w_tt + q w) with q = 1/4 + x^2 V, and the L^2 norm of u
    is the integral of x^2 w^2 dt. The constant part 1/4 + k of q is exponentially
    fitted, so the pure powers x^alpha_+- solve the discrete recursion exactly and
    psi_+, psi_- are not mixed by truncation error near x_min. The first row carries
    a coefficient chosen so that psi of the boundary condition solves it.
    """
    x = log_grid(x_min, x_max, per_decade)
    dt = float(np.log(x_max / x_min) / (x.size - 1))
    q = _fitted_strength(p.k, dt) + np.asarray(p.scaled(x), dtype=float) - p.k
    w = dt * x**2
    w[0] *= 0.5
    w[-1] *= 0.5
    S_diag = np.full(x.size, 2.0 / dt) + dt * q
    S_diag[0] = S_diag[-1] = 1.0 / dt + 0.5 * dt * q[0]
    S_off = np.full(x.size - 1, -1.0 / dt)
    psi = None
    if bc.kind != FAR_WALL:
        pair = asymptotic_pair(p.k, p.g1)
        psi = sum(coef * pair.evaluate(sign, x[:2])[0] for sign, coef in bc.boundary_function(p))
        psi = psi / np.sqrt(x[:2])
    if psi is None:
        beta = None
        unknown = slice(1, x.size - 1)
    else:
        if psi[0] == 0:
            raise ParameterError("boundary ratio undefined: psi vanishes at x_min")
        beta = float((psi[1] - psi[0]) / (dt * psi[0]) - 0.5 * dt * q[0])
        S_diag[0] += beta
        unknown = slice(0, x.size - 1)
    d = S_diag[unknown]
    ww = w[unknown]
    off = S_off[unknown][: d.size - 1]
    scale = 1.0 / np.sqrt(ww)
    return Discretization(x, unknown, ww, d * scale**2, off * scale[:-1] * scale[1:], beta)


@dataclass
class EvolutionRun:
    times: np.ndarray
    fields: list
    mass: np.ndarray
    flux_at_zero: np.ndarray
    scheme: str
    meta: dict = field(default_factory=dict)
    quadrature: np.ndarray | None = None  # weights on x conserved by the scheme

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.fields) == len(self.mass) == len(self.flux_at_zero) == n):
            raise ParameterError("inconsistent run lengths")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ParameterError("times must increase")

    @property
    def x(self) -> np.ndarray:
        return self.fields[0].x

    def norms(self) -> np.ndarray:
        if self.quadrature is None:
            return np.array([_l2(f.x, f.values) for f in self.fields])
        return np.array([np.sqrt(np.sum(self.quadrature * np.abs(f.values) ** 2))
                         for f in self.fields])


def _l2(x, u):
    return float(np.sqrt(np.trapezoid(np.abs(u) ** 2, x)))


def _flux(x, u) -> float:
    """-Re(conj(u) u') at the first interior node, centered difference."""
    du = (u[2] - u[0]) / (x[2] - x[0])
    return float(-np.real(np.conj(u[1]) * du))


def _full_field(disc: Discretization, v) -> np.ndarray:
    u = np.zeros(disc.x.size, dtype=v.dtype)
    u[disc.unknown] = disc.from_scaled(v)
    return u


def _check_times(dt: float, T: float) -> int:
    if not (dt > 0 and T > 0):
        raise ParameterError("need dt > 0 and T > 0")
    if dt > T:
        raise ParameterError("dt > T")
    n = int(round(T / dt))
    if abs(n * dt - T) > 1e-9 * T:
        raise ParameterError(f"T/dt = {T / dt} is not an integer step count")
    return n


def _initial(disc: Discretization, u0: ModeField, dtype):
    vals = np.asarray(u0.values, dtype=dtype)
    if u0.x.shape != disc.x.shape or not np.allclose(u0.x, disc.x, rtol=1e-13, atol=0):
        vals = np.interp(disc.x, u0.x, vals.real) + (
            1j * np.interp(disc.x, u0.x, vals.imag) if np.iscomplexobj(vals) else 0.0)
        vals = np.asarray(vals, dtype=dtype)
    return disc.to_scaled(vals[disc.unknown])


def _banded(diag, off, shift, factor):
    """Banded storage of shift*I + factor*H."""
    ab = np.zeros((3, diag.size), dtype=np.result_type(diag, factor))
    ab[0, 1:] = factor * off
    ab[1] = shift + factor * diag
    ab[2, :-1] = factor * off
    return ab


def _evolve(p, u0, bc, dt, T, scheme, x_min, x_max, per_decade, stride):
    n = _check_times(dt, T)
    disc = discretize(p, bc, x_min, x_max, per_decade)
    complex_run = scheme == "schrodinger"
    v = _initial(disc, u0, complex if complex_run else float)
    d, o = disc.diag, disc.off
    if complex_run:
        lhs = _banded(d, o, 1.0, 0.5j * dt)
        rhs_d, rhs_o = 1.0 - 0.5j * dt * d, -0.5j * dt * o
    else:
        lhs = _banded(d, o, 1.0, dt)

    times, fields, mass, flux = [], [], [], []
    # u^2 dx = x u^2 dt, and W = dt x^2 on the unknown nodes
    quad = np.zeros(disc.x.size)
    quad[disc.unknown] = disc.weights / disc.nodes

    def record(t, v):
        u = _full_field(disc, v)
        times.append(t)
        fields.append(ModeField(disc.x, u))
        mass.append(np.sum(quad * np.abs(u) ** 2) if complex_run else np.sum(quad * np.abs(u)))
        flux.append(_flux(disc.x, u))

    record(0.0, v)
    for step in range(1, n + 1):
        if complex_run:
            r = rhs_d * v
            r[:-1] += rhs_o * v[1:]
            r[1:] += rhs_o * v[:-1]
            v = solve_banded((1, 1), lhs, r, check_finite=False)
        else:
            v = solve_banded((1, 1), lhs, v, check_finite=False)
        if step % stride == 0 or step == n:
            record(step * dt, v)
    meta = {"k": p.k, "g1": p.g1, "bc": bc.label(), "dt": dt, "T": T, "x_min": x_min,
            "x_max": x_max, "per_decade": per_decade, "beta": disc.beta}
    return EvolutionRun(np.array(times), fields, np.array(mass), np.array(flux), scheme, meta, quad)


def heat_evolve(p: Potential1D, u0: ModeField, bc: BoundaryCondition, dt: float, T: float,
                x_min: float = X_MIN_EVOLUTION, x_max: float = X_WALL,
                per_decade: int = PER_DECADE, stride: int = 1) -> EvolutionRun:
    """Backward Euler for u_t = u'' - V u; mass is the L^1 norm."""
    if np.iscomplexobj(u0.values):
        raise ParameterError("heat initial data must be real")
    return _evolve(p, u0, bc, dt, T, "heat", x_min, x_max, per_decade, stride)


def schrodinger_evolve(p: Potential1D, u0: ModeField, bc: BoundaryCondition, dt: float, T: float,
                       x_min: float = X_MIN_EVOLUTION, x_max: float = X_WALL,
                       per_decade: int = PER_DECADE, stride: int = 1) -> EvolutionRun:
    """Crank-Nicolson for i u_t = -u'' + V u; mass is the squared L^2 norm."""
    return _evolve(p, u0, bc, dt, T, "schrodinger", x_min, x_max, per_decade, stride)


def eigenmode(p: Potential1D, bc: BoundaryCondition, index: int = 0, x_min: float = X_MIN_EVOLUTION,
              x_max: float = X_WALL, per_decade: int = PER_DECADE):
    """(eigenvalue, ModeField) of the discretized operator.

    Shift-invert on S w = lambda W w: the scaled matrix has entries of size
    1/(dt x_min)^2, which would swamp the low eigenvalues in a direct solver.
    """
    if index < 0:
        raise ParameterError("index must be >= 0")
    disc = discretize(p, bc, x_min, x_max, per_decade)
    W = disc.weights
    S = diags([disc.off * np.sqrt(W[:-1] * W[1:]), disc.diag * W, disc.off * np.sqrt(W[:-1] * W[1:])],
              [-1, 0, 1], format="csc")
    lam, vec = eigsh(S, k=index + 1, M=diags(W, format="csc"), sigma=0.0, which="LM")
    order = np.argsort(lam)
    v = vec[:, order[index]] * np.sqrt(W)
    v = v * np.sign(v[np.argmax(np.abs(v))])
    u = _full_field(disc, v)
    return float(lam[order[index]]), ModeField(disc.x, u / _l2(disc.x, u))


# --------------------------------------------------------------------------- initial data


def bump(x, center: float, width: float):
    """C^2 bump (1 - r^2)^3 on |x - center| < width, normalized in L^2."""
    x = np.asarray(x, dtype=float)
    r = (x - center) / width
    u = np.where(np.abs(r) < 1, (1 - r**2) ** 3, 0.0)
    nrm = _l2(x, u)
    return u / nrm if nrm > 0 else u


def wave_packet(x, center: float, width: float, momentum: float):
    """Gaussian exp(-(x - center)^2 / (4 width^2) + i momentum x), normalized in L^2."""
    x = np.asarray(x, dtype=float)
    u = np.exp(-((x - center) ** 2) / (4 * width**2) + 1j * momentum * x)
    return u / _l2(x, u)


DICHOTOMY_STRENGTHS = (0.0, 0.35, 0.75, 2.0)
DICHOTOMY_CONDITIONS = ("friedrichs", "mix:1.0")


def dichotomy_case(k: float, bc: str, dt: float = 1e-3, T: float = 1.0) -> dict:
    """Heat run from a bump at x = 2.5 (half width 1) and its confinement report.

    The bump sits away from x_min so that only what diffuses to the boundary
    is measured; the expected verdict is confined exactly when k >= 3/4 or the
    condition is Friedrichs-like.
    """
    x = evolution_grid()
    run = heat_evolve(Potential1D.inverse_square(k), ModeField(x, bump(x, 2.5, 1.0)),
                      BoundaryCondition.parse(bc), dt, T, stride=max(1, int(round(0.01 / dt))))
    rep = confinement_report(run)
    rep["expected_confined"] = bool(k >= CRITICAL_STRENGTH or bc == FRIEDRICHS)
    return rep


def evolution_grid(x_min: float = X_MIN_EVOLUTION, x_max: float = X_WALL,
                   per_decade: int = PER_DECADE) -> np.ndarray:
    return log_grid(x_min, x_max, per_decade)


# --------------------------------------------------------------------------- diagnostics


def near_zero_exponent(f: ModeField, decades: float = 1.0):
    """Power-law fit of |u| on [x_min', 10^decades x_min'], x_min' the first interior node."""
    x = f.x
    lo = x[1]
    try:
        fit = fit_power_law(x, f.values, (lo, lo * 10**decades), check=False)
    except InconclusiveError:
        return float("nan"), float("nan")
    return fit.exponent, fit.residual


def confinement_report(run: EvolutionRun) -> dict:
    """Mass, boundary flux and near-zero exponent per snapshot, plus a verdict.

    The flux is normalized by the squared L^2 norm of the initial field:
    confined if max |flux| <= 1e-6, leaking if it exceeds 1e-3.
    """
    norm0 = run.norms()[0] ** 2
    flux = np.asarray(run.flux_at_zero)
    if norm0 == 0:
        rel = np.zeros_like(flux)
    else:
        rel = flux / norm0
    peak = float(np.max(np.abs(rel))) if rel.size else 0.0
    if peak <= CONFINED_FLUX:
        verdict = "confined"
    elif peak > LEAKING_FLUX:
        verdict = "leaking"
    else:
        verdict = "intermediate"
    exps = [near_zero_exponent(f) if np.any(f.values) else (0.0, 0.0) for f in run.fields]
    return {
        "scheme": run.scheme,
        "meta": run.meta,
        "times": run.times.tolist(),
        "mass": np.asarray(run.mass).tolist(),
        "flux_at_zero": flux.tolist(),
        "relative_flux": rel.tolist(),
        "max_relative_flux": peak,
        "near_zero_exponent": [e for e, _ in exps],
        "near_zero_fit_residual": [r for _, r in exps],
        "verdict": verdict,
    }


def write_report(report: dict, json_path, csv_path=None):
    io.write_json(json_path, report)
    if csv_path is not None:
        io.write_csv(csv_path, ["t", "mass", "flux_at_zero", "near_zero_exponent"],
                     [report["times"], report["mass"], report["flux_at_zero"],
                      report["near_zero_exponent"]],
                     {"scheme": report["scheme"], "verdict": report["verdict"],
                      "meta": json.dumps(report["meta"], sort_keys=True, separators=(",", ":"))})


def write_snapshots(run: EvolutionRun, path):
    t = np.repeat(run.times, run.x.size)
    x = np.tile(run.x, len(run.times))
    u = np.concatenate([f.values for f in run.fields]).astype(complex)
    meta = {"scheme": run.scheme, **{k: json.dumps(v) if isinstance(v, (dict, list)) else v
                                     for k, v in run.meta.items() if v is not None}}
    return io.write_csv(path, ["t", "x", "re(u)", "im(u)"], [t, x, u.real, u.imag], meta)


def read_snapshots(path):
    """(meta, times, x, values[n_t, n_x]) from a snapshot CSV."""
    meta, c = io.read_csv(path)
    times = np.unique(c["t"])
    x = c["x"][: c["x"].size // times.size]
    vals = (c["re(u)"] + 1j * c["im(u)"]).reshape(times.size, x.size)
    return meta, times, x, vals
