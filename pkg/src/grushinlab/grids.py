"""Sampled fields, log-refined grids and power-law fitting near x = 0."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InconclusiveError, ParameterError

X_MIN = 1e-6
POINTS_PER_DECADE = 64
FIT_WINDOW = (1e-5, 1e-4)
FIT_RESIDUAL_MAX = 0.1


def log_grid(x_min: float, x_max: float, per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    """Geometric grid from x_min to x_max (both included), `per_decade` cells per decade."""
    if not (0 < x_min < x_max):
        raise ParameterError(f"need 0 < x_min < x_max, got {x_min}, {x_max}")
    n = int(np.ceil(np.log10(x_max / x_min) * per_decade))
    return np.geomspace(x_min, x_max, n + 1)


def y_grid(n: int = 64) -> np.ndarray:
    """Uniform periodic grid on [0, 2*pi) without the duplicated endpoint."""
    return 2.0 * np.pi * np.arange(n) / n


@dataclass
class ModeField:
    """A function of x sampled on a half-line grid, tagged with its Fourier index."""

    x: np.ndarray
    values: np.ndarray
    mode: int = 0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values)
        if self.x.shape != self.values.shape:
            raise ParameterError("x and values must have the same shape")


@dataclass
class Field2D:
    """Samples u[i, j] = u(x[i], y[j]); y is periodic with period 2*pi."""

    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        self.values = np.asarray(self.values)
        if self.values.shape != (self.x.size, self.y.size):
            raise ParameterError(
                f"values shape {self.values.shape} != ({self.x.size}, {self.y.size})"
            )

    def fourier_mode(self, k: int) -> ModeField:
        """k-th Fourier coefficient in y, (1/2pi) * integral of u e^{-iky} dy."""
        phase = np.exp(-1j * k * self.y)
        coeff = self.values @ phase / self.y.size
        if k == 0 and not np.iscomplexobj(self.values):
            coeff = coeff.real
        return ModeField(self.x, coeff, mode=k)


def inner_product(u: Field2D, v: Field2D, weight=None) -> complex:
    """<u, v> = integral of conj(u) v (times optional weight) dx dy, trapezoid in x."""
    integrand = np.conj(u.values) * v.values
    if weight is not None:
        integrand = integrand * weight
    dy = 2.0 * np.pi / u.y.size
    return np.trapezoid(integrand.sum(axis=1) * dy, u.x)


@dataclass
class PowerFit:
    exponent: float
    prefactor: float
    residual: float


def fit_power_law(x, y, window=FIT_WINDOW, check: bool = True) -> PowerFit:
    """Least-squares fit |y| ~ C x^p on the window; residual is RMS in natural log.

    Raises InconclusiveError when `check` and the residual exceeds 0.1.
    """
    x = np.asarray(x, dtype=float)
    mag = np.abs(np.asarray(y))
    sel = (x >= window[0] * (1 - 1e-12)) & (x <= window[1] * (1 + 1e-12)) & (mag > 0)
    if sel.sum() < 3:
        raise InconclusiveError(f"fewer than 3 usable samples in window {window}")
    lx, ly = np.log(x[sel]), np.log(mag[sel])
    A = np.vstack([lx, np.ones_like(lx)]).T
    (p, logc), *_ = np.linalg.lstsq(A, ly, rcond=None)
    residual = float(np.sqrt(np.mean((A @ np.array([p, logc]) - ly) ** 2)))
    if check and residual > FIT_RESIDUAL_MAX:
        raise InconclusiveError(f"power-law fit residual {residual:.3g} > {FIT_RESIDUAL_MAX}")
    return PowerFit(float(p), float(np.exp(logc)), residual)
