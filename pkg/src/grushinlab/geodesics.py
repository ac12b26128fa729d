"""Hamiltonian geodesic flow H = (p_x^2 + f^2 p_y^2) / 2 with fixed-step RK4.

The Hamiltonian is smooth across the singular set, so trajectories pass
through x = 0 without any special treatment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .errors import ParameterError
from .frames import FrameProfile

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GeodesicState:
    x: float
    y: float
    p_x: float
    p_y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.p_x, self.p_y], dtype=float)

    def normalized(self) -> "GeodesicState":
        return GeodesicState(self.x, self.y % TWO_PI, self.p_x, self.p_y)


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 4) columns x, y (unwrapped), p_x, p_y
    energy: np.ndarray
    energy_drift: float

    def state(self, i: int) -> GeodesicState:
        return GeodesicState(*map(float, self.states[i])).normalized()

    @property
    def final(self) -> GeodesicState:
        return self.state(-1)

    def winding_number(self) -> int:
        return int(math.floor((self.states[-1, 1] - self.states[0, 1] + math.pi) / TWO_PI))


def hamiltonian(profile: FrameProfile, s: GeodesicState) -> float:
    f = float(profile.f(s.x, s.y))
    return 0.5 * (s.p_x**2 + f**2 * s.p_y**2)


def _energy(profile, states):
    f = profile.f(states[..., 0], states[..., 1])
    return 0.5 * (states[..., 2] ** 2 + f**2 * states[..., 3] ** 2)


def _rhs(profile, z):
    x, y, px, py = z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    f = profile.f(x, y)
    out = np.empty_like(z)
    out[..., 0] = px
    out[..., 1] = f**2 * py
    out[..., 2] = -f * profile.f_x(x, y) * py**2
    out[..., 3] = -f * profile.f_y(x, y) * py**2
    return out


def _step_count(t_f: float, dt: float) -> int:
    if not (dt > 0 and t_f > 0):
        raise ParameterError("need dt > 0 and t_f > 0")
    ratio = t_f / dt
    n = int(round(ratio))
    if n < 1 or abs(ratio - n) > 1e-6 * max(1.0, ratio):
        raise ParameterError(f"t_f/dt = {ratio} is not an integer step count")
    return n


def integrate_many(profile: FrameProfile, s0: np.ndarray, t_f: float, dt: float):
    """RK4 for a batch of initial states s0[..., 4]; returns (times, states[n+1, ..., 4])."""
    n = _step_count(t_f, dt)
    z = np.array(s0, dtype=float)
    out = np.empty((n + 1,) + z.shape)
    out[0] = z
    for i in range(n):
        k1 = _rhs(profile, z)
        k2 = _rhs(profile, z + 0.5 * dt * k1)
        k3 = _rhs(profile, z + 0.5 * dt * k2)
        k4 = _rhs(profile, z + dt * k3)
        z = z + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = z
    return dt * np.arange(n + 1), out


def _trajectory(profile, times, states) -> Trajectory:
    energy = _energy(profile, states)
    return Trajectory(times, states, energy, float(np.max(np.abs(energy - energy[0]))))


def integrate(profile: FrameProfile, s0: GeodesicState, t_f: float, dt: float) -> Trajectory:
    """Integrate Hamilton's equations
        x' = p_x,  y' = f^2 p_y,  p_x' = -f f_x p_y^2,  p_y' = -f f_y p_y^2
    from s0 over [0, t_f] with fixed step dt."""
    if hamiltonian(profile, s0) <= 0:
        raise ParameterError("initial state must have positive energy")
    times, states = integrate_many(profile, s0.as_array(), t_f, dt)
    return _trajectory(profile, times, states)


START = (-0.5, 0.0)
T_FINAL = 1.3
DT = 1e-4


def initial_covectors(n_rays: int, x0: float = START[0], y0: float = START[1], profile=None):
    """Covectors on the energy level H = 1/2 at (x0, y0), at equispaced angles.

    (cos t, sin t / |f(x0, y0)|) lies on H = 1/2; at x0 = -1/2 on the flat
    Grushin cylinder this is (cos t, 2 sin t).
    """
    profile = profile or FrameProfile.grushin()
    f0 = abs(float(profile.f(x0, y0)))
    theta = TWO_PI * np.arange(n_rays) / n_rays
    return theta, np.cos(theta), np.sin(theta) / f0


def figure1_scenario(n_rays: int = 16, profile: FrameProfile | None = None,
                     t_f: float = T_FINAL, dt: float = DT) -> list[Trajectory]:
    """Rays from (-1/2, 0) on the Grushin cylinder, unit energy, equispaced angles."""
    if n_rays < 2:
        raise ParameterError("n_rays must be at least 2")
    profile = profile or FrameProfile.grushin()
    _, px, py = initial_covectors(n_rays, profile=profile)
    s0 = np.column_stack([np.full(n_rays, START[0]), np.full(n_rays, START[1]), px, py])
    times, states = integrate_many(profile, s0, t_f, dt)
    return [_trajectory(profile, times, states[:, r, :]) for r in range(n_rays)]


def write_trajectory_csv(traj: Trajectory, path, profile: FrameProfile | None = None):
    s = traj.states
    meta = {"energy_drift": traj.energy_drift}
    if profile is not None:
        meta["profile"] = json.dumps(profile.to_config(), sort_keys=True)
    return io.write_csv(
        path,
        ["t", "x", "y", "p_x", "p_y", "H"],
        [traj.times, s[:, 0], np.mod(s[:, 1], TWO_PI), s[:, 2], s[:, 3], traj.energy],
        meta,
    )


def read_trajectory_csv(path) -> Trajectory:
    meta, c = io.read_csv(path)
    states = np.column_stack([c["x"], c["y"], c["p_x"], c["p_y"]])
    return Trajectory(c["t"], states, c["H"], float(meta.get("energy_drift", "nan")))


GNUPLOT_TEMPLATE = """\
set datafile separator ','
set key autotitle columnhead
set key off
set xlabel 'x'
set ylabel 'y'
set title 'Geodesics from (-1/2, 0), t_f = {t_f}'
set arrow from 0, graph 0 to 0, graph 1 nohead dashtype 2
plot {plots}
"""


def write_figure1(trajectories, directory, profile=None, t_f: float = T_FINAL):
    """One CSV per ray plus a gnuplot script that overlays them."""
    directory = Path(directory)
    paths = []
    for r, traj in enumerate(trajectories):
        paths.append(write_trajectory_csv(traj, directory / f"ray_{r:02d}.csv", profile))
    plots = ", \\\n     ".join(f"'{p.name}' using 2:3 with lines" for p in paths)
    io.atomic_write_text(directory / "figure1.gp", GNUPLOT_TEMPLATE.format(t_f=t_f, plots=plots))
    return paths
