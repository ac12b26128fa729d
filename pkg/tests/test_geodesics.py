import math

import numpy as np
import pytest
from scipy.integrate import quad

from grushinlab.errors import ParameterError
from grushinlab.frames import FrameProfile, Phi
from grushinlab.geodesics import (
    GeodesicState,
    figure1_scenario,
    hamiltonian,
    integrate,
    read_trajectory_csv,
    write_figure1,
    write_trajectory_csv,
)

G = FrameProfile.grushin()


def test_hamiltonian_examples():
    assert hamiltonian(G, GeodesicState(0, 0, 1, 5)) == 0.5
    assert hamiltonian(G, GeodesicState(1, 0, 0, 1)) == 0.5
    assert hamiltonian(G, GeodesicState(-0.5, 0, 0.8, 1.2)) == pytest.approx(0.5, rel=1e-15)


def test_pure_x_line():
    tr = integrate(G, GeodesicState(-0.5, 0, 1, 0), 1.3, 1e-4)
    assert tr.final.x == pytest.approx(0.8, abs=1e-8)
    assert tr.final.y == 0.0
    assert tr.energy_drift <= 1e-8


def _exact_flat_grushin(s0, t):
    # phi = 0: p_y is conserved and x'' = -p_y^2 x
    w = abs(s0.p_y)
    x = s0.x * np.cos(w * t) + s0.p_x / w * np.sin(w * t)
    y = s0.y + s0.p_y * quad(lambda s: (s0.x * math.cos(w * s) + s0.p_x / w * math.sin(w * s)) ** 2,
                             0, t, epsabs=1e-14, epsrel=1e-14)[0]
    return x, y


def test_matches_closed_form_on_flat_grushin():
    px, py = 0.6, 1.8
    scale = 1 / math.sqrt(2 * hamiltonian(G, GeodesicState(-0.5, 0, px, py)))
    s0 = GeodesicState(-0.5, 0, px * scale, py * scale)
    assert hamiltonian(G, s0) == pytest.approx(0.5)
    tr = integrate(G, s0, 1.3, 1e-4)
    x, y = _exact_flat_grushin(s0, 1.3)
    assert tr.states[-1, 0] == pytest.approx(x, abs=1e-10)
    assert tr.states[-1, 1] == pytest.approx(y, abs=1e-10)
    assert tr.energy_drift <= 1e-8
    xs = tr.states[:, 0]
    k = np.nonzero(np.diff(np.sign(xs)))[0]
    assert k.size >= 1
    assert abs(tr.states[k[0], 2]) > 0.1


def test_step_count_must_be_integral():
    with pytest.raises(ParameterError):
        integrate(G, GeodesicState(-0.5, 0, 1, 0), 1.3, 0.3)
    with pytest.raises(ParameterError):
        integrate(G, GeodesicState(-0.5, 0, 1, 0), 1.3, -1e-3)
    with pytest.raises(ParameterError):
        integrate(G, GeodesicState(0.0, 0, 0, 3), 1.0, 1e-3)


def test_energy_drift_order_at_least_three():
    # at dt = 1e-4 the drift is at round-off level; the order is measured where truncation dominates
    s0 = GeodesicState(-0.5, 0.0, math.cos(1.0), 2 * math.sin(1.0))
    prof = FrameProfile.grushin(Phi.separable(0.5))
    d1 = integrate(prof, s0, 1.3, 0.05).energy_drift
    d2 = integrate(prof, s0, 1.3, 0.025).energy_drift
    assert d1 / d2 >= 8.0


@pytest.mark.parametrize("phi", [Phi.constant(0.0), Phi.separable(0.5)])
def test_time_reversal(phi):
    prof = FrameProfile.grushin(phi)
    s0 = GeodesicState(-0.5, 0.3, math.cos(0.7), 2 * math.sin(0.7))
    fwd = integrate(prof, s0, 1.3, 1e-3)
    x, y, px, py = fwd.states[-1]
    back = integrate(prof, GeodesicState(x, y, -px, -py), 1.3, 1e-3)
    xb, yb, pxb, pyb = back.states[-1]
    np.testing.assert_allclose([xb, yb, -pxb, -pyb], s0.as_array(), atol=1e-6)


def test_figure1_scenario():
    rays = figure1_scenario(16)
    assert len(rays) == 16
    for tr in rays:
        assert tr.energy_drift <= 1e-8
        if tr.states[0, 2] > 0:
            assert tr.states[:, 0].max() > 0
            i = int(np.argmax(np.diff(np.sign(tr.states[:, 0])) != 0))
            window = tr.states[max(i - 50, 0) : i + 50, 0]
            assert np.all(np.diff(window) > 0)
    flat = [tr for tr in rays if tr.states[0, 3] == 0 and tr.states[0, 2] > 0]
    assert len(flat) == 1
    assert flat[0].final.x == pytest.approx(0.8, abs=1e-8)
    assert flat[0].final.y == pytest.approx(0.0, abs=1e-8)


def test_figure1_requires_two_rays():
    with pytest.raises(ParameterError):
        figure1_scenario(1)


def test_trajectory_csv_round_trip(tmp_path):
    tr = integrate(G, GeodesicState(-0.5, 6.0, 0.3, 2.0), 0.2, 1e-3)
    path = write_trajectory_csv(tr, tmp_path / "t.csv", G)
    back = read_trajectory_csv(path)
    np.testing.assert_array_equal(back.times, tr.times)
    np.testing.assert_array_equal(back.states[:, 1], np.mod(tr.states[:, 1], 2 * np.pi))
    np.testing.assert_array_equal(back.energy, tr.energy)
    assert back.energy_drift == tr.energy_drift
    assert np.all((back.states[:, 1] >= 0) & (back.states[:, 1] < 2 * np.pi))


def test_write_figure1(tmp_path):
    rays = figure1_scenario(4, dt=1e-3)
    paths = write_figure1(rays, tmp_path)
    assert len(paths) == 4
    script = (tmp_path / "figure1.gp").read_text()
    assert all(p.name in script for p in paths)
