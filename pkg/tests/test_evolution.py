import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.special import jv

from grushinlab.errors import ParameterError
from grushinlab.evolution import (
    DICHOTOMY_CONDITIONS,
    DICHOTOMY_STRENGTHS,
    BoundaryCondition,
    bump,
    confinement_report,
    dichotomy_case,
    discretize,
    eigenmode,
    evolution_grid,
    heat_evolve,
    read_snapshots,
    schrodinger_evolve,
    wave_packet,
    write_report,
    write_snapshots,
)
from grushinlab.grids import ModeField
from grushinlab import io
from grushinlab.sturm1d import Potential1D

BCS = ["friedrichs", "mix:1.0", "far_wall"]


def _field(x, vals):
    return ModeField(x, vals)


def test_boundary_condition_parsing():
    assert BoundaryCondition.parse("mix:0.5") == BoundaryCondition("mix", 0.5)
    assert BoundaryCondition.parse("friedrichs").label() == "friedrichs"
    assert BoundaryCondition.parse("mix:1.0").label() == "mix:1.0"
    for bad in ["mix:abc", "robin", "far_wall:2"]:
        with pytest.raises(ParameterError):
            BoundaryCondition.parse(bad)


def test_mix_on_limit_point_falls_back_to_friedrichs():
    p = Potential1D.inverse_square(2.0)
    a = discretize(p, BoundaryCondition.parse("mix:1.0"))
    b = discretize(p, BoundaryCondition.parse("friedrichs"))
    np.testing.assert_array_equal(a.diag, b.diag)


@pytest.mark.parametrize("bc", BCS)
@pytest.mark.parametrize("k", [0.0, 0.35, 0.75, 2.0])
def test_operator_matrix_symmetric_tridiagonal(k, bc):
    d = discretize(Potential1D.inverse_square(k), BoundaryCondition.parse(bc))
    M = d.dense()
    np.testing.assert_array_equal(M, M.T)
    assert np.all(d.off < 0)


def _bessel_zero(nu):
    z = np.linspace(0.5, 8, 400)
    f = jv(nu, z)
    i = np.nonzero(np.sign(f[:-1]) != np.sign(f[1:]))[0][0]
    return brentq(lambda s: jv(nu, s), z[i], z[i + 1])


@pytest.mark.parametrize("k", [0.0, 0.35, 0.75, 2.0])
def test_friedrichs_ground_state_matches_bessel_zero(k):
    # psi_+ realization on (0, 4): sqrt(x) J_nu(kappa x), nu = sqrt(1/4 + k)
    lam, _ = eigenmode(Potential1D.inverse_square(k), BoundaryCondition.parse("friedrichs"))
    ref = (_bessel_zero(np.sqrt(0.25 + k)) / 4.0) ** 2
    assert lam == pytest.approx(ref, rel=1e-4)


def test_mix_ground_state_matches_robin_problem():
    # k = 0, psi = x + 1: u'(0) = u(0), so u = sin(kappa (4 - x)) with tan(4 kappa) = -kappa
    lam, _ = eigenmode(Potential1D.inverse_square(0.0), BoundaryCondition.parse("mix:1.0"))
    kappa = brentq(lambda s: np.tan(4 * s) + s, 0.5, 0.8)
    assert lam == pytest.approx(kappa**2, rel=1e-4)


@pytest.mark.parametrize("bc", BCS)
def test_eigenvector_is_stationary(bc):
    p = Potential1D.inverse_square(0.35)
    bcond = BoundaryCondition.parse(bc)
    lam, f = eigenmode(p, bcond, index=1)
    run = schrodinger_evolve(p, f, bcond, 1e-3, 0.5, stride=100)
    dens0 = np.abs(f.values) ** 2
    for g in run.fields:
        assert np.max(np.abs(np.abs(g.values) ** 2 - dens0)) <= 1e-6 * np.max(dens0)
    heat = heat_evolve(p, f, bcond, 1e-3, 0.1)
    ratio = heat.fields[-1].values / np.where(f.values == 0, 1, f.values)
    mid = np.abs(f.values) > 1e-3 * np.max(np.abs(f.values))
    # backward Euler damps an eigenvector by (1 + lam dt)^-n
    assert np.allclose(ratio[mid], (1 + lam * 1e-3) ** -100, rtol=1e-6)


@pytest.mark.parametrize("bc", BCS)
@pytest.mark.parametrize("k", [0.0, 0.35, 0.75, 2.0])
def test_schrodinger_norm_conserved_over_1000_steps(k, bc):
    x = evolution_grid()
    u0 = _field(x, wave_packet(x, 1.0, 0.15, -8.0))
    run = schrodinger_evolve(Potential1D.inverse_square(k), u0, BoundaryCondition.parse(bc),
                             1e-4, 0.1, stride=100)
    n = run.norms()
    assert np.max(np.abs(n - n[0])) <= 1e-8
    assert np.allclose(run.mass, n**2, rtol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.1, 0.8), st.sampled_from([0.0, 0.35, 0.75, 2.0]),
       st.sampled_from(BCS))
def test_heat_maximum_principle(center, width, k, bc):
    x = evolution_grid()
    u0 = bump(x, center, width)
    run = heat_evolve(Potential1D.inverse_square(k), _field(x, u0), BoundaryCondition.parse(bc),
                      1e-2, 0.2)
    peaks = [np.max(np.abs(f.values)) for f in run.fields]
    assert all(np.min(f.values) >= -1e-14 for f in run.fields)
    if k > 0 or bc != "mix:1.0":
        # V >= 0 and a nonpositive boundary term: no growth
        assert np.all(np.diff(peaks) <= 1e-12 * peaks[0])


def test_heat_at_critical_strength_is_confined():
    x = evolution_grid()
    p = Potential1D.inverse_square(0.75)
    bc = BoundaryCondition.parse("friedrichs")
    run = heat_evolve(p, _field(x, bump(x, 1.0, 0.5)), bc, 1e-3, 0.5, stride=50)
    assert np.all(np.diff(run.mass) <= 0)
    rep = confinement_report(run)
    assert rep["near_zero_exponent"][-1] >= 1.5 - 0.05
    # a coarser step gives the same final state
    coarse = heat_evolve(p, _field(x, bump(x, 1.0, 0.5)), bc, 2e-3, 0.5)
    fine, crude = run.fields[-1].values, coarse.fields[-1].values
    assert np.max(np.abs(fine - crude)) <= 2e-3 * np.max(np.abs(fine))


def test_free_heat_with_mix_reaches_boundary():
    x = evolution_grid()
    run = heat_evolve(Potential1D.inverse_square(0.0), _field(x, bump(x, 1.0, 0.5)),
                      BoundaryCondition.parse("mix:1.0"), 1e-3, 0.5)
    u = run.fields[-1].values
    assert u[0] > 0.05 * np.max(u)
    # psi_+ + psi_- = 1 + x: u'(0) = u(0)
    assert (u[1] - u[0]) / (x[1] - x[0]) == pytest.approx(u[0], rel=1e-3)


def test_results_insensitive_to_x_min():
    p = Potential1D.inverse_square(0.75)
    bc = BoundaryCondition.parse("friedrichs")
    out = []
    for x_min in (1e-4, 1e-5):
        x = evolution_grid(x_min)
        run = schrodinger_evolve(p, _field(x, wave_packet(x, 1.0, 0.15, -8.0)), bc, 1e-4, 0.1,
                                 x_min=x_min, stride=1000)
        d = np.abs(run.fields[-1].values) ** 2
        out.append((x, np.trapezoid(x * d, x) / np.trapezoid(d, x), d))
    assert out[0][1] == pytest.approx(out[1][1], rel=1e-2)
    d_fine = np.interp(out[0][0], out[1][0], out[1][2])
    assert np.max(np.abs(out[0][2] - d_fine)) <= 1e-2 * np.max(out[0][2])


def test_packet_reflects_at_critical_strength():
    x = evolution_grid()
    run = schrodinger_evolve(Potential1D.inverse_square(0.75), _field(x, wave_packet(x, 1.0, 0.15, -8.0)),
                             BoundaryCondition.parse("friedrichs"), 1e-4, 0.25, stride=25)
    pos, near = [], []
    for f in run.fields:
        d = np.abs(f.values) ** 2
        tot = np.trapezoid(d, x)
        pos.append(np.trapezoid(x * d, x) / tot)
        m = x <= 0.05
        near.append(np.trapezoid(d[m], x[m]) / tot)
    assert max(near) < 0.01
    turn = int(np.argmin(pos))
    assert 0 < turn < len(pos) - 1
    assert pos[-1] > pos[0]


def test_confinement_dichotomy_and_runtime():
    t0 = time.perf_counter()
    for k in DICHOTOMY_STRENGTHS:
        for bc in DICHOTOMY_CONDITIONS:
            rep = dichotomy_case(k, bc)
            confined = rep["max_relative_flux"] <= 1e-6
            assert confined == rep["expected_confined"], (k, bc)
            assert rep["verdict"] == ("confined" if confined else "leaking"), (k, bc)
    assert time.perf_counter() - t0 < 60.0


def test_zero_field_stays_zero():
    x = evolution_grid()
    run = heat_evolve(Potential1D.inverse_square(0.0), _field(x, np.zeros_like(x)),
                      BoundaryCondition.parse("mix:1.0"), 1e-2, 0.1)
    assert all(not np.any(f.values) for f in run.fields)
    rep = confinement_report(run)
    assert rep["max_relative_flux"] == 0.0 and rep["verdict"] == "confined"


def test_input_validation():
    x = evolution_grid()
    p = Potential1D.inverse_square(0.0)
    bc = BoundaryCondition.parse("friedrichs")
    with pytest.raises(ParameterError):
        heat_evolve(p, _field(x, wave_packet(x, 1.0, 0.2, 1.0)), bc, 1e-2, 0.1)
    with pytest.raises(ParameterError):
        heat_evolve(p, _field(x, bump(x, 1.0, 0.2)), bc, 0.03, 0.1)
    with pytest.raises(ParameterError):
        heat_evolve(p, _field(x, bump(x, 1.0, 0.2)), bc, -1.0, 0.1)


def test_snapshot_and_report_round_trip(tmp_path):
    x = evolution_grid()
    run = schrodinger_evolve(Potential1D.inverse_square(0.75), _field(x, wave_packet(x, 1.0, 0.15, -8.0)),
                             BoundaryCondition.parse("friedrichs"), 1e-3, 0.01, stride=5)
    path = write_snapshots(run, tmp_path / "run.csv")
    meta, times, xs, vals = read_snapshots(path)
    np.testing.assert_array_equal(times, run.times)
    np.testing.assert_array_equal(xs, run.x)
    np.testing.assert_array_equal(vals, np.array([f.values for f in run.fields]))
    assert meta["scheme"] == "schrodinger"
    rep = confinement_report(run)
    write_report(rep, tmp_path / "rep.json", tmp_path / "rep.csv")
    back = io.read_json(tmp_path / "rep.json")
    assert back["verdict"] == rep["verdict"]
    assert back["flux_at_zero"] == rep["flux_at_zero"]
    first = (tmp_path / "run.csv").read_bytes()
    write_snapshots(run, tmp_path / "run.csv")
    assert (tmp_path / "run.csv").read_bytes() == first
