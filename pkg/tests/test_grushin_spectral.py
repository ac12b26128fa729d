import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushinlab.errors import InconclusiveError, ModeCouplingError, ParameterError
from grushinlab.frames import FrameProfile, Phi
from grushinlab.grids import Field2D, inner_product
from grushinlab.grushin_spectral import (
    CurvatureLaplacianSpec,
    Rule,
    TransformedOperator,
    alpha_boundaries,
    alpha_boundaries_closed_form,
    build_witness,
    check_witness,
    classify_alpha_grushin,
    closure_membership_test,
    adjoint_membership_test,
    conjugation_errors,
    cutoff,
    esa_by_rule,
    glue_to_manifold,
    k_strength,
    mode_family,
    normalized_gram,
    power_witness,
    read_witness_csv,
    region_map,
    region_map_by_rule,
    transform_operator,
    weak_image_norms,
    witness_exponent,
    write_region_csv,
    write_witness_csv,
)
from grushinlab.sturm1d import Endpoint, Potential1D, classify_zero_numeric
from grushinlab import io

FLAT = FrameProfile.grushin()
SEP = FrameProfile.grushin(Phi.separable(0.4))


def test_k_strength_examples():
    assert k_strength(1, 0) == 0.75
    assert k_strength(1, 3 / 8) == 0.0
    assert k_strength(3, 0.25) == 0.75


def test_alpha_boundaries_examples():
    b = alpha_boundaries(0.0)
    assert b.upper == pytest.approx(1.0, abs=1e-12) and b.lower == pytest.approx(-3.0, abs=1e-12)
    d = alpha_boundaries(2 - math.sqrt(3))
    assert d.upper == pytest.approx(3 + 2 * math.sqrt(3), abs=1e-10)
    assert d.lower == pytest.approx(3 + 2 * math.sqrt(3), abs=1e-10)
    assert alpha_boundaries(1.0) is None
    q = alpha_boundaries(0.25)
    assert q.degenerate and q.upper == 3.0 and math.isinf(q.lower)
    with pytest.raises(ParameterError):
        alpha_boundaries(-0.1)


def test_boundaries_match_closed_form():
    rng = np.random.default_rng(20)
    cs = np.concatenate([rng.uniform(0, 2 - math.sqrt(3), 100), rng.uniform(2 + math.sqrt(3), 5, 100)])
    for c in cs:
        ours = sorted(alpha_boundaries(c)[:2])
        ref = sorted(alpha_boundaries_closed_form(c))
        np.testing.assert_allclose(ours, ref, rtol=1e-12)


@settings(max_examples=300)
@given(st.floats(0, 6), st.floats(-10, 10))
def test_boundaries_are_roots_and_separate_regions(c, alpha):
    b = alpha_boundaries(c)
    if b is not None and not b.degenerate:
        for r in b[:2]:
            assert k_strength(r, c) == pytest.approx(0.75, abs=1e-9 * (1 + r * r))
    assert bool(esa_by_rule(alpha, c)) == (k_strength(alpha, c) >= 0.75) or \
        abs(k_strength(alpha, c) - 0.75) < 1e-9


def test_classify_examples():
    assert not classify_alpha_grushin(1, 0.2).essentially_self_adjoint
    assert classify_alpha_grushin(4, 0.25).essentially_self_adjoint
    v = classify_alpha_grushin(-1, 0)
    assert not v.essentially_self_adjoint and v.k_strength == -0.25
    assert classify_alpha_grushin(1, 0).essentially_self_adjoint
    assert classify_alpha_grushin(3, 0.25).rule == Rule.QUARTER_EXACTLY
    assert classify_alpha_grushin(0, 1.0).rule == Rule.COMPLEX_BAND
    assert classify_alpha_grushin(0, 0.26).rule == Rule.QUARTER_TO_LEFT
    assert classify_alpha_grushin(0, 4.0).rule == Rule.ABOVE_RIGHT


def test_grushin_cylinder_only_c_zero():
    for c in np.arange(1, 10) * 0.05:
        assert not classify_alpha_grushin(1.0, c).essentially_self_adjoint


def test_region_map_examples():
    g = region_map()
    assert g.esa.shape == (420, 1300)
    assert np.array_equal(region_map_by_rule(g), g.esa)
    row0 = g.esa[0]
    assert g.c[0] == 0.0
    assert not row0[(g.alpha > -3) & (g.alpha < 1)].any()
    assert row0[(g.alpha > 1) | (g.alpha < -3)].all()
    band = (g.c > 2 - math.sqrt(3)) & (g.c < 2 + math.sqrt(3))
    assert not g.esa[band].any()
    assert g.esa[g.c < 2 - math.sqrt(3)].any() and g.esa[g.c > 2 + math.sqrt(3)].any()
    assert not any(esa_by_rule(np.linspace(-5, 8, 50), 1.0))
    v = g.verdict(3, 7)
    assert v == classify_alpha_grushin(g.alpha[7], g.c[3])


def test_region_map_independent_of_threads(monkeypatch):
    monkeypatch.setenv("GRUSHINLAB_THREADS", "1")
    a = region_map(resolution=(101, 57))
    monkeypatch.setenv("GRUSHINLAB_THREADS", "4")
    b = region_map(resolution=(101, 57))
    for x, y in zip(a.columns(), b.columns()):
        assert np.array_equal(x, y)
    with pytest.raises(ParameterError):
        region_map(resolution=(1, 5))


def test_region_csv(tmp_path):
    g = region_map(resolution=(4, 3))
    meta, cols = io.read_csv(write_region_csv(g, tmp_path / "m.csv"))
    assert cols["alpha"].size == 12
    np.testing.assert_array_equal(cols["c"][:4], np.zeros(4))
    assert set(cols["rule"]) <= {r.label for r in Rule}


@settings(max_examples=15, deadline=None)
@given(st.floats(-5, 8), st.floats(0, 4.2))
def test_numeric_oracle_agrees_with_region(alpha, c):
    k = k_strength(alpha, c)
    if abs(k - 0.75) <= 0.05 or k < -50:
        return
    lp = classify_zero_numeric(Potential1D.inverse_square(k)) == Endpoint.LIMIT_POINT
    assert lp == classify_alpha_grushin(alpha, c).essentially_self_adjoint


def test_transform_examples():
    op = transform_operator(CurvatureLaplacianSpec(FLAT, 0.3))
    assert op.g2 == pytest.approx(0.15)
    ys = np.linspace(0, 6, 7)
    assert np.all(op.g1_of_y(ys) == 0)
    assert np.all(op.eta_c(np.full(7, 0.3), ys) == 0)
    lin = transform_operator(CurvatureLaplacianSpec(FrameProfile.grushin(Phi.linear(0.8)), 0.1))
    np.testing.assert_allclose(lin.g1_of_y(ys), (1 - 0.4) * 0.8 / 2, rtol=1e-12)
    minus = TransformedOperator(CurvatureLaplacianSpec(FrameProfile.grushin(Phi.linear(0.8)), 0.1), "minus")
    np.testing.assert_allclose(minus.g1_of_y(ys), -(1 - 0.4) * 0.8 / 2, rtol=1e-12)
    with pytest.raises(ParameterError):
        transform_operator(CurvatureLaplacianSpec(FLAT, 0.6))
    with pytest.raises(ParameterError):
        transform_operator(CurvatureLaplacianSpec(FrameProfile.riemannian(), 0.3))


def test_mode_potentials():
    op = transform_operator(CurvatureLaplacianSpec(FrameProfile.grushin(Phi.linear(0.5)), 0.3))
    p0 = op.mode_potential(0)
    assert p0.k == pytest.approx(0.15) and p0.g1 == pytest.approx(-0.05)
    assert classify_zero_numeric(p0) == Endpoint.LIMIT_CIRCLE
    p3 = op.mode_potential(3)
    x = np.array([0.5, 1.0])
    eta = (0.25 - 0.3) * 0.25
    np.testing.assert_allclose(p3(x), 0.15 / x**2 + (-0.1) * 0.5 / x + eta + 9 * x**2 * np.exp(x),
                               rtol=1e-12)
    with pytest.raises(ModeCouplingError):
        transform_operator(CurvatureLaplacianSpec(SEP, 0.3)).mode_potential(0)


@pytest.mark.parametrize("profile", [FLAT, SEP], ids=["flat", "separable"])
@pytest.mark.parametrize("c", [0.1, 0.3])
def test_conjugation_is_second_order(profile, c):
    errors, orders = conjugation_errors(CurvatureLaplacianSpec(profile, c))
    assert np.all(orders >= 1.8), (errors, orders)


def test_cutoff():
    x = np.array([0.01, 0.05, 0.075, 0.1, 0.2])
    np.testing.assert_array_equal(cutoff(x, 0.1)[[0, 1, 3, 4]], [1, 1, 0, 0])
    assert cutoff(0.075, 0.1) == pytest.approx(0.5)
    xs = np.linspace(0.05, 0.1, 1001)
    assert np.all(np.diff(cutoff(xs, 0.1)) <= 0)


def test_witness_examples():
    w = build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "plus")
    a = 0.5 + math.sqrt(0.4)
    assert w.alpha_exponent == pytest.approx(a, abs=1e-14)
    assert a == pytest.approx(1.13246, abs=1e-5)
    s = w.samples.x
    np.testing.assert_allclose(w.samples.values[:, 5], s**a * cutoff(s, 0.1), rtol=1e-14)
    log = build_witness(CurvatureLaplacianSpec(FLAT, 3 / 8), "plus")
    assert log.log_case
    np.testing.assert_allclose(log.samples.values[:, 0], s * cutoff(s, 0.1), rtol=1e-15)
    for sign in ("plus", "minus"):
        for side in ("plus", "minus"):
            w = build_witness(CurvatureLaplacianSpec(SEP, 0.2), sign, side=side)
            assert np.all(w.samples.values[w.samples.x >= w.epsilon] == 0)
    with pytest.raises(ParameterError):
        build_witness(CurvatureLaplacianSpec(FLAT, 0.5), "plus")
    with pytest.raises(ParameterError):
        build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "up")


@pytest.mark.parametrize("c", [0.1, 0.2, 0.3, 0.4, 0.45])
def test_witness_exponents(c):
    for sign, s in (("plus", 1), ("minus", -1)):
        w = build_witness(CurvatureLaplacianSpec(FLAT, c), sign)
        assert witness_exponent(w) == pytest.approx(0.5 + s * math.sqrt(1 - 2 * c), abs=1e-3)


@pytest.mark.parametrize("profile", [FLAT, SEP, FrameProfile.grushin(Phi.linear(0.5))],
                         ids=["flat", "separable", "linear"])
@pytest.mark.parametrize("c", [0.1, 0.3, 0.375, 0.45])
def test_witness_dichotomy(profile, c):
    spec = CurvatureLaplacianSpec(profile, c)
    for sign in ("plus", "minus"):
        for side in ("plus", "minus"):
            w = build_witness(spec, sign, side=side)
            assert adjoint_membership_test(w, spec)
            assert not closure_membership_test(w)


def test_fake_witness_and_closure_probes():
    spec = CurvatureLaplacianSpec(FLAT, 0.3)
    fake = power_witness(-0.7, spec)
    assert not adjoint_membership_test(fake, spec)
    norms = weak_image_norms(fake, spec)
    # image ~ x^-2.7: squared norm grows ~ 10^4.4 per decade
    assert np.all(np.diff(np.log10(norms)) > 3)
    assert not closure_membership_test(power_witness(1.5, spec))
    assert closure_membership_test(power_witness(2.0, spec))


def test_closure_needs_deep_samples():
    w = build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "plus", x_min=1e-3)
    with pytest.raises(InconclusiveError):
        closure_membership_test(w)


def test_glue_examples():
    w = build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "plus")
    g = glue_to_manifold(w, (-4, 4))
    assert g.x[0] == -4 and g.x[-1] == 4 and np.all(np.diff(g.x) > 0)
    assert np.all(g.values[(g.x >= 0.1) | (g.x <= 0)] == 0)
    test = Field2D(g.x, g.y, np.where(g.x[:, None] < 0, np.exp(-g.x[:, None] ** 2), 0.0)
                   * np.ones(g.y.size))
    assert inner_product(g, test) == 0
    wm = build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "plus", side="minus")
    gm = glue_to_manifold(wm)
    assert np.all(gm.values[(gm.x <= -0.1) | (gm.x >= 0)] == 0)
    assert gm.values[gm.x < 0].any()
    up = glue_to_manifold(w, untransform=True)
    inside = (up.x > 0) & (up.x < 0.05)
    np.testing.assert_allclose(up.values[inside, 0], np.sqrt(up.x[inside]) * g.values[inside, 0])


def test_mode_family_rank():
    w = build_witness(CurvatureLaplacianSpec(FLAT, 0.3), "plus")
    fam = mode_family(w, range(10))
    sv = np.linalg.svd(normalized_gram(fam), compute_uv=False)
    assert sv.min() > 1e-8
    assert np.linalg.matrix_rank(normalized_gram(fam), tol=1e-8) == 10


def test_witness_csv_round_trip(tmp_path):
    for side in ("plus", "minus"):
        w = build_witness(CurvatureLaplacianSpec(SEP, 0.3), "minus", side=side)
        back = read_witness_csv(write_witness_csv(w, tmp_path / f"w_{side}.csv"))
        np.testing.assert_array_equal(back.samples.x, w.samples.x)
        np.testing.assert_array_equal(back.samples.values, w.samples.values)
        assert (back.sign, back.side, back.c, back.epsilon) == (w.sign, w.side, w.c, w.epsilon)
        assert back.profile == w.profile
    report = check_witness(back)
    assert report["adjoint_member"] and not report["closure_member"]
    assert report["alpha_fit"] == pytest.approx(0.5 - math.sqrt(0.4), abs=1e-3)


def test_read_witness_rejects_malformed(tmp_path):
    path = io.write_csv(tmp_path / "bad.csv", ["x", "y", "value"], [[1.0], [0.0], [0.0]], {"sign": "plus"})
    with pytest.raises(ParameterError):
        read_witness_csv(path)
