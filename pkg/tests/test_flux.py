import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from translab import flux
from translab.errors import DomainError, InputError
from translab.exact import Plane
from translab.geometry import GraphPatch
from translab.grid import GridSpec, ScalarField2D, jet_field
from translab.solver import DirichletProblem, newton_solve

from conftest import GRIM, LN2, LN4

FLUX_EXACT = math.sqrt(15) / 4 - math.sqrt(3) / 2  # closed-form antiderivative sqrt(1 - e^{-2z})
RECT = flux.Rectangle(0.0, 1.0, LN2, LN4)


def flat(n=65, lo=-2.0, hi=2.0):
    return GraphPatch(Plane(0.0, 0.0).sample(GridSpec.square(lo, hi, lo, hi, n)))


def test_closed_form_value():
    assert FLUX_EXACT == pytest.approx(0.10222043276741566, abs=1e-16)


@pytest.mark.parametrize("region", [flux.Rectangle(0.0, 1.0, 0.0, 1.0), flux.Annulus((0.5, 0.5), 0.125, 0.375),
                                    flux.Disk((0.5, 0.5), 0.25)])
def test_plane_has_zero_flux_and_curvature(region):
    patch = GraphPatch(Plane(0.75, -1.0).sample(GridSpec.square(0, 1, 0, 1, 33)))
    assert flux.total_mean_curvature(patch, region) == 0.0
    assert abs(flux.boundary_flux(patch, flux.region_boundary(patch, region))) <= 1e-12


def test_grim_rectangle_both_sides():
    patch = GraphPatch(GRIM.sample(RECT.grid(65)))
    sides = flux.flux_sides(patch, RECT)
    assert sides["lhs"] == pytest.approx(FLUX_EXACT, abs=1e-4)
    assert sides["rhs"] == pytest.approx(FLUX_EXACT, abs=1e-3)


def test_analytic_and_grid_jets_agree_at_second_order():
    diffs = []
    for n in (129, 257):  # pre-asymptotic on coarser grids
        g = RECT.grid(n)
        S, Z = g.mesh()
        patch = GraphPatch(GRIM.sample(g))
        diffs.append(abs(flux.total_mean_curvature(patch, RECT) - flux.total_mean_curvature(patch, RECT, GRIM.jets(S, Z))))
    assert 3.0 <= diffs[0] / diffs[1] <= 5.0


def test_conormal_examples():
    np.testing.assert_allclose(flux.conormal([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0])
    with pytest.raises(InputError):
        flux.conormal([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    curve = flux.circle_curve(flat(), (0.0, 0.0), 1.0, n_theta=64)
    np.testing.assert_allclose(curve.conormals[0], [0.0, 1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(curve.conormals[:, 2], np.sin(curve.params), atol=1e-15)


def test_grim_circle_conormal_is_unit_and_tangent():
    u = GRIM.sample(GridSpec.square(-1.0, 1.0, 1.0, 3.0, 65))
    curve = flux.circle_curve(GraphPatch(u), (0.0, 2.0), 0.75)
    assert np.max(np.abs(np.sum(curve.conormals * curve.normals, axis=1))) <= 1e-12
    assert np.max(np.abs(np.linalg.norm(curve.conormals, axis=1) - 1)) <= 1e-12
    assert np.max(np.abs(np.linalg.norm(curve.normals, axis=1) - 1)) <= 1e-12
    assert len(curve.params) >= 64


@given(st.floats(0.1, 1.9))
def test_flat_circle_flux_vanishes(R):
    assert abs(flux.boundary_flux(flat(17), flux.circle_curve(flat(17), (0.0, 0.0), R, n_theta=128))) <= 1e-14


def test_open_curve_rejected():
    patch = flat(17)
    curve = flux.circle_curve(patch, (0.0, 0.0), 1.0, n_theta=64)
    from dataclasses import replace
    with pytest.raises(InputError):
        flux.boundary_flux(patch, replace(curve, closed=False))


def test_circle_outside_domain_rejected():
    with pytest.raises(DomainError):
        flux.circle_curve(flat(17), (0.0, 0.0), 2.5)


def test_additivity_over_split_rectangles():
    patch = GraphPatch(GRIM.sample(RECT.grid(65)))
    left, right = RECT.split_s(0.5)
    whole = flux.boundary_flux(patch, flux.rectangle_curve(patch, RECT))
    parts = sum(flux.boundary_flux(patch, flux.rectangle_curve(patch, r)) for r in (left, right))
    assert abs(whole - parts) <= 1e-10
    lhs_parts = sum(flux.total_mean_curvature(patch, r) for r in (left, right))
    assert abs(flux.total_mean_curvature(patch, RECT) - lhs_parts) <= 1e-12


def test_orientation_odd():
    u = GRIM.sample(GridSpec.square(-1.0, 1.0, 1.0, 3.0, 33))
    patch = GraphPatch(u)
    curve = flux.circle_curve(patch, (0.0, 2.0), 0.75)
    assert flux.boundary_flux(patch, curve.reversed()) == pytest.approx(-flux.boundary_flux(patch, curve), abs=1e-15)
    rect = flux.rectangle_curve(patch, flux.Rectangle(-1.0, 1.0, 1.0, 3.0))
    assert flux.boundary_flux(patch, rect.reversed()) == pytest.approx(-flux.boundary_flux(patch, rect), abs=1e-15)


def test_flux_gap_examples():
    plane_rep = flux.flux_gap(Plane(2.0, 1.0), flux.Rectangle(0.0, 1.0, 0.0, 1.0), levels=(17, 33, 65))
    assert plane_rep.passed and max(plane_rep.measured["gap"]) <= 1e-14
    rep = flux.flux_gap(GRIM, RECT, levels=(33, 65, 129), expected=FLUX_EXACT)
    assert rep.passed, rep.criteria
    assert all(1.7 <= p <= 2.3 for p in rep.orders["gap"])


def test_annulus_gap_converges():
    rep = flux.flux_gap(GRIM, flux.Annulus((0.0, 2.0), 0.25, 0.75), levels=(33, 65, 129), ratio_window=(3.0, math.inf))
    assert rep.passed, rep.measured
    assert rep.measured["gap"][-1] <= 1e-5


def test_non_translator_has_a_gap():
    g = GridSpec.square(0.0, 1.0, 0.0, 1.0, 65)
    S, Z = g.mesh()
    patch = GraphPatch(ScalarField2D.on_grid(g, 0.25 * S ** 2))
    rep = flux.flux_gap(patch, flux.Rectangle(0.0, 1.0, 0.0, 1.0))
    assert rep.measured["gap"][0] > 1e-2
    assert not rep.criteria["translator_premise"] and not rep.passed


def test_integrand_expansion_examples():
    rep = flux.integrand_expansion_check(flat(33), 1.0, (0.0, 0.0))
    assert rep.passed and rep.measured["max_deviation"] <= 1e-15
    assert abs(rep.measured["sin_term_integral"]) <= 1e-14
    g = GridSpec.square(-2.0, 2.0, -2.0, 2.0, 33)
    S, Z = g.mesh()
    bd = 0.05 * np.sin(S) * np.cosh(0.3 * Z) + 0.1
    zero = ScalarField2D.on_grid(g, np.zeros(g.shape))
    near, _ = newton_solve(DirichletProblem(g, bd, zero))
    rep = flux.integrand_expansion_check(GraphPatch(near), 1.5, (0.0, 0.0))
    assert rep.passed, rep.measured


def test_deviation_constant_by_brute_force():
    rng = np.random.default_rng(5)
    r = 0.5 * np.sqrt(rng.uniform(0, 1, 200_000))
    phi = rng.uniform(0, 2 * math.pi, r.size)
    th = rng.uniform(0, 2 * math.pi, r.size)
    us, uz = r * np.cos(phi), r * np.sin(phi)
    R = 1.0
    dev = np.abs(flux.polar_integrand_closed_form(R, th, us, uz) - R * np.sin(th))
    ratio = dev / (R * (us ** 2 + uz ** 2))
    # leading term is (|Du|^2 / 2) sin(theta - 2 arg Du), so the sharp constant is about 1/2
    assert ratio.max() <= 2.0
    assert 0.45 <= ratio.max() <= 0.55


@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0, 2 * math.pi), st.floats(0.5, 50))
def test_cross_product_equals_closed_form(us, uz, th, R):
    ut = -R * math.sin(th) * us + R * math.cos(th) * uz
    tangent = np.array([ut, -R * math.sin(th), R * math.cos(th)])
    W = math.sqrt(1 + us * us + uz * uz)
    nu = np.array([1.0, -us, -uz]) / W
    assert float(flux.cross_integrand(tangent, nu)) == pytest.approx(
        float(flux.polar_integrand_closed_form(R, th, us, uz)), abs=1e-12 * R * (1 + us * us + uz * uz))


def test_theta_sample_default():
    assert flux.default_theta_samples(1.0, 0.1) == 256
    assert flux.default_theta_samples(10.0, 0.01) == 8000
    with pytest.raises(InputError):
        flux.simpson_weights(4, 0.1)
    with pytest.raises(InputError):
        flux.Annulus((0.0, 0.0), 1.0, 0.5)
