import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from translab import geometry
from translab.errors import InputError
from translab.exact import Plane
from translab.geometry import (E3, VerticalPlaneChart, area_element, coeff_matrix, mean_curvature,
                               tangential_part, trace_a_hessian, translator_residual, unit_normal)
from translab.grid import Jet2

from conftest import GRIM, LN2

slopes = st.floats(-1e3, 1e3, allow_nan=False)
curv = st.floats(-1e2, 1e2, allow_nan=False)


def jet(us=0.0, uz=0.0, uss=0.0, usz=0.0, uzz=0.0):
    return Jet2.from_components(0.0, us, uz, uss, usz, uzz)


@pytest.mark.parametrize("Du, expected", [
    ((0.0, 0.0), (1.0, 0.0, 0.0)),
    ((0.0, 1 / math.sqrt(3)), (math.sqrt(3) / 2, 0.0, -0.5)),
    ((3.0, 4.0), tuple(np.array([1.0, -3.0, -4.0]) / math.sqrt(26))),
])
def test_unit_normal_examples(Du, expected):
    np.testing.assert_allclose(unit_normal(jet(*Du)), expected, atol=1e-15)


def test_coeff_matrix_examples():
    np.testing.assert_array_equal(coeff_matrix(jet()), np.eye(2))
    np.testing.assert_allclose(coeff_matrix(jet(0.0, 1 / math.sqrt(3))), np.diag([1.0, 0.75]), atol=1e-15)
    rng = np.random.default_rng(7)
    for th in rng.uniform(0, 2 * math.pi, 20):
        ev = np.linalg.eigvalsh(coeff_matrix(jet(math.cos(th), math.sin(th))))
        assert ev[0] == pytest.approx(0.5, abs=1e-14)


def test_translator_residual_examples():
    for a, c in [(2.0, 1.0), (-3.5, 0.0), (0.0, 7.0)]:
        j = Plane(a, c).analytic_jet(0.3, -1.2)
        assert translator_residual(j) == 0.0
    assert translator_residual(jet(0.0, 1.0)) == 1.0
    assert abs(translator_residual(GRIM.analytic_jet(0.0, LN2))) <= 1e-12
    assert translator_residual(jet(0.0, 1.0), forcing=1.0) == 0.0


def test_mean_curvature_examples():
    assert mean_curvature(jet()) == 0.0
    j = GRIM.analytic_jet(0.0, LN2)
    assert abs(mean_curvature(j)) == pytest.approx(0.5, abs=1e-14)
    # translator relation H = -u_z / W
    assert mean_curvature(j) == pytest.approx(-j.uz / area_element(j), abs=1e-14)
    assert mean_curvature(jet(uss=1.0, uzz=1.0)) == 2.0


def test_tangential_part_examples():
    nu = np.array([math.sqrt(3) / 2, 0.0, -0.5])
    np.testing.assert_allclose(tangential_part(nu, nu), 0.0, atol=1e-15)
    v = np.array([0.0, 2.0, 0.0])
    np.testing.assert_array_equal(tangential_part(v, nu), v)
    np.testing.assert_allclose(tangential_part(E3, nu), [math.sqrt(3) / 4, 0.0, 0.75], atol=1e-15)
    with pytest.raises(InputError):
        tangential_part(E3, [1.0, 1.0, 0.0])


def test_area_element_examples():
    assert area_element(jet()) == 1.0
    assert area_element(jet(3.0, 4.0)) == pytest.approx(math.sqrt(26), rel=1e-15)
    assert area_element(jet(0.0, 1 / math.sqrt(3))) == pytest.approx(2 / math.sqrt(3), rel=1e-15)


@given(slopes, slopes)
def test_unit_normal_is_unit_with_positive_normal_component(us, uz):
    nu = unit_normal(jet(us, uz))
    assert abs(np.linalg.norm(nu) - 1.0) <= 1e-14
    assert nu[0] > 0


@given(slopes, slopes)
def test_coeff_matrix_spectrum(us, uz):
    a = coeff_matrix(jet(us, uz))
    W2 = 1 + us * us + uz * uz
    assert a[0, 1] == a[1, 0]
    ev = np.linalg.eigvalsh(a)
    np.testing.assert_allclose(ev, sorted([1.0 / W2, 1.0]), rtol=1e-9, atol=1e-12)
    assert np.linalg.norm(a) <= math.sqrt(2) + 1e-12


@given(slopes, slopes, curv, curv, curv)
def test_curvature_and_residual_relations(us, uz, uss, usz, uzz):
    j = jet(us, uz, uss, usz, uzz)
    a = coeff_matrix(j)
    tr = float(np.sum(a * j.D2u))
    scale = 1.0 + abs(tr) + abs(uss) + abs(usz) + abs(uzz)
    assert trace_a_hessian(j) == pytest.approx(tr, abs=1e-12 * scale)
    assert mean_curvature(j) * area_element(j) == pytest.approx(tr, abs=1e-12 * scale)
    assert translator_residual(j) == pytest.approx(mean_curvature(j) * area_element(j) + uz, abs=1e-12 * scale)


@given(st.floats(0, 2 * math.pi))
def test_chart_frame_is_orthonormal_and_right_handed(angle):
    chart = VerticalPlaneChart(origin=(1.0, 2.0, 3.0), e_s=(math.cos(angle), math.sin(angle), 0.0))
    F = chart.frame()
    np.testing.assert_allclose(F @ F.T, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(chart.e_z, E3)
    np.testing.assert_allclose(np.cross(chart.e_s, E3), chart.e_n, atol=1e-15)
    p = chart.embed(0.5, 0.25, -1.0)
    np.testing.assert_allclose(p, np.array([1.0, 2.0, 3.0]) + 0.5 * chart.e_n + 0.25 * chart.e_s - E3, atol=1e-14)


def test_drop_dz_hook_is_scoped():
    j = jet(0.0, 1.0)
    with geometry.drop_dz_term():
        assert translator_residual(j) == 0.0
    assert translator_residual(j) == 1.0
