import math

import numpy as np
import pytest

from translab.errors import DomainError, InputError
from translab.exact import GrimProfile, Plane, SineDecay, parse_fixture
from translab.geometry import translator_residual
from translab.grid import GridSpec, jet_field

from conftest import GRIM, LN2, LN4

# mpmath, 30 digits
DECAY_GRAD_R5 = 4.54019910096877683e-5
DZU_LN2 = 0.577350269189625765
DZZU_LN2 = -0.769800358919501019


def test_eval_examples():
    assert Plane(0.0, 0.0).eval(3.0, -2.0) == 0.0
    assert GRIM.eval(0.0, LN2) == pytest.approx(math.pi / 3, abs=1e-15)
    assert GRIM.eval(0.0, 60.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert GRIM.offset == math.pi / 2 and Plane(2.0, 1.0).offset == 1.0


def test_domain_errors():
    with pytest.raises(DomainError):
        GRIM.eval(0.0, 0.0)
    with pytest.raises(DomainError):
        GRIM.sample(GridSpec.square(0, 1, -0.5, 1, 5))
    with pytest.raises(DomainError):
        GRIM.decay_profile(0.0)
    with pytest.raises(InputError):
        GrimProfile(A=-1.0, B=0.0)


def test_analytic_jet_examples():
    j = Plane(2.0, 1.0).analytic_jet(0.3, 0.4)
    assert tuple(j.Du) == (2.0, 0.0) and not np.any(j.D2u)
    j = GRIM.analytic_jet(0.0, LN2)
    assert j.uz == pytest.approx(DZU_LN2, abs=1e-15)
    assert j.uzz == pytest.approx(DZZU_LN2, abs=1e-15)
    assert j.us == 0.0
    assert abs(translator_residual(j)) <= 1e-12


def test_analytic_jet_matches_finite_differences_of_eval():
    h = 1e-4
    for z in (0.3, LN2, 1.7, 4.0):
        d1 = (GRIM.eval(0.0, z + h) - GRIM.eval(0.0, z - h)) / (2 * h)
        d2 = (GRIM.eval(0.0, z + h) - 2 * GRIM.eval(0.0, z) + GRIM.eval(0.0, z - h)) / h ** 2
        j = GRIM.analytic_jet(0.0, z)
        assert d1 == pytest.approx(j.uz, rel=1e-7)
        assert d2 == pytest.approx(j.uzz, rel=1e-5)


@pytest.mark.parametrize("fixture", [GrimProfile(1.0, math.pi / 2), GrimProfile(0.5, 0.0), GrimProfile(3.0, -1.0),
                                     Plane(2.0, 1.0), Plane(-0.3, 5.0)])
def test_catalog_residual_vanishes_at_random_points(fixture):
    rng = np.random.default_rng(11)
    s = rng.uniform(-5, 5, 10_000)
    z_lo = getattr(fixture, "z_min", -5.0) + 1e-3
    z = rng.uniform(z_lo, z_lo + 10.0, 10_000)
    assert np.max(np.abs(translator_residual(fixture.jets(s, z)))) <= 1e-12


def test_sample_examples():
    u = Plane(1.0, 0.0).sample(GridSpec.square(0, 1, 0, 1, 3))
    np.testing.assert_array_equal(u.values, np.tile([[0.0], [0.5], [1.0]], (1, 3)))
    np.testing.assert_array_equal(Plane(0.0, 7.0).sample(GridSpec.square(0, 1, 0, 1, 4)).values, 7.0)


def test_sampled_grim_discrete_residual_is_second_order():
    sups = []
    for n in (17, 33, 65):
        u = GRIM.sample(GridSpec.square(0.0, 1.0, LN2, LN4, n))
        sups.append(float(np.max(np.abs(translator_residual(jet_field(u))[1:-1, 1:-1]))))
    slopes = [math.log2(a / b) for a, b in zip(sups, sups[1:])]
    assert all(1.8 <= p <= 2.2 for p in slopes)


def test_analytic_and_grid_jets_agree_to_second_order():
    errs = []
    for n in (33, 65):
        g = GridSpec.square(0.0, 1.0, LN2, LN4, n)
        S, Z = g.mesh()
        errs.append(float(np.max(np.abs(jet_field(GRIM.sample(g)).uz - GRIM.jets(S, Z).uz)[1:-1, 1:-1])))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_decay_profile_examples():
    u2, p2 = GRIM.decay_profile(5.0)
    assert p2 == pytest.approx(DECAY_GRAD_R5, rel=1e-12)
    assert u2 == pytest.approx(math.asin(math.exp(-5)) ** 2, rel=1e-12)
    weighted = [R * GRIM.decay_profile(R)[1] for R in (5, 10, 20)]
    assert weighted[0] > weighted[1] > weighted[2]
    assert GRIM.decay_profile(200.0)[1] < 1e-150
    assert Plane(0.5, 1.0).decay_profile(3.0)[1] == 0.25


@pytest.mark.parametrize("A", [0.5, 1.0, 2.0])
def test_decay_profile_against_brute_force_tail_sampling(A):
    fix = GrimProfile(A, 0.3)
    prev = (math.inf, math.inf)
    for R in np.linspace(math.log(A) + 0.2, math.log(A) + 6, 7):
        z = R + np.concatenate([[0.0], np.geomspace(1e-8, 50, 2000)])
        j = fix.jets(np.zeros_like(z), z)
        brute = (float(np.max((fix.eval(0.0, z) - 0.3) ** 2)), float(np.max(j.grad_sq())))
        closed = fix.decay_profile(R)
        assert closed == pytest.approx(brute, rel=1e-12)
        assert closed[0] <= prev[0] and closed[1] <= prev[1]
        prev = closed


def test_manufactured_field_jets():
    f = SineDecay(0.1)
    j = f.analytic_jet(0.7, 0.2)
    assert j.us == pytest.approx(0.1 * math.cos(0.7) * math.exp(-0.2))
    assert j.uss == pytest.approx(-f.eval(0.7, 0.2))


def test_parse_fixture():
    g = parse_fixture("grim:A=1,B=pi/2")
    assert isinstance(g, GrimProfile) and g.B == math.pi / 2
    assert parse_fixture("plane:a=2,c=1") == Plane(2.0, 1.0)
    assert isinstance(parse_fixture("grim:A=1"), GrimProfile)
    for bad in ("cone:a=1", "plane:a", "plane:q=1", "grim:A=foo()"):
        with pytest.raises(InputError):
            parse_fixture(bad)
