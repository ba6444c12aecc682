import math

import numpy as np
import pytest

from translab.errors import DomainError, InputError
from translab.exact import Plane
from translab.flow import FlowState, evolve, stable_dt, step, translated_boundary, translation_error, translation_run
from translab.geometry import trace_a_hessian
from translab.grid import GridSpec, ScalarField2D, jet_field

from conftest import GRIM, LN2, LN8


def grid(n):
    return GridSpec.square(0.0, 1.0, LN2, LN8, n)


def test_plane_is_a_fixed_point():
    u = Plane(0.75, -1.0).sample(GridSpec.square(0.0, 1.0, 0.0, 1.0, 17))
    st = FlowState(u, 0.0, stable_dt(u))
    for _ in range(20):
        st = step(st)
    assert np.max(np.abs(st.u.values - u.values)) <= 1e-14
    assert st.t == pytest.approx(20 * stable_dt(u))


def test_single_step_arithmetic():
    g = GridSpec.square(-1.0, 1.0, -1.0, 1.0, 9)
    S, Z = g.mesh()
    u = ScalarField2D.on_grid(g, 0.5 * (S ** 2 + Z ** 2) + 0.1 * S)
    dt = stable_dt(u) / 2
    new = step(FlowState(u, 0.0, dt))
    expected = u.values + dt * trace_a_hessian(jet_field(u))
    np.testing.assert_allclose(new.u.values[1:-1, 1:-1], expected[1:-1, 1:-1], atol=1e-14)
    np.testing.assert_array_equal(new.u.values[0], u.values[0])


def test_stability_cap_enforced():
    u = GRIM.sample(grid(17))
    with pytest.raises(InputError):
        FlowState(u, 0.0, 1.01 * stable_dt(u))
    with pytest.raises(InputError):
        FlowState(u, -1.0, stable_dt(u))


def test_translation_error_examples():
    u = GRIM.sample(grid(17))
    assert translation_error(FlowState(u, 0.0, stable_dt(u)), GRIM) == 0.0
    with pytest.raises(DomainError):
        translation_error(FlowState(u, 5.0, stable_dt(u)), GRIM)


def test_translator_moves_vertically():
    errs = []
    for n in (17, 33):
        final, snaps, series = translation_run(GRIM, grid(n), 0.05)
        assert final.t == pytest.approx(0.05, abs=1e-15)
        errs.append(series[-1][1])
    assert errs[1] < 1e-4
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_evolve_snapshots_and_determinism():
    u = GRIM.sample(grid(17))
    st = FlowState(u, 0.0, stable_dt(u) / 2)
    rule = translated_boundary(GRIM)
    a = evolve(st, 0.01, rule, snapshot_every=10, monitor=lambda s: translation_error(s, GRIM))
    b = evolve(st, 0.01, rule, snapshot_every=10, monitor=lambda s: translation_error(s, GRIM))
    np.testing.assert_array_equal(a[0].u.values, b[0].u.values)
    assert a[1][0][0] == 0.0 and a[1][-1][0] == pytest.approx(0.01)
    n_steps = math.ceil(0.01 / st.dt - 1e-9)
    assert len(a[1]) == 1 + n_steps // 10 + (n_steps % 10 != 0)
    with pytest.raises(InputError):
        evolve(a[0], 0.0)
