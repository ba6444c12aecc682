import math

import numpy as np
import pytest

from translab.errors import ConvergenceFailure, InputError
from translab.exact import AnalyticField, Plane, SineDecay
from translab.geometry import translator_residual
from translab.grid import GridSpec, JetField, ScalarField2D
from translab.solver import (DirichletProblem, SolveOptions, assemble_residual, coons_guess, manufactured_forcing,
                             max_error, newton_solve)

from conftest import GRIM, LN2, LN8


class Height(AnalyticField):
    """u = z."""

    def _value(self, s, z):
        return z + 0.0 * s

    def _jets(self, s, z):
        s, z = np.broadcast_arrays(np.asarray(s, float), np.asarray(z, float))
        zero = np.zeros_like(s)
        return JetField(z.copy(), zero, np.ones_like(s), zero, zero, zero)


def grim_grid(n):
    return GridSpec.square(0.0, 1.0, LN2, LN8, n)


def test_plane_recovered_exactly():
    g = GridSpec.square(0.0, 1.0, 0.0, 1.0, 33)
    u, rep = newton_solve(DirichletProblem.from_fixture(Plane(2.0, 1.0), g))
    assert rep.converged and rep.iterations <= 2 and rep.final_residual <= 1e-13
    assert max_error(u, Plane(2.0, 1.0), interior_only=False) <= 1e-13


def test_assemble_residual_examples():
    g = GridSpec.square(0.0, 1.0, 0.0, 1.0, 17)
    prob = DirichletProblem.from_fixture(Plane(-0.75, 0.5), g)
    assert not np.any(assemble_residual(Plane(-0.75, 0.5).sample(g), prob).values)
    sups = []
    for n in (17, 33, 65):
        prob = DirichletProblem.from_fixture(GRIM, grim_grid(n))
        res = assemble_residual(GRIM.sample(grim_grid(n)), prob).values
        assert not np.any(res[0]) and not np.any(res[:, -1])
        sups.append(float(np.abs(res).max()))
    assert all(3.5 <= a / b <= 4.5 for a, b in zip(sups, sups[1:]))
    with pytest.raises(InputError):
        assemble_residual(GRIM.sample(grim_grid(9)), prob)


def test_manufactured_forcing_examples():
    g = GridSpec.square(0.0, 1.0, 0.0, 1.0, 9)
    assert not np.any(manufactured_forcing(Plane(3.0, -2.0), g).values)
    np.testing.assert_array_equal(manufactured_forcing(Height(), g).values, 1.0)
    mms = SineDecay(0.1)
    S, Z = g.mesh()
    F = manufactured_forcing(mms, g).values
    assert np.max(np.abs(translator_residual(mms.jets(S, Z), F))) <= 1e-15


def test_manufactured_solution_recovered_at_second_order():
    mms = SineDecay(0.1)
    errs = []
    for n in (17, 33, 65):
        g = grim_grid(n)
        u, rep = newton_solve(DirichletProblem.from_fixture(mms, g, manufactured_forcing(mms, g)))
        assert rep.converged
        errs.append(max_error(u, mms))
    assert all(3.5 <= a / b <= 4.5 for a, b in zip(errs, errs[1:]))


def test_grim_solve_report_invariants():
    u, rep = newton_solve(DirichletProblem.from_fixture(GRIM, grim_grid(33)))
    assert rep.converged and rep.final_residual <= 1e-10
    assert rep.final_residual == rep.residual_history[-1]
    assert all(b < a for a, b in zip(rep.residual_history, rep.residual_history[1:]))
    assert max_error(u, GRIM) < 1e-5
    assert rep.quadratic_constant is not None
    d = rep.to_dict()
    assert d["iterations"] == rep.iterations


def test_solve_is_bitwise_deterministic():
    prob = DirichletProblem.from_fixture(GRIM, grim_grid(17))
    a, ra = newton_solve(prob)
    b, rb = newton_solve(prob)
    np.testing.assert_array_equal(a.values, b.values)
    assert ra.residual_history == rb.residual_history


def test_discrete_maximum_principle_smoke():
    g = grim_grid(33)
    u, _ = newton_solve(DirichletProblem.from_fixture(GRIM, g))
    bd = GRIM.sample(g).values
    edge = np.ones(g.shape, bool)
    edge[1:-1, 1:-1] = False
    m, M = bd[edge].min(), bd[edge].max()
    c = 1.0
    h = max(g.h_s, g.h_z)
    assert m - c * h <= u.values.min() and u.values.max() <= M + c * h


def test_non_convergence_carries_report():
    prob = DirichletProblem.from_fixture(GRIM, grim_grid(9))
    with pytest.raises(ConvergenceFailure) as info:
        newton_solve(prob, SolveOptions(max_iter=0))
    assert info.value.report is not None and not info.value.report.converged


def test_problem_validation():
    g = grim_grid(9)
    zero = ScalarField2D.on_grid(g, np.zeros(g.shape))
    with pytest.raises(InputError):
        DirichletProblem(g, np.zeros((8, 9)), zero)
    bad = np.zeros(g.shape)
    bad[0, 0] = math.inf
    with pytest.raises(InputError):
        DirichletProblem(g, bad, zero)


def test_coons_guess_exact_for_affine_data():
    g = GridSpec(0.0, 2.0, -1.0, 1.0, 9, 7)
    S, Z = g.mesh()
    exact = 0.5 - S + 2 * Z + 0.25 * S * Z
    np.testing.assert_allclose(coons_guess(g, exact), exact, atol=1e-14)
