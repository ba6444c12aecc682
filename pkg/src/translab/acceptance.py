"""The acceptance suite: one function per criterion, each returning a CheckReport.

Shared by ``tests/test_acceptance.py`` and the ``all`` CLI subcommand.
"""

from __future__ import annotations

import math

import numpy as np

from translab import bernstein, flux
from translab.errors import HypothesisFailure
from translab.exact import GrimProfile, Plane, SineDecay
from translab.flow import translation_error, translation_run
from translab.geometry import GraphPatch, drop_dz_term, translator_residual
from translab.grid import GridSpec, jet_field
from translab.report import CheckReport, ratios, refinement_orders, timed
from translab.solver import DirichletProblem, manufactured_forcing, max_error, newton_solve

LN2, LN4, LN8 = math.log(2), math.log(4), math.log(8)
GRIM = GrimProfile(A=1.0, B=math.pi / 2)
FLUX_EXACT = math.sqrt(15) / 4 - math.sqrt(3) / 2
LEVELS = (33, 65, 129)


def flux_identity(levels=LEVELS) -> CheckReport:
    rep = flux.flux_gap(GRIM, flux.Rectangle(0.0, 1.0, LN2, LN4), levels=levels, expected=FLUX_EXACT,
                        gap_tol=5e-4, value_tol=1e-3, ratio_window=(3.0, 5.0))
    rep.name = "1_flux_identity"
    return rep


# Dyadic slopes, offsets and spacings keep every finite difference exact.
PLANES = (Plane(2.0, 1.0), Plane(0.0, 7.0), Plane(-0.5, 0.25), Plane(0.75, -1.0))


def plane_exactness(n: int = 33, tol: float = 1e-13) -> CheckReport:
    rep = CheckReport("2_plane_exactness", inputs={"planes": [p.describe() for p in PLANES], "n": n})
    with timed(rep):
        rect = flux.Rectangle(0.0, 1.0, 0.0, 1.0)
        worst = {"residual": 0.0, "total_mean_curvature": 0.0, "rectangle_flux": 0.0,
                 "circle_flux": 0.0, "L_u": 0.0, "L_usq_identity": 0.0}
        for plane in PLANES:
            u = plane.sample(rect.grid(n))
            patch = GraphPatch(u)
            jets = jet_field(u)
            worst["residual"] = max(worst["residual"], float(np.abs(translator_residual(jets)).max()))
            worst["total_mean_curvature"] = max(worst["total_mean_curvature"],
                                                abs(flux.total_mean_curvature(patch, rect, jets)))
            worst["rectangle_flux"] = max(worst["rectangle_flux"],
                                          abs(flux.boundary_flux(patch, flux.rectangle_curve(patch, rect, jets))))
            worst["circle_flux"] = max(worst["circle_flux"],
                                       abs(flux.boundary_flux(patch, flux.circle_curve(patch, (0.5, 0.5), 0.375))))
            worst["L_u"] = max(worst["L_u"], float(np.abs(bernstein.apply_L(u, u).values).max()))
            ident = bernstein.check_L_usq_identity(u, offset=0.0)
            worst["L_usq_identity"] = max(worst["L_usq_identity"], ident.measured["sup_difference"][-1])
        rep.measured = worst
        rep.tolerance = {"all": tol}
        for key, val in worst.items():
            rep.require(key, val <= tol)
    return rep


def solver_convergence(levels=(65, 129), ratio_window=(3.5, 4.5), tol=1e-10, max_iter=8) -> CheckReport:
    rep = CheckReport("3_solver_convergence", inputs={"levels": list(levels), "rect": [0.0, 1.0, LN2, LN8],
                                                      "manufactured": "0.1 sin(s) exp(-z)"})
    with timed(rep):
        mms = SineDecay(0.1)
        for label, fixture in (("grim", GRIM), ("manufactured", mms)):
            errors, iters, finals = [], [], []
            for n in levels:
                grid = GridSpec.square(0.0, 1.0, LN2, LN8, n)
                forcing = manufactured_forcing(fixture, grid) if fixture is mms else None
                sol, sr = newton_solve(DirichletProblem.from_fixture(fixture, grid, forcing))
                errors.append(max_error(sol, fixture))
                iters.append(sr.iterations)
                finals.append(sr.final_residual)
            q = ratios(errors)
            rep.measured[label] = {"max_error": errors, "iterations": iters, "final_residual": finals, "ratios": q}
            rep.orders[label] = refinement_orders(errors)
            rep.require(f"{label}_residual", all(r <= tol for r in finals))
            rep.require(f"{label}_iterations", all(i <= max_iter for i in iters))
            rep.require(f"{label}_order", all(ratio_window[0] <= x <= ratio_window[1] for x in q))
        rep.tolerance = {"residual": tol, "iterations": max_iter, "ratio_window": list(ratio_window)}
    return rep


def integrand_identity(n_random: int = 10_000, seed: int = 20240917) -> CheckReport:
    """Cross-product integrand vs its expanded closed form, and the 2 R |Du|^2 deviation bound."""
    rep = CheckReport("4_integrand_identity", inputs={"n_random": n_random, "seed": seed})
    with timed(rep):
        rng = np.random.default_rng(seed)
        R = rng.uniform(1.0, 10.0, n_random)
        th = rng.uniform(0.0, 2 * math.pi, n_random)
        rad = 0.5 * np.sqrt(rng.uniform(0.0, 1.0, n_random))
        ang = rng.uniform(0.0, 2 * math.pi, n_random)
        us, uz = rad * np.cos(ang), rad * np.sin(ang)
        W = np.sqrt(1 + us ** 2 + uz ** 2)
        u_theta = -R * np.sin(th) * us + R * np.cos(th) * uz
        tangent = np.stack([u_theta, -R * np.sin(th), R * np.cos(th)], axis=1)
        nu = np.stack([1 / W, -us / W, -uz / W], axis=1)
        cross = flux.cross_integrand(tangent, nu)
        closed = flux.polar_integrand_closed_form(R, th, us, uz)
        dev_ratio = np.abs(cross - R * np.sin(th)) / (R * (us ** 2 + uz ** 2))
        rep.measured["max_identity_error"] = float(np.max(np.abs(cross - closed)))
        rep.measured["max_deviation_ratio"] = float(dev_ratio.max())

        # a solver-produced near-plane field, sampled on a circle
        grid = GridSpec.square(-1.5, 1.5, 0.5, 3.5, 65)
        near_plane = GrimProfile(A=0.2, B=0.0)
        sol, _ = newton_solve(DirichletProblem.from_fixture(near_plane, grid))
        circle = flux.integrand_expansion_check(GraphPatch(sol), 1.25, (0.0, 2.0))
        rep.measured["solver_field"] = circle.measured
        rep.tolerance = {"identity": 1e-12, "bound_constant": 2.0}
        rep.require("identity", rep.measured["max_identity_error"] <= 1e-12)
        rep.require("bound_constant", rep.measured["max_deviation_ratio"] <= 2.0)
        rep.require("solver_field_identity", circle.criteria["identity"])
        rep.require("solver_field_bound", circle.criteria["deviation_bound"])
    return rep


def bernstein_identity(levels=LEVELS) -> CheckReport:
    rep = CheckReport("5_bernstein_identity", inputs={"levels": list(levels), "rect": [0.0, 1.0, LN2, LN8]})
    with timed(rep):
        grids = [GridSpec.square(0.0, 1.0, LN2, LN8, n) for n in levels]
        grim = bernstein.check_L_usq_identity(GRIM, grids, ratio_window=(3.0, 5.0))
        planes = [bernstein.check_L_usq_identity(p, [GridSpec.square(0.0, 1.0, 0.0, 1.0, 33)]) for p in PLANES]
        rep.measured = {"grim": grim.measured, "plane_sup": max(p.measured["sup_difference"][-1] for p in planes)}
        rep.orders = grim.orders
        rep.tolerance = {"ratio_window": [3.0, 5.0], "plane": 1e-13}
        rep.require("grim_order", grim.passed)
        rep.require("planes_exact", rep.measured["plane_sup"] <= 1e-13)
    return rep


# Values frozen from an independent 30-digit evaluation of the closed forms.
SPOT_LHS = 3.35575200841244956e-4
SPOT_RHS = 0.992321183729925795


def gradient_estimate(amplitudes=(0.5, 1.0), radii=(1, 2, 4, 8), n_centers=5) -> CheckReport:
    rep = CheckReport("6_gradient_estimate", inputs={"amplitudes": list(amplitudes), "radii": list(radii),
                                                     "n_centers": n_centers})
    with timed(rep):
        rows, hyp_fail = [], 0
        for fix, p, R in bernstein.sweep_configs(amplitudes, radii, n_centers):
            try:
                r = bernstein.gradient_estimate_check(fix, p, R)
            except HypothesisFailure:
                hyp_fail += 1
                continue
            rows.append([fix.A, R, p[1], r.measured["lhs"], r.measured["rhs"], r.passed])
        rep.table = rows
        spot = bernstein.gradient_estimate_check(GRIM, (0.0, 4.0), 1.0)
        rep.measured = {"configs": len(rows), "passed": sum(r[5] for r in rows), "hypothesis_failures": hyp_fail,
                        "spot_lhs": spot.measured["lhs"], "spot_rhs": spot.measured["rhs"]}
        rep.tolerance = {"spot_rel": 1e-9, "min_configs": len(amplitudes) * len(radii) * 5}
        rep.require("hypotheses_hold", hyp_fail == 0)
        rep.require("enough_configs", len(rows) >= rep.tolerance["min_configs"])
        rep.require("all_pass", all(r[5] for r in rows))
        rep.require("spot_lhs", abs(spot.measured["lhs"] - SPOT_LHS) <= 1e-9 * SPOT_LHS)
        rep.require("spot_rhs", abs(spot.measured["rhs"] - SPOT_RHS) <= 1e-9 * SPOT_RHS)
    return rep


def maximum_principle(amplitudes=(0.5, 1.0), radii=(1, 2, 4, 8), n_centers=5, n: int = 65) -> CheckReport:
    rep = CheckReport("7_maximum_principle", inputs={"amplitudes": list(amplitudes), "radii": list(radii),
                                                     "n_centers": n_centers, "n": n})
    with timed(rep):
        rows = []
        for fix, p, R in bernstein.sweep_configs(amplitudes, radii, n_centers):
            u = fix.sample(bernstein.ball_grid(p, R, n))
            r = bernstein.check_max_principle(u, bernstein.CutoffSpec(p, R), offset=fix.offset)
            m = r.measured
            rows.append([fix.A, R, p[1], m["interior_max_G"], m["boundary_max_G"], m["min_LG"],
                         r.tolerance["tol_h"], r.passed])
        rep.table = rows
        rep.measured = {"configs": len(rows), "passed": sum(r[-1] for r in rows),
                        "worst_max_margin": min(r[4] + r[6] - r[3] for r in rows),
                        "worst_LG_margin": min(r[5] + r[6] for r in rows)}
        rep.require("all_pass", all(r[-1] for r in rows))
    return rep


def decay_chain(R_list=(5, 10, 20), rel_tol=0.01) -> CheckReport:
    chain = bernstein.decay_chain_check(GRIM, R_list=R_list)
    rep = CheckReport("8_decay_chain", inputs=chain.inputs)
    with timed(rep):
        expected = [R * math.exp(-2 * R) / (1 - math.exp(-2 * R)) for R in R_list]
        got = chain.measured["R_sup_grad_sq"]
        rep.measured = dict(chain.measured, expected_R_sup_grad_sq=expected)
        rep.tolerance = {"relative": rel_tol}
        rep.criteria.update(chain.criteria)
        rep.require("closed_form", all(abs(g - e) <= rel_tol * e for g, e in zip(got, expected)))
    return rep


def translation_property(levels=(65, 129), t_final=0.1, err_tol=1e-3, ratio_window=(3.0, 5.0)) -> CheckReport:
    rep = CheckReport("9_translation_property", inputs={"levels": list(levels), "t_final": t_final,
                                                        "dt": "h_min^2/8", "rect": [0.0, 1.0, LN2, LN8]})
    with timed(rep):
        errors = []
        for n in levels:
            state, _, _ = translation_run(GRIM, GridSpec.square(0.0, 1.0, LN2, LN8, n), t_final)
            errors.append(translation_error(state, GRIM))
        rep.measured = {"error": errors, "ratios": ratios(errors)}
        rep.orders = {"error": refinement_orders(errors)}
        rep.tolerance = {"error": err_tol, "ratio_window": list(ratio_window)}
        rep.require("error", errors[0] <= err_tol)
        rep.require("refinement", all(ratio_window[0] <= q <= ratio_window[1] for q in ratios(errors)))
    return rep


def mutation_sensitivity() -> CheckReport:
    """With the D_z term removed, the flux and Bernstein-identity criteria must fail."""
    rep = CheckReport("10_mutation_sensitivity", inputs={"mutation": "drop D_z u"})
    with timed(rep):
        with drop_dz_term():
            f = flux_identity()
            b = bernstein_identity()
        rep.measured = {"flux_criteria": f.criteria, "bernstein_criteria": b.criteria}
        rep.require("flux_fails", not f.passed)
        rep.require("bernstein_fails", not b.passed)
    return rep


CRITERIA = (flux_identity, plane_exactness, solver_convergence, integrand_identity, bernstein_identity,
            gradient_estimate, maximum_principle, decay_chain, translation_property, mutation_sensitivity)


def run_all(inject_drop_dz: bool = False) -> list[CheckReport]:
    if inject_drop_dz:
        with drop_dz_term():
            return [c() for c in CRITERIA]
    return [c() for c in CRITERIA]
