"""Both sides of the flux identity for translators, and the polar-circle machinery.

For a compact translator with boundary, the area integral of ``|H|^2``
equals the boundary flux of the tangential part of ``e_3`` through the
outward conormal.  Here:

* the left side is a composite Simpson rule of ``|H|^2 sqrt(1 + |Du|^2)``
  over a rectangle (tensor Simpson on nodes) or an annulus/disk (Simpson
  in ``r`` and ``theta`` on bilinearly interpolated jets);
* the right side is a weighted sum of ``<eta, e_3^T> |gamma'|`` over boundary
  samples (trapezoid on circles, Simpson along rectangle edges).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from translab.errors import DomainError, InputError
from translab.exact import AnalyticField
from translab.geometry import (E3, GraphPatch, area_element, grad_sq, mean_curvature,
                               tangential_part, translator_residual, unit_normal)
from translab.grid import GridSpec, JetField, ScalarField2D, interpolate_jets, jet_field
from translab.report import CheckReport, ratios, refinement_orders, timed

_ALIGN_TOL = 1e-9


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle:
    s0: float
    s1: float
    z0: float
    z1: float

    def __post_init__(self):
        if not (self.s1 > self.s0 and self.z1 > self.z0):
            raise InputError("rectangle must have positive measure")

    def split_s(self, s_mid: float) -> tuple[Rectangle, Rectangle]:
        return Rectangle(self.s0, s_mid, self.z0, self.z1), Rectangle(s_mid, self.s1, self.z0, self.z1)

    def grid(self, n: int) -> GridSpec:
        return GridSpec.square(self.s0, self.s1, self.z0, self.z1, n)


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    R_in: float
    R_out: float

    def __post_init__(self):
        if not (self.R_out > self.R_in > 0):
            raise InputError("annulus requires R_out > R_in > 0")

    def grid(self, n: int) -> GridSpec:
        ps, pz = self.center
        return GridSpec.square(ps - self.R_out, ps + self.R_out, pz - self.R_out, pz + self.R_out, n)


@dataclass(frozen=True)
class Disk:
    """Disk approximant of a compact piece bounded by one polar curve."""

    center: tuple[float, float]
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise InputError("disk radius must be positive")

    def grid(self, n: int) -> GridSpec:
        ps, pz = self.center
        return GridSpec.square(ps - self.R, ps + self.R, pz - self.R, pz + self.R, n)


# ---------------------------------------------------------------------------
# Quadrature helpers
# ---------------------------------------------------------------------------

def simpson_weights(n_points: int, h: float) -> np.ndarray:
    if n_points < 3 or (n_points - 1) % 2:
        raise InputError(f"Simpson needs an even number of intervals, got {n_points - 1}")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _even_at_least(x: float, minimum: int = 2) -> int:
    n = max(minimum, int(math.ceil(x)))
    return n + (n % 2)


def default_theta_samples(R: float, h: float) -> int:
    n = max(256, int(math.ceil(8.0 * R / h)))
    return n + (-n) % 4


def _node_range(start, stop, origin, h, n, axis):
    a = (start - origin) / h
    b = (stop - origin) / h
    ia, ib = int(round(a)), int(round(b))
    if abs(a - ia) > _ALIGN_TOL or abs(b - ib) > _ALIGN_TOL:
        raise InputError(f"rectangle {axis}-bounds do not fall on grid nodes")
    if ia < 0 or ib > n - 1:
        raise DomainError(f"rectangle exceeds the field domain along {axis}")
    return ia, ib


def rectangle_nodes(u: ScalarField2D, rect: Rectangle) -> tuple[slice, slice]:
    i0, i1 = _node_range(rect.s0, rect.s1, u.s0, u.h_s, u.shape[0], "s")
    j0, j1 = _node_range(rect.z0, rect.z1, u.z0, u.h_z, u.shape[1], "z")
    return slice(i0, i1 + 1), slice(j0, j1 + 1)


def _check_disk_inside(u: ScalarField2D, center, R):
    ps, pz = center
    tol = 1e-12
    if ps - R < u.s0 - tol or ps + R > u.s1 + tol or pz - R < u.z0 - tol or pz + R > u.z1 + tol:
        raise DomainError(f"circle of radius {R} about {tuple(center)} exits the field domain")


# ---------------------------------------------------------------------------
# Left side
# ---------------------------------------------------------------------------

def hsq_density(jets) -> np.ndarray:
    """``|H|^2`` times the area element."""
    return mean_curvature(jets) ** 2 * area_element(jets)


def total_mean_curvature(patch: GraphPatch, region, jets: JetField | None = None,
                         n_r: int | None = None, n_theta: int | None = None) -> float:
    """Composite Simpson approximation of the integral of ``|H|^2`` over ``region``."""
    u = patch.u
    jets = jet_field(u) if jets is None else jets
    if isinstance(region, Rectangle):
        si, zj = rectangle_nodes(u, region)
        f = hsq_density(jets)[si, zj]
        ws = simpson_weights(f.shape[0], u.h_s)
        wz = simpson_weights(f.shape[1], u.h_z)
        return float(ws @ f @ wz)
    if isinstance(region, (Annulus, Disk)):
        r_in, r_out = (region.R_in, region.R_out) if isinstance(region, Annulus) else (0.0, region.R)
        _check_disk_inside(u, region.center, r_out)
        h = min(u.h_s, u.h_z)
        n_r = n_r or _even_at_least(2 * (r_out - r_in) / h)
        n_theta = n_theta or default_theta_samples(r_out, h)
        if n_theta % 2:
            raise InputError("n_theta must be even for Simpson in theta")
        r = np.linspace(r_in, r_out, n_r + 1)
        th = np.linspace(0.0, 2 * math.pi, n_theta + 1)
        Rg, Tg = np.meshgrid(r, th, indexing="ij")
        ps, pz = region.center
        pj = interpolate_jets(u, jets, ps + Rg * np.cos(Tg), pz + Rg * np.sin(Tg))
        f = hsq_density(pj) * Rg
        wr = simpson_weights(n_r + 1, (r_out - r_in) / n_r)
        wt = simpson_weights(n_theta + 1, 2 * math.pi / n_theta)
        return float(wr @ f @ wt)
    raise InputError(f"unsupported region {region!r}")


# ---------------------------------------------------------------------------
# Boundary curves and the right side
# ---------------------------------------------------------------------------

def conormal(tangent, nu) -> np.ndarray:
    """Outward unit conormal ``(gamma' / |gamma'|) x nu``."""
    tangent = np.asarray(tangent, dtype=float)
    norm = np.linalg.norm(tangent, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise InputError("zero tangent vector")
    return np.cross(tangent / norm, np.asarray(nu, dtype=float))


@dataclass(frozen=True)
class BoundaryCurve:
    """Samples of one or more closed curves on a graph, in the chart frame.

    ``weights`` are quadrature weights in the curve parameter; flux
    integrands are multiplied by ``|gamma'|`` so the parameter need not be
    arclength.
    """

    params: np.ndarray
    positions: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    conormals: np.ndarray
    weights: np.ndarray
    closed: bool = True

    def __post_init__(self):
        for name in ("positions", "tangents", "normals", "conormals"):
            arr = getattr(self, name)
            if arr.shape != (len(self.params), 3):
                raise InputError(f"{name} must have shape (N, 3)")
        nn = np.linalg.norm(self.normals, axis=1)
        ne = np.linalg.norm(self.conormals, axis=1)
        if np.any(np.abs(nn - 1) > 1e-12) or np.any(np.abs(ne - 1) > 1e-12):
            raise InputError("normals and conormals must be unit vectors")
        if np.any(np.abs(np.sum(self.normals * self.conormals, axis=1)) > 1e-10):
            raise InputError("conormals must be orthogonal to normals")

    def __len__(self):
        return len(self.params)

    def reversed(self) -> BoundaryCurve:
        """Same point set traversed the other way (outward becomes inward)."""
        return BoundaryCurve(self.params[::-1].copy(), self.positions[::-1].copy(), -self.tangents[::-1],
                             self.normals[::-1].copy(), -self.conormals[::-1], self.weights[::-1].copy(),
                             self.closed)

    def __add__(self, other: BoundaryCurve) -> BoundaryCurve:
        return BoundaryCurve(*(np.concatenate([getattr(self, n), getattr(other, n)])
                               for n in ("params", "positions", "tangents", "normals", "conormals", "weights")),
                             closed=self.closed and other.closed)


def _curve_from(params, u_vals, s, z, tangents, jets, weights, closed=True) -> BoundaryCurve:
    nu = unit_normal(jets)
    return BoundaryCurve(np.asarray(params, float), np.stack([u_vals, s, z], axis=1), tangents,
                         nu, conormal(tangents, nu), np.asarray(weights, float), closed)


def circle_curve(patch: GraphPatch, center, R: float, n_theta: int | None = None,
                 jets: JetField | None = None, clockwise: bool = False) -> BoundaryCurve:
    """``gamma(theta) = (u(p + R e^{i theta}), p + R e^{i theta})`` at uniform theta."""
    u = patch.u
    _check_disk_inside(u, center, R)
    jets = jet_field(u) if jets is None else jets
    n_theta = n_theta or default_theta_samples(R, min(u.h_s, u.h_z))
    if n_theta < 64:
        raise InputError("polar curves need at least 64 samples")
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    c, sn = np.cos(th), np.sin(th)
    s = center[0] + R * c
    z = center[1] + R * sn
    pj = interpolate_jets(u, jets, s, z)
    u_theta = -R * sn * pj.us + R * c * pj.uz
    tangents = np.stack([u_theta, -R * sn, R * c], axis=1)
    curve = _curve_from(th, pj.u, s, z, tangents, pj, np.full(n_theta, 2 * math.pi / n_theta))
    return curve.reversed() if clockwise else curve


def rectangle_curve(patch: GraphPatch, rect: Rectangle, jets: JetField | None = None) -> BoundaryCurve:
    """Counterclockwise rectangle boundary; each edge carries its own one-sided corner samples."""
    u = patch.u
    jets = jet_field(u) if jets is None else jets
    si, zj = rectangle_nodes(u, rect)
    S, Z = u.mesh()
    sub = jets.map(lambda a: a[si, zj])
    S, Z = S[si, zj], Z[si, zj]
    ws = simpson_weights(S.shape[0], u.h_s)
    wz = simpson_weights(S.shape[1], u.h_z)

    def edge(idx, weights, param, tangent_of, sign):
        e = sub.map(lambda a: a[idx])
        t = sign * tangent_of(e)
        order = slice(None) if sign > 0 else slice(None, None, -1)
        e = e.map(lambda a: a[order])
        return _curve_from(param[idx][order], e.u, S[idx][order], Z[idx][order], t[order], e, weights[order])

    along_s = lambda e: np.stack([e.us, np.ones_like(e.us), np.zeros_like(e.us)], axis=1)  # noqa: E731
    along_z = lambda e: np.stack([e.uz, np.zeros_like(e.uz), np.ones_like(e.uz)], axis=1)  # noqa: E731
    bottom = edge((slice(None), 0), ws, S, along_s, +1)
    right = edge((-1, slice(None)), wz, Z, along_z, +1)
    top = edge((slice(None), -1), ws, S, along_s, -1)
    left = edge((0, slice(None)), wz, Z, along_z, -1)
    return bottom + right + top + left


def region_boundary(patch: GraphPatch, region, jets: JetField | None = None,
                    n_theta: int | None = None) -> BoundaryCurve:
    jets = jet_field(patch.u) if jets is None else jets
    if isinstance(region, Rectangle):
        return rectangle_curve(patch, region, jets)
    if isinstance(region, Disk):
        return circle_curve(patch, region.center, region.R, n_theta, jets)
    if isinstance(region, Annulus):
        return (circle_curve(patch, region.center, region.R_out, n_theta, jets)
                + circle_curve(patch, region.center, region.R_in, n_theta, jets, clockwise=True))
    raise InputError(f"unsupported region {region!r}")


def flux_density(curve: BoundaryCurve) -> np.ndarray:
    """``<eta, e_3^T> |gamma'|`` at every sample."""
    e3_tan = tangential_part(np.broadcast_to(E3, curve.normals.shape), curve.normals)
    return np.sum(curve.conormals * e3_tan, axis=1) * np.linalg.norm(curve.tangents, axis=1)


def boundary_flux(patch: GraphPatch, curve: BoundaryCurve) -> float:
    """Flux of ``e_3^T`` through ``curve`` along its outward conormal."""
    if not curve.closed:
        raise InputError("boundary flux needs a closed curve (pass all rectangle edges)")
    return float(curve.weights @ flux_density(curve))


def cross_integrand(tangents, normals) -> np.ndarray:
    """``<gamma' x nu, e_3>``."""
    return np.cross(tangents, normals)[..., 2]


def polar_integrand_closed_form(R, theta, us, uz):
    """``(R sin(t) us^2 - R cos(t) uz us + R sin(t)) / sqrt(1 + |Du|^2)``."""
    return (R * np.sin(theta) * us ** 2 - R * np.cos(theta) * uz * us + R * np.sin(theta)) / np.sqrt(1 + us ** 2 + uz ** 2)


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def _residual_sup(patch: GraphPatch, jets: JetField, region) -> float:
    u = patch.u
    res = np.abs(translator_residual(jets))
    if isinstance(region, Rectangle):
        si, zj = rectangle_nodes(u, region)
        res = res[si, zj]
        interior = res[1:-1, 1:-1] if min(res.shape) > 2 else res
    else:
        interior = res[1:-1, 1:-1]
    return float(interior.max())


def flux_sides(patch: GraphPatch, region) -> dict:
    jets = jet_field(patch.u)
    lhs = total_mean_curvature(patch, region, jets)
    rhs = boundary_flux(patch, region_boundary(patch, region, jets))
    return {"lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs), "residual_sup": _residual_sup(patch, jets, region),
            "h": max(patch.u.h_s, patch.u.h_z)}


def flux_gap(source, region, levels=(33, 65, 129), expected: float | None = None,
             gap_tol: float = 5e-4, value_tol: float = 1e-3, ratio_window=(3.0, 5.0),
             residual_tol: float = 1e-3, exact_tol: float = 1e-13) -> CheckReport:
    """Compare both sides of the flux identity, across refinements when possible.

    ``source`` is either an analytic field (sampled at each level) or a
    single :class:`GraphPatch`.  The translator premise is part of the
    check: the residual must vanish under refinement (or be below
    ``residual_tol`` for a single patch).
    """
    rep = CheckReport("flux_gap", inputs={"source": getattr(source, "describe", lambda: "patch")(),
                                          "region": repr(region), "levels": list(levels), "expected": expected})
    with timed(rep):
        if isinstance(source, GraphPatch):
            rows = [flux_sides(source, region)]
        elif isinstance(source, AnalyticField):
            rows = [flux_sides(GraphPatch(source.sample(region.grid(n))), region) for n in levels]
        else:
            raise InputError("source must be an AnalyticField or a GraphPatch")
        rep.table = [[r["h"], r["lhs"], r["rhs"], r["gap"]] for r in rows]
        gaps = [r["gap"] for r in rows]
        res = [r["residual_sup"] for r in rows]
        rep.measured = {"lhs": [r["lhs"] for r in rows], "rhs": [r["rhs"] for r in rows],
                        "gap": gaps, "residual_sup": res, "h": [r["h"] for r in rows]}
        rep.tolerance = {"gap": gap_tol, "ratio_window": list(ratio_window), "exact": exact_tol}
        rep.require("gap_finest", gaps[-1] <= gap_tol)
        if len(rows) > 1:
            rep.measured["gap_ratios"] = ratios(gaps)
            rep.measured["residual_ratios"] = ratios(res)
            rep.orders = {"gap": refinement_orders(gaps), "residual": refinement_orders(res)}
            if gaps[-1] > exact_tol:
                rep.require("gap_ratio", all(ratio_window[0] <= q <= ratio_window[1] for q in ratios(gaps)))
            rep.require("translator_premise", res[-1] <= exact_tol * 1e3
                        or all(ratio_window[0] <= q <= ratio_window[1] for q in ratios(res)))
        else:
            rep.tolerance["residual"] = residual_tol
            rep.require("translator_premise", res[-1] <= residual_tol)
        if expected is not None:
            rep.tolerance["value"] = value_tol
            rep.require("lhs_value", all(abs(v - expected) <= value_tol for v in rep.measured["lhs"]))
            rep.require("rhs_value", all(abs(v - expected) <= value_tol for v in rep.measured["rhs"]))
    return rep


def integrand_expansion_check(patch: GraphPatch, R: float, p, n_theta: int | None = None) -> CheckReport:
    """Circle of radius ``R`` about ``p``: exact integrand form and its O(|Du|^2) deviation from R sin(theta)."""
    rep = CheckReport("integrand_expansion", inputs={"R": R, "center": list(p), "n_theta": n_theta})
    with timed(rep):
        jets = jet_field(patch.u)
        curve = circle_curve(patch, p, R, n_theta, jets)
        th = curve.params
        pj = interpolate_jets(patch.u, jets, curve.positions[:, 1], curve.positions[:, 2])
        cross = cross_integrand(curve.tangents, curve.normals)
        closed = polar_integrand_closed_form(R, th, pj.us, pj.uz)
        deviation = np.abs(cross - R * np.sin(th))
        bound = 2.0 * R * grad_sq(pj)
        slack = 1e-14 * R
        sin_integral = float(np.sum(R * np.sin(th)) * (2 * math.pi / len(th)))
        rep.measured = {
            "max_identity_error": float(np.max(np.abs(cross - closed))),
            "max_deviation": float(deviation.max()),
            "max_deviation_over_bound": float(np.max(deviation / np.maximum(bound, slack))),
            "sin_term_integral": sin_integral,
            "circle_flux": boundary_flux(patch, curve),
            "n_theta": len(th),
        }
        rep.tolerance = {"identity": 1e-12 * max(1.0, R), "bound_constant": 2.0, "roundoff": slack,
                         "sin_integral": 1e-14 * max(1.0, R)}
        rep.require("identity", rep.measured["max_identity_error"] <= rep.tolerance["identity"])
        rep.require("deviation_bound", bool(np.all(deviation <= bound + slack)))
        rep.require("sin_term_vanishes", abs(sin_integral) <= rep.tolerance["sin_integral"])
    return rep
