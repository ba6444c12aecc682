"""Discrete checks of the interior gradient estimate for translator graphs.

The operator is ``L = a^{ij}(Du) D_i D_j + D_z`` and the auxiliary quantity
is ``G = phi^2 |Du|^2 / 2 + Lambda u^2 / 2`` with ``Lambda = 400 / R`` and
the cutoff ``phi = (1 - |x - p|^2 / R^2)^2`` (zero outside the ball).
Every ``u`` entering an estimate is measured relative to the end's
asymptotic plane value (``offset``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from translab import geometry
from translab.errors import DegenerateGridError, DomainError, HypothesisFailure, InputError
from translab.exact import AnalyticField, ExactSolution, GrimProfile
from translab.geometry import trace_a_hessian
from translab.grid import GridSpec, JetField, ScalarField2D, interpolate_jets, jet_arrays, jet_field
from translab.report import CheckReport, ratios, refinement_orders, timed

GRADIENT_CONSTANT = 400
CHAIN_CONSTANT = 800
GRAD_SQ_HYPOTHESIS = 0.25


@dataclass(frozen=True)
class CutoffSpec:
    center: tuple[float, float]
    R: float

    def __post_init__(self):
        if self.R < 1:
            raise InputError(f"cutoff radius must be >= 1, got {self.R}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    def _offsets(self, s, z):
        return np.asarray(s, float) - self.center[0], np.asarray(z, float) - self.center[1]

    def phi(self, s, z):
        ds, dz = self._offsets(s, z)
        q = 1.0 - (ds * ds + dz * dz) / self.R ** 2
        return np.where(q > 0, q * q, 0.0)

    def grad(self, s, z):
        ds, dz = self._offsets(s, z)
        q = np.maximum(1.0 - (ds * ds + dz * dz) / self.R ** 2, 0.0)
        c = -4.0 * q / self.R ** 2
        return np.stack([c * ds, c * dz], axis=-1)

    def hessian(self, s, z):
        ds, dz = self._offsets(s, z)
        q = 1.0 - (ds * ds + dz * dz) / self.R ** 2
        inside = q > 0
        R2 = self.R ** 2
        H = np.empty(np.shape(ds) + (2, 2))
        H[..., 0, 0] = -4.0 / R2 * (q - 2 * ds * ds / R2)
        H[..., 0, 1] = H[..., 1, 0] = 8.0 / R2 ** 2 * ds * dz
        H[..., 1, 1] = -4.0 / R2 * (q - 2 * dz * dz / R2)
        return np.where(inside[..., None, None], H, 0.0)


@dataclass(frozen=True)
class BernsteinConfig:
    Lambda: Fraction

    @classmethod
    def for_radius(cls, R) -> BernsteinConfig:
        return cls(Fraction(GRADIENT_CONSTANT) / Fraction(R))

    def __float__(self):
        return float(self.Lambda)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def _L_arrays(ju: JetField, jw: JetField):
    """``a^{ij}(Du) D_i D_j w + D_z w``."""
    W2 = 1.0 + ju.us ** 2 + ju.uz ** 2
    aw = (jw.uss + jw.uzz) - (ju.us * ju.us * jw.uss + 2 * ju.us * ju.uz * jw.usz + ju.uz * ju.uz * jw.uzz) / W2
    return aw + geometry.dz_weight() * jw.uz


def apply_L(u: ScalarField2D, w: ScalarField2D) -> ScalarField2D:
    """Coefficients from the jets of ``u``, derivatives from the jets of ``w``."""
    if not u.same_grid(w):
        raise InputError("apply_L needs u and w on the same grid")
    return u.with_values(_L_arrays(jet_field(u), jet_field(w)))


def _interior(a: np.ndarray, layers: int = 1) -> np.ndarray:
    return a[layers:-layers, layers:-layers]


def _as_fields(source, grids, offset):
    """Yield ``(grid, field)`` pairs with ``offset`` already subtracted."""
    if isinstance(source, ScalarField2D):
        return [source.with_values(source.values - offset)]
    if isinstance(source, AnalyticField):
        if not grids:
            raise InputError("an analytic source needs at least one grid")
        return [source.sample(g).with_values(source.sample(g).values - offset) for g in grids]
    raise InputError("source must be a ScalarField2D or an AnalyticField")


def _tol_h(h: float, hess_sup: float) -> float:
    return 10.0 * h * h * hess_sup


def _default_offset(source, offset):
    if offset is not None:
        return float(offset)
    return float(getattr(source, "offset", 0.0)) if isinstance(source, ExactSolution) else 0.0


def check_L_usq_identity(source, grids=None, offset=None, ratio_window=(3.0, 5.0),
                         exact_tol: float = 1e-13) -> CheckReport:
    """``L(u^2/2) = |Du|^2 / (1 + |Du|^2)`` on translators, sup over interior nodes."""
    offset = _default_offset(source, offset)
    rep = CheckReport("L_usq_identity", inputs={"source": _describe(source), "offset": offset,
                                                "grids": [_grid_echo(g) for g in grids or []]})
    with timed(rep):
        sups, hs, tols = [], [], []
        for u in _as_fields(source, grids, offset):
            ju = jet_field(u)
            jw = jet_arrays(0.5 * u.values ** 2, u.h_s, u.h_z)
            diff = _L_arrays(ju, jw) - ju.grad_sq() / (1.0 + ju.grad_sq())
            sups.append(float(np.max(np.abs(_interior(diff)))))
            h = max(u.h_s, u.h_z)
            hs.append(h)
            tols.append(max(_tol_h(h, float(np.sqrt(ju.hess_sq()).max())), exact_tol))
        rep.measured = {"sup_difference": sups, "h": hs}
        rep.tolerance = {"exact": exact_tol, "ratio_window": list(ratio_window), "tol_h": tols}
        if sups[-1] <= exact_tol:
            rep.require("exact", True)
        elif len(sups) > 1:
            rep.measured["ratios"] = ratios(sups)
            rep.orders = {"sup_difference": refinement_orders(sups)}
            rep.require("refinement_ratio", all(ratio_window[0] <= q <= ratio_window[1] for q in ratios(sups)))
        else:
            rep.require("within_tol_h", sups[-1] <= tols[-1])
    return rep


def hessian_slack(u: ScalarField2D) -> np.ndarray:
    """``L(|Du|^2/2) - (1 - 5|Du|^2/(1+|Du|^2)) |D^2u|^2`` at every node."""
    ju = jet_field(u)
    p2 = ju.grad_sq()
    jq = jet_arrays(0.5 * p2, u.h_s, u.h_z)
    return _L_arrays(ju, jq) - (1.0 - 5.0 * p2 / (1.0 + p2)) * ju.hess_sq()


def check_hessian_inequality(source, grids=None, offset=None) -> CheckReport:
    """Min slack of the Cauchy-Schwarz Hessian inequality, two node layers in."""
    offset = _default_offset(source, offset)
    rep = CheckReport("hessian_inequality", inputs={"source": _describe(source), "offset": offset,
                                                    "grids": [_grid_echo(g) for g in grids or []]})
    with timed(rep):
        mins, tols = [], []
        for u in _as_fields(source, grids, offset):
            if min(u.shape) < 5:
                raise DegenerateGridError("hessian inequality needs at least 5 nodes per axis")
            slack = _interior(hessian_slack(u), 2)
            hess = float(np.sqrt(jet_field(u).hess_sq()).max())
            mins.append(float(slack.min()))
            tols.append(max(_tol_h(max(u.h_s, u.h_z), hess), 1e-13))
        rep.measured = {"min_slack": mins}
        rep.tolerance = {"tol_h": tols}
        rep.require("min_slack", all(m >= -t for m, t in zip(mins, tols)))
    return rep


# ---------------------------------------------------------------------------
# Auxiliary quantity and maximum principle
# ---------------------------------------------------------------------------

def _ball_inside(u: ScalarField2D, cutoff: CutoffSpec):
    ps, pz = cutoff.center
    R = cutoff.R
    tol = 1e-12
    if ps - R < u.s0 - tol or ps + R > u.s1 + tol or pz - R < u.z0 - tol or pz + R > u.z1 + tol:
        raise DomainError(f"ball of radius {R} about {cutoff.center} exits the grid domain")


def build_G(u: ScalarField2D, cutoff: CutoffSpec, cfg: BernsteinConfig, offset: float = 0.0) -> ScalarField2D:
    """``phi^2 |Du|^2 / 2 + Lambda (u - offset)^2 / 2`` at every node."""
    _ball_inside(u, cutoff)
    v = u.values - offset
    ju = jet_arrays(v, u.h_s, u.h_z)
    S, Z = u.mesh()
    phi = cutoff.phi(S, Z)
    return u.with_values(phi ** 2 * ju.grad_sq() / 2.0 + float(cfg) * v ** 2 / 2.0)


def discrete_ball(u: ScalarField2D, cutoff: CutoffSpec):
    """``(ball, ring)`` node masks; the ring is ball nodes with a 4-neighbour outside."""
    S, Z = u.mesh()
    ball = (S - cutoff.center[0]) ** 2 + (Z - cutoff.center[1]) ** 2 <= cutoff.R ** 2 * (1 + 1e-12)
    padded = np.pad(ball, 1, constant_values=False)
    all_in = padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    return ball, ball & ~all_in


def check_max_principle(u: ScalarField2D, cutoff: CutoffSpec, cfg: BernsteinConfig | None = None,
                        offset: float = 0.0) -> CheckReport:
    """Discrete form of ``max_B G = max_{dB} G`` and ``L G >= 0`` on the ball."""
    cfg = cfg or BernsteinConfig.for_radius(cutoff.R)
    rep = CheckReport("max_principle", inputs={"center": list(cutoff.center), "R": cutoff.R,
                                               "Lambda": str(cfg.Lambda), "offset": offset,
                                               "grid": _grid_echo(u.grid)})
    with timed(rep):
        _ball_inside(u, cutoff)
        ball, ring = discrete_ball(u, cutoff)
        v = u.with_values(u.values - offset)
        ju = jet_field(v)
        p2_max = float(ju.grad_sq()[ball].max())
        rep.measured["max_grad_sq"] = p2_max
        if p2_max > GRAD_SQ_HYPOTHESIS:
            raise HypothesisFailure(f"|Du|^2 reaches {p2_max:.4g} > 1/4 in the ball")
        G = build_G(u, cutoff, cfg, offset)
        LG = _L_arrays(ju, jet_field(G))
        hess = float(np.sqrt(ju.hess_sq()[ball]).max())
        tol = _tol_h(max(u.h_s, u.h_z), hess)
        interior = ball & ~ring
        rep.measured.update({
            "interior_max_G": float(G.values[interior].max()),
            "boundary_max_G": float(G.values[ring].max()),
            "min_LG": float(LG[ball].min()),
            "sup_hessian": hess,
            "ball_nodes": int(ball.sum()),
            "ring_nodes": int(ring.sum()),
        })
        rep.tolerance = {"tol_h": tol}
        rep.require("max_on_boundary", rep.measured["interior_max_G"] <= rep.measured["boundary_max_G"] + tol)
        rep.require("LG_nonnegative", rep.measured["min_LG"] >= -tol)
    return rep


# ---------------------------------------------------------------------------
# Gradient estimate and decay chain
# ---------------------------------------------------------------------------

def _polar(center, R, n_r=64, n_theta=256):
    r = np.linspace(0.0, R, n_r + 1)
    th = 2 * math.pi * np.arange(n_theta) / n_theta
    Rg, Tg = np.meshgrid(r, th, indexing="ij")
    return center[0] + Rg * np.cos(Tg), center[1] + Rg * np.sin(Tg)


def gradient_estimate_check(source, p, R: float, offset: float | None = None,
                            n_theta: int = 4096) -> CheckReport:
    """``|Du(p)|^2 <= (400 / R) max over the circle of (u - offset)^2``.

    ``source`` is an analytic field (exact jets, circle sampled at
    ``n_theta`` points) or a grid field (bilinearly interpolated jets).
    """
    if R < 1:
        raise InputError("the gradient estimate needs R >= 1")
    offset = _default_offset(source, offset)
    rep = CheckReport("gradient_estimate", inputs={"source": _describe(source), "center": list(p), "R": R,
                                                   "offset": offset, "n_theta": n_theta})
    with timed(rep):
        th = 2 * math.pi * np.arange(n_theta) / n_theta
        cs, cz = p[0] + R * np.cos(th), p[1] + R * np.sin(th)
        if isinstance(source, AnalyticField):
            Ds, Dz = _polar(p, R)
            ball_p2 = source.jets(Ds, Dz).grad_sq()
            ball_p2 = np.concatenate([ball_p2.ravel(), source.jets(cs, cz).grad_sq()])
            jp = source.jets(p[0], p[1])
            circle_u = source.eval(cs, cz)
        elif isinstance(source, ScalarField2D):
            cut = CutoffSpec(p, R)
            _ball_inside(source, cut)
            jets = jet_field(source)
            ball, _ = discrete_ball(source, cut)
            ball_p2 = jets.grad_sq()[ball]
            jp = interpolate_jets(source, jets, p[0], p[1])
            circle_u = source.interpolate(cs, cz)
        else:
            raise InputError("source must be an AnalyticField or a ScalarField2D")
        max_p2 = float(np.max(ball_p2))
        rep.measured["max_grad_sq_ball"] = max_p2
        if max_p2 > GRAD_SQ_HYPOTHESIS:
            raise HypothesisFailure(f"|Du|^2 reaches {max_p2:.4g} > 1/4 on the ball")
        lhs = float(jp.grad_sq())
        rhs = float(Fraction(GRADIENT_CONSTANT) / Fraction(R)) * float(np.max((circle_u - offset) ** 2))
        rep.measured.update({"lhs": lhs, "rhs": rhs, "margin": rhs - lhs})
        rep.require("estimate", lhs <= rhs)
    return rep


def _tail_z(start: float, span: float = 40.0, n: int = 4000) -> np.ndarray:
    return start + np.concatenate([[0.0], np.geomspace(1e-9, span, n)])


def decay_chain_check(source: ExactSolution, offset: float | None = None, R_list=(5, 10, 20),
                      center=(0.0, 0.0)) -> CheckReport:
    """Check ``sup_{z>=R}|Du|^2 <= (800/R) sup_{z>=R/2} (u-offset)^2`` and decay of R sup|Du|^2.

    The tails are the half-planes ``{z >= R}``; the circle integral of
    ``|Du|^2`` is replaced by its half-plane analogue, the integral along
    the segment ``z = R`` of length ``2 pi R`` centred at ``center``.
    """
    R_list = [float(r) for r in R_list]
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise InputError("R_list must be strictly increasing")
    offset = _default_offset(source, offset)
    rep = CheckReport("decay_chain", inputs={"source": _describe(source), "offset": offset,
                                             "R_list": R_list, "center": list(center)})
    with timed(rep):
        s_probe = center[0] + np.array([-1.0, 0.0, 1.0])
        rows = []
        for R in R_list:
            S, Z = np.meshgrid(s_probe, _tail_z(R), indexing="ij")
            sup_p2 = float(source.jets(S, Z).grad_sq().max())
            S2, Z2 = np.meshgrid(s_probe, _tail_z(R / 2), indexing="ij")
            sup_u2 = float(np.max((source.eval(S2, Z2) - offset) ** 2))
            bound = CHAIN_CONSTANT / R * sup_u2
            seg = center[0] + np.linspace(-math.pi * R, math.pi * R, 1025)
            p2_seg = source.jets(seg, np.full_like(seg, R)).grad_sq()
            line_integral = float(np.trapezoid(p2_seg, seg))
            rows.append([R, sup_p2, bound, sup_p2 <= bound, R * sup_p2, line_integral])
        rep.table = rows
        weighted = [r[4] for r in rows]
        integrals = [r[5] for r in rows]
        rep.measured = {"R": R_list, "sup_grad_sq": [r[1] for r in rows], "chain_bound": [r[2] for r in rows],
                        "R_sup_grad_sq": weighted, "line_integral": integrals}

        def decreasing_to_zero(seq):
            return all(v == 0 for v in seq) or all(b < a for a, b in zip(seq, seq[1:]))

        rep.require("chain_inequality", all(r[3] for r in rows))
        rep.require("R_sup_grad_sq_decreasing", decreasing_to_zero(weighted))
        rep.require("line_integral_decreasing", decreasing_to_zero(integrals))
    return rep


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def hypothesis_floor(A: float) -> float:
    """Smallest z with ``|Du|^2 <= 1/4`` on a grim profile of amplitude A."""
    return math.log(A) + 0.5 * math.log(5.0)


def sweep_configs(amplitudes=(0.5, 1.0), radii=(1, 2, 4, 8), n_centers=5, margin=0.05, spacing=1.0):
    """``(fixture, center, R)`` triples along the tail of each grim profile."""
    out = []
    for A in amplitudes:
        fix = GrimProfile(A=A, B=math.pi / 2)
        for R in radii:
            for k in range(n_centers):
                pz = hypothesis_floor(A) + margin + R + k * spacing
                out.append((fix, (0.0, pz), float(R)))
    return out


def ball_grid(center, R: float, n: int = 65, pad_cells: int = 2) -> GridSpec:
    h = 2 * R / (n - 1 - 2 * pad_cells)
    half = R + pad_cells * h
    return GridSpec.square(center[0] - half, center[0] + half, center[1] - half, center[1] + half, n)


def _describe(source) -> str:
    if hasattr(source, "describe"):
        return source.describe()
    return repr(source)


def _grid_echo(g: GridSpec) -> dict:
    return {"s0": g.s0, "s1": g.s1, "z0": g.z0, "z1": g.z1, "n_s": g.n_s, "n_z": g.n_z}
