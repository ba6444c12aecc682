"""Damped Newton solver for the translator graph equation with Dirichlet data.

Solves ``a^{ij}(Du) D_i D_j u + D_z u = F`` on a rectangle, with ``u``
prescribed on the boundary nodes.  The Jacobian is assembled column-wise
from forward differences of the residual; since the residual at a node
only sees its 3x3 neighbourhood, nodes with equal ``(i mod 3, j mod 3)``
are perturbed together (nine residual evaluations per Jacobian).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from translab.errors import ConvergenceFailure, DegenerateGridError, InputError, LinearSolveError
from translab.exact import AnalyticField
from translab.geometry import translator_residual
from translab.grid import GridSpec, ScalarField2D, jet_arrays

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DirichletProblem:
    grid: GridSpec
    boundary_data: np.ndarray  # full (n_s, n_z) array; only boundary nodes are read
    forcing: ScalarField2D

    def __post_init__(self):
        bd = np.array(self.boundary_data, dtype=float)
        if bd.shape != self.grid.shape:
            raise InputError(f"boundary data shape {bd.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(bd[boundary_mask(self.grid.shape)])):
            raise InputError("boundary data must be finite")
        if self.forcing.shape != self.grid.shape:
            raise InputError("forcing must be defined on every grid node")
        bd.setflags(write=False)
        object.__setattr__(self, "boundary_data", bd)

    @classmethod
    def from_fixture(cls, fixture: AnalyticField, grid: GridSpec, forcing=None) -> DirichletProblem:
        """Boundary data sampled from ``fixture``; zero forcing unless given."""
        bd = fixture.sample(grid).values
        if forcing is None:
            forcing = ScalarField2D.on_grid(grid, np.zeros(grid.shape))
        return cls(grid, bd, forcing)


@dataclass
class SolveOptions:
    tol: float = 1e-10
    max_iter: int = 50
    max_halvings: int = 20
    fd_rel_step: float = 1e-7


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    step_lengths: list = field(default_factory=list)
    converged: bool = False
    final_residual: float = float("nan")
    quadratic_constant: float | None = None

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_history": list(self.residual_history),
            "step_lengths": list(self.step_lengths),
            "converged": self.converged,
            "final_residual": self.final_residual,
            "quadratic_constant": self.quadratic_constant,
        }


def boundary_mask(shape) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
    return mask


def _residual_array(values: np.ndarray, grid: GridSpec, forcing: np.ndarray) -> np.ndarray:
    jets = jet_arrays(values, grid.h_s, grid.h_z)
    res = translator_residual(jets, forcing)
    res[boundary_mask(values.shape)] = 0.0
    return res


def assemble_residual(u: ScalarField2D, problem: DirichletProblem) -> ScalarField2D:
    """Translator residual at interior nodes, zero on the boundary."""
    if u.shape != problem.grid.shape:
        raise InputError(f"field shape {u.shape} != problem grid {problem.grid.shape}")
    return u.with_values(_residual_array(u.values, problem.grid, problem.forcing.values))


def manufactured_forcing(u_star: AnalyticField, grid: GridSpec) -> ScalarField2D:
    """Forcing that makes ``u_star`` an exact solution, from its analytic jets."""
    S, Z = grid.mesh()
    return ScalarField2D.on_grid(grid, translator_residual(u_star.jets(S, Z)))


def coons_guess(grid: GridSpec, boundary_data: np.ndarray) -> np.ndarray:
    """Transfinite bilinear interpolation of the four boundary edges.

    Exact for affine data, so plane problems start at the solution.
    """
    b = np.asarray(boundary_data, float)
    xi = ((grid.s() - grid.s0) / (grid.s1 - grid.s0))[:, None]
    eta = ((grid.z() - grid.z0) / (grid.z1 - grid.z0))[None, :]
    left, right = b[0, :][None, :], b[-1, :][None, :]
    bottom, top = b[:, 0][:, None], b[:, -1][:, None]
    corners = ((1 - xi) * (1 - eta) * b[0, 0] + xi * (1 - eta) * b[-1, 0]
               + (1 - xi) * eta * b[0, -1] + xi * eta * b[-1, -1])
    guess = (1 - xi) * left + xi * right + (1 - eta) * bottom + eta * top - corners
    guess[boundary_mask(b.shape)] = b[boundary_mask(b.shape)]
    return guess


class _Jacobian:
    """Colored forward-difference Jacobian on the interior unknowns."""

    def __init__(self, grid: GridSpec, rel_step: float):
        self.grid = grid
        self.rel_step = rel_step
        n_s, n_z = grid.shape
        self.interior = ~boundary_mask(grid.shape)
        self.index = -np.ones(grid.shape, dtype=int)
        self.index[self.interior] = np.arange(self.interior.sum())
        self.n = int(self.interior.sum())

    def assemble(self, values: np.ndarray, forcing: np.ndarray) -> sp.csc_matrix:
        grid = self.grid
        n_s, n_z = grid.shape
        base = _residual_array(values, grid, forcing)
        rows, cols, data = [], [], []
        for ci in range(3):
            for cj in range(3):
                ii, jj = np.meshgrid(np.arange(1 + ci, n_s - 1, 3), np.arange(1 + cj, n_z - 1, 3), indexing="ij")
                ii, jj = ii.ravel(), jj.ravel()
                if ii.size == 0:
                    continue
                delta = self.rel_step * (1.0 + np.abs(values[ii, jj]))
                bumped = values.copy()
                bumped[ii, jj] += delta
                # actual increment after rounding keeps the quotient consistent
                delta = bumped[ii, jj] - values[ii, jj]
                diff = _residual_array(bumped, grid, forcing) - base
                for di in (-1, 0, 1):
                    for dj in (-1, 0, 1):
                        ri, rj = ii + di, jj + dj
                        ok = self.interior[ri, rj]
                        rows.append(self.index[ri[ok], rj[ok]])
                        cols.append(self.index[ii[ok], jj[ok]])
                        data.append(diff[ri[ok], rj[ok]] / delta[ok])
        J = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.n, self.n))
        return J.tocsc()


def _sup(res: np.ndarray) -> float:
    return float(np.max(np.abs(res)))


def newton_solve(problem: DirichletProblem, opts: SolveOptions | None = None, initial=None):
    """Damped Newton iteration; returns ``(solution, SolveReport)``.

    A step is accepted only if the residual sup-norm decreases, halving the
    step length up to ``opts.max_halvings`` times.
    """
    opts = opts or SolveOptions()
    grid = problem.grid
    if min(grid.shape) < 5:
        raise DegenerateGridError("newton_solve needs at least 5x5 nodes")
    bmask = boundary_mask(grid.shape)
    if initial is None:
        u = coons_guess(grid, problem.boundary_data)
    else:
        u = np.array(initial.values if isinstance(initial, ScalarField2D) else initial, dtype=float)
        if u.shape != grid.shape:
            raise InputError("initial guess does not match the grid")
        u[bmask] = problem.boundary_data[bmask]
    forcing = problem.forcing.values
    jac = _Jacobian(grid, opts.fd_rel_step)
    interior = jac.interior

    res = _residual_array(u, grid, forcing)
    report = SolveReport(residual_history=[_sup(res)])
    quad_ratios = []
    while report.residual_history[-1] > opts.tol:
        if report.iterations >= opts.max_iter:
            report.final_residual = report.residual_history[-1]
            raise ConvergenceFailure(f"no convergence after {opts.max_iter} Newton iterations", report)
        J = jac.assemble(u, forcing)
        try:
            lu = spla.splu(J)
        except RuntimeError as exc:
            raise LinearSolveError(f"Jacobian factorization failed: {exc}") from exc
        step = lu.solve(-res[interior])
        if not np.all(np.isfinite(step)):
            raise LinearSolveError("linear solve produced non-finite update")
        prev = report.residual_history[-1]
        lam = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = u.copy()
            trial[interior] += lam * step
            trial_res = _residual_array(trial, grid, forcing)
            if _sup(trial_res) < prev:
                break
            lam *= 0.5
        else:
            report.final_residual = prev
            raise ConvergenceFailure("step halving failed to reduce the residual", report)
        u, res = trial, trial_res
        report.iterations += 1
        report.residual_history.append(_sup(res))
        report.step_lengths.append(lam)
        if lam == 1.0 and prev < 1e-3 and report.residual_history[-1] > opts.tol:
            quad_ratios.append(report.residual_history[-1] / prev ** 2)
        log.debug("newton %d: residual %.3e (step %.3g)", report.iterations, report.residual_history[-1], lam)

    report.converged = True
    report.final_residual = report.residual_history[-1]
    report.quadratic_constant = max(quad_ratios) if quad_ratios else None
    return ScalarField2D.on_grid(grid, u), report


def max_error(u: ScalarField2D, exact: AnalyticField, interior_only: bool = True) -> float:
    S, Z = u.mesh()
    err = np.abs(u.values - exact.eval(S, Z))
    if interior_only:
        err = err[1:-1, 1:-1]
    return float(err.max())
