"""Pointwise differential geometry of graphs over vertical planes.

A graph over the vertical plane spanned by ``e_s`` and ``e_z`` is the
surface ``origin + u(s, z) e_n + s e_s + z e_z``.  Vectors returned here are
expressed in the chart frame ``(e_n, e_s, e_z)``; since ``e_z`` is the
global vertical, the vertical direction is ``(0, 0, 1)`` in this frame.

All operations broadcast: they accept a :class:`~translab.grid.Jet2` or a
:class:`~translab.grid.JetField` and return scalars or arrays accordingly.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field

import numpy as np

from translab.errors import InputError
from translab.grid import ScalarField2D

E3 = np.array([0.0, 0.0, 1.0])

# Weight of the D_z u drift term in the translator operator.  Always 1.0
# outside of mutation tests; see ``drop_dz_term``.
_DZ_WEIGHT = 1.0


@contextlib.contextmanager
def drop_dz_term():
    """Test hook: temporarily remove the ``D_z u`` term from the translator operator."""
    global _DZ_WEIGHT
    previous = _DZ_WEIGHT
    _DZ_WEIGHT = 0.0
    try:
        yield
    finally:
        _DZ_WEIGHT = previous


def dz_weight() -> float:
    return _DZ_WEIGHT


@dataclass(frozen=True)
class VerticalPlaneChart:
    """Isometric coordinates ``(s, z)`` on a vertical plane through ``origin``.

    ``e_s`` must be horizontal and of unit length; ``e_z`` is the global
    vertical and ``e_n = e_s x e_z`` completes a right-handed frame.
    """

    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    e_s: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self):
        origin = np.array(self.origin, dtype=float).reshape(3)
        e_s = np.array(self.e_s, dtype=float).reshape(3)
        if abs(e_s[2]) > 1e-14:
            raise InputError("e_s must be horizontal")
        norm = np.linalg.norm(e_s)
        if abs(norm - 1.0) > 1e-12:
            raise InputError("e_s must be a unit vector")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "e_s", e_s / norm)

    @property
    def e_z(self) -> np.ndarray:
        return E3.copy()

    @property
    def e_n(self) -> np.ndarray:
        return np.cross(self.e_s, E3)

    def frame(self) -> np.ndarray:
        """Rows ``e_n, e_s, e_z`` in world coordinates."""
        return np.vstack([self.e_n, self.e_s, self.e_z])

    def to_world(self, vec) -> np.ndarray:
        """Map chart-frame components ``(n, s, z)`` to a world vector."""
        return np.asarray(vec, dtype=float) @ self.frame()

    def embed(self, u, s, z) -> np.ndarray:
        comps = np.stack(np.broadcast_arrays(u, s, z), axis=-1)
        return self.origin + self.to_world(comps)


@dataclass(frozen=True)
class GraphPatch:
    """The surface ``graph u`` over a vertical plane."""

    u: ScalarField2D
    chart: VerticalPlaneChart = field(default_factory=VerticalPlaneChart)

    def nodes_world(self) -> np.ndarray:
        S, Z = self.u.mesh()
        return self.chart.embed(self.u.values, S, Z)


def grad_sq(j):
    return j.us ** 2 + j.uz ** 2


def area_element(j):
    """Graph area element ``sqrt(1 + |Du|^2)``."""
    return np.sqrt(1.0 + grad_sq(j))


def unit_normal(j) -> np.ndarray:
    """Unit normal ``(e_n - Du) / sqrt(1 + |Du|^2)`` in the chart frame."""
    W = area_element(j)
    return np.stack(np.broadcast_arrays(1.0 / W, -j.us / W, -j.uz / W), axis=-1)


def coeff_matrix(j) -> np.ndarray:
    """``a^{ij} = delta^{ij} - D^i u D^j u / (1 + |Du|^2)``, shape ``(..., 2, 2)``."""
    us, uz = np.broadcast_arrays(np.asarray(j.us, float), np.asarray(j.uz, float))
    W2 = 1.0 + us ** 2 + uz ** 2
    a = np.empty(us.shape + (2, 2))
    a[..., 0, 0] = 1.0 - us * us / W2
    a[..., 0, 1] = a[..., 1, 0] = -us * uz / W2
    a[..., 1, 1] = 1.0 - uz * uz / W2
    return a


def trace_a_hessian(j):
    """``a^{ij} D_i D_j u`` without forming the matrix."""
    W2 = 1.0 + grad_sq(j)
    return (j.uss + j.uzz) - (j.us * j.us * j.uss + 2.0 * j.us * j.uz * j.usz + j.uz * j.uz * j.uzz) / W2


def translator_residual(j, forcing=0.0):
    """``a^{ij}(Du) D_i D_j u + D_z u - forcing``; zero on translators."""
    return trace_a_hessian(j) + _DZ_WEIGHT * j.uz - forcing


def mean_curvature(j):
    """Scalar mean curvature with respect to :func:`unit_normal`."""
    return trace_a_hessian(j) / area_element(j)


def tangential_part(v, nu) -> np.ndarray:
    """Projection ``v - <v, nu> nu`` onto the tangent plane."""
    v = np.asarray(v, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if np.any(np.abs(np.linalg.norm(nu, axis=-1) - 1.0) > 1e-12):
        raise InputError("nu must be a unit vector")
    return v - np.sum(v * nu, axis=-1, keepdims=True) * nu
