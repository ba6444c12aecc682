"""Structured grid functions on a chart of a vertical plane, and their jets.

Coordinates on the plane are ``s`` (horizontal, in-plane) and ``z``
(vertical).  Values are stored with shape ``(n_s, n_z)`` and indexed
``values[i, j]`` with ``i`` along ``s`` and ``j`` along ``z``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from translab.errors import DegenerateGridError, DomainError, InputError

_INTEGRAL_TOL = 1e-9
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Node layout of a rectangle ``[s0, s1] x [z0, z1]`` with ``n_s x n_z`` nodes."""

    s0: float
    s1: float
    z0: float
    z1: float
    n_s: int
    n_z: int

    def __post_init__(self):
        if self.n_s < 2 or self.n_z < 2:
            raise DegenerateGridError(f"need at least 2 nodes per axis, got {self.n_s}x{self.n_z}")
        if not (self.s1 > self.s0 and self.z1 > self.z0):
            raise InputError("grid rectangle must have positive extent")

    @classmethod
    def square(cls, s0, s1, z0, z1, n):
        return cls(float(s0), float(s1), float(z0), float(z1), int(n), int(n))

    @property
    def h_s(self) -> float:
        return (self.s1 - self.s0) / (self.n_s - 1)

    @property
    def h_z(self) -> float:
        return (self.z1 - self.z0) / (self.n_z - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_s, self.n_z)

    def s(self) -> np.ndarray:
        return self.s0 + np.arange(self.n_s) * self.h_s

    def z(self) -> np.ndarray:
        return self.z0 + np.arange(self.n_z) * self.h_z

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.s(), self.z(), indexing="ij")

    def refined(self) -> GridSpec:
        """Same rectangle with every cell halved."""
        return GridSpec(self.s0, self.s1, self.z0, self.z1, 2 * self.n_s - 1, 2 * self.n_z - 1)


class ScalarField2D:
    """Immutable grid function ``u(s, z)``."""

    __slots__ = ("values", "h_s", "h_z", "s0", "s1", "z0", "z1")

    def __init__(self, values, h_s, h_z, s0, s1, z0, z1):
        values = np.array(values, dtype=float)
        if values.ndim != 2:
            raise InputError("values must be a 2-D array")
        if not np.all(np.isfinite(values)):
            raise InputError("field values must be finite at every node")
        if h_s <= 0 or h_z <= 0:
            raise InputError("grid spacings must be positive")
        for span, h, n, axis in ((s1 - s0, h_s, values.shape[0], "s"), (z1 - z0, h_z, values.shape[1], "z")):
            cells = span / h
            if abs(cells - round(cells)) > _INTEGRAL_TOL or round(cells) != n - 1:
                raise InputError(f"{axis}-extent {span!r} is not {n - 1} cells of width {h!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        for name, val in (("h_s", h_s), ("h_z", h_z), ("s0", s0), ("s1", s1), ("z0", z0), ("z1", z1)):
            object.__setattr__(self, name, float(val))

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField2D is immutable")

    def __repr__(self):
        return (f"ScalarField2D(shape={self.shape}, s=[{self.s0}, {self.s1}], "
                f"z=[{self.z0}, {self.z1}])")

    @classmethod
    def on_grid(cls, grid: GridSpec, values) -> ScalarField2D:
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise InputError(f"values shape {values.shape} does not match grid {grid.shape}")
        return cls(values, grid.h_s, grid.h_z, grid.s0, grid.s1, grid.z0, grid.z1)

    @classmethod
    def from_function(cls, grid: GridSpec, f) -> ScalarField2D:
        S, Z = grid.mesh()
        return cls.on_grid(grid, np.broadcast_to(f(S, Z), grid.shape))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def grid(self) -> GridSpec:
        n_s, n_z = self.shape
        return GridSpec(self.s0, self.s1, self.z0, self.z1, n_s, n_z)

    def s(self) -> np.ndarray:
        return self.s0 + np.arange(self.shape[0]) * self.h_s

    def z(self) -> np.ndarray:
        return self.z0 + np.arange(self.shape[1]) * self.h_z

    def mesh(self):
        return np.meshgrid(self.s(), self.z(), indexing="ij")

    def with_values(self, values) -> ScalarField2D:
        return ScalarField2D.on_grid(self.grid, values)

    def same_grid(self, other: ScalarField2D) -> bool:
        return (self.shape == other.shape
                and np.allclose([self.s0, self.s1, self.z0, self.z1],
                                [other.s0, other.s1, other.z0, other.z1], rtol=0, atol=1e-12))

    def contains(self, s, z, tol=_EDGE_TOL) -> np.ndarray:
        s, z = np.asarray(s), np.asarray(z)
        return ((s >= self.s0 - tol) & (s <= self.s1 + tol)
                & (z >= self.z0 - tol) & (z <= self.z1 + tol))

    def interpolate(self, s, z) -> np.ndarray:
        """Bilinear interpolation of the nodal values at arbitrary points."""
        return bilinear(self, self.values, s, z)


def bilinear(field: ScalarField2D, array: np.ndarray, s, z) -> np.ndarray:
    """Bilinearly interpolate a nodal ``array`` living on ``field``'s grid."""
    s = np.asarray(s, dtype=float)
    z = np.asarray(z, dtype=float)
    if not np.all(field.contains(s, z)):
        raise DomainError("interpolation point outside the grid rectangle")
    n_s, n_z = field.shape
    xs = np.clip((s - field.s0) / field.h_s, 0.0, n_s - 1)
    xz = np.clip((z - field.z0) / field.h_z, 0.0, n_z - 1)
    i = np.minimum(np.floor(xs).astype(int), n_s - 2)
    j = np.minimum(np.floor(xz).astype(int), n_z - 2)
    ts = xs - i
    tz = xz - j
    return ((1 - ts) * (1 - tz) * array[i, j] + ts * (1 - tz) * array[i + 1, j]
            + (1 - ts) * tz * array[i, j + 1] + ts * tz * array[i + 1, j + 1])


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Jet2:
    """Second-order jet ``(u, Du, D2u)`` at a single point."""

    u: float
    Du: np.ndarray
    D2u: np.ndarray

    def __post_init__(self):
        Du = np.array(self.Du, dtype=float).reshape(2)
        D2u = np.array(self.D2u, dtype=float).reshape(2, 2)
        if abs(D2u[0, 1] - D2u[1, 0]) > 1e-14 * max(1.0, abs(D2u[0, 1])):
            raise InputError("D2u must be symmetric")
        D2u[1, 0] = D2u[0, 1]
        Du.setflags(write=False)
        D2u.setflags(write=False)
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "Du", Du)
        object.__setattr__(self, "D2u", D2u)

    @classmethod
    def from_components(cls, u=0.0, us=0.0, uz=0.0, uss=0.0, usz=0.0, uzz=0.0) -> Jet2:
        return cls(u, (us, uz), ((uss, usz), (usz, uzz)))

    us = property(lambda self: self.Du[0])
    uz = property(lambda self: self.Du[1])
    uss = property(lambda self: self.D2u[0, 0])
    usz = property(lambda self: self.D2u[0, 1])
    uzz = property(lambda self: self.D2u[1, 1])


@dataclass(frozen=True)
class JetField:
    """Jets of a grid function at every node (or at a batch of points).

    Exposes the same ``us, uz, uss, usz, uzz`` attributes as :class:`Jet2`,
    so the pointwise geometry operations accept either.
    """

    u: np.ndarray
    us: np.ndarray
    uz: np.ndarray
    uss: np.ndarray
    usz: np.ndarray
    uzz: np.ndarray

    _NAMES = ("u", "us", "uz", "uss", "usz", "uzz")

    def at(self, i: int, j: int) -> Jet2:
        return Jet2.from_components(*(float(getattr(self, n)[i, j]) for n in self._NAMES))

    def map(self, fn) -> JetField:
        return JetField(*(fn(getattr(self, n)) for n in self._NAMES))

    def grad_sq(self) -> np.ndarray:
        return self.us ** 2 + self.uz ** 2

    def hess_sq(self) -> np.ndarray:
        """Frobenius norm squared of the Hessian."""
        return self.uss ** 2 + 2 * self.usz ** 2 + self.uzz ** 2


def _require_nodes(values: np.ndarray, minimum: int = 3):
    if min(values.shape) < minimum:
        raise DegenerateGridError(f"jets need at least {minimum} nodes per axis, got {values.shape}")


def first_derivative(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Central differences inside, 3-point one-sided at the ends; O(h^2)."""
    return np.gradient(values, h, axis=axis, edge_order=2)


def second_derivative(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Compact 3-point second difference; 4-point one-sided at the ends.

    With exactly 3 nodes along ``axis`` the ends fall back to the
    3-point stencil, which is only first-order accurate there.
    """
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = v[2:] - 2.0 * v[1:-1] + v[:-2]
    if v.shape[0] >= 4:
        out[0] = 2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]
        out[-1] = 2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]
    else:
        out[0] = out[1]
        out[-1] = out[-2]
    return np.moveaxis(out / (h * h), 0, axis)


def jet_arrays(values: np.ndarray, h_s: float, h_z: float) -> JetField:
    _require_nodes(values)
    us = first_derivative(values, h_s, 0)
    uz = first_derivative(values, h_z, 1)
    return JetField(
        u=values,
        us=us,
        uz=uz,
        uss=second_derivative(values, h_s, 0),
        usz=first_derivative(uz, h_s, 0),
        uzz=second_derivative(values, h_z, 1),
    )


def jet_field(u: ScalarField2D) -> JetField:
    """Nodal jets of ``u`` by second-order finite differences."""
    return jet_arrays(u.values, u.h_s, u.h_z)


def jet_at(u: ScalarField2D, node: tuple[int, int]) -> Jet2:
    i, j = node
    n_s, n_z = u.shape
    if not (0 <= i < n_s and 0 <= j < n_z):
        raise InputError(f"node {node} outside grid of shape {u.shape}")
    return jet_field(u).at(i, j)


def interpolate_jets(u: ScalarField2D, jets: JetField, s, z) -> JetField:
    """Off-node jets by bilinear interpolation of the nodal jet fields."""
    return jets.map(lambda a: bilinear(u, a, s, z))


# ---------------------------------------------------------------------------
# CSV + JSON sidecar
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field(u: ScalarField2D, path) -> tuple[Path, Path]:
    """Write ``s,z,u`` CSV rows (z outer, s inner) and a JSON grid sidecar."""
    path = Path(path)
    S, Z = u.mesh()
    lines = ["s,z,u"]
    n_s, n_z = u.shape
    for j in range(n_z):
        for i in range(n_s):
            lines.append(f"{_fmt(S[i, j])},{_fmt(Z[i, j])},{_fmt(u.values[i, j])}")
    path.write_text("\n".join(lines) + "\n")
    sidecar = path.with_suffix(".json")
    meta = {k: getattr(u, k) for k in ("h_s", "h_z", "s0", "s1", "z0", "z1")}
    sidecar.write_text(json.dumps(meta, indent=2) + "\n")
    return path, sidecar


def read_field(path) -> ScalarField2D:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    missing = {"h_s", "h_z", "s0", "s1", "z0", "z1"} - meta.keys()
    if missing:
        raise InputError(f"sidecar missing keys {sorted(missing)}")
    with path.open() as fh:
        header = fh.readline().strip()
        if header != "s,z,u":
            raise InputError(f"unexpected CSV header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    n_s = int(round((meta["s1"] - meta["s0"]) / meta["h_s"])) + 1
    n_z = int(round((meta["z1"] - meta["z0"]) / meta["h_z"])) + 1
    if data.shape != (n_s * n_z, 3):
        raise InputError(f"expected {n_s * n_z} rows, found {data.shape[0]}")
    values = data[:, 2].reshape(n_z, n_s).T
    return ScalarField2D(values, meta["h_s"], meta["h_z"], meta["s0"], meta["s1"], meta["z0"], meta["z1"])
