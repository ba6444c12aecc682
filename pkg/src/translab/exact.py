"""Closed-form translators over a vertical plane, used as oracles and fixtures.

Two families are catalogued:

* ``Plane(a, c)``: ``u = a s + c``, a vertical plane (H = 0).
* ``GrimProfile(A, B)``: ``u = B - arcsin(A exp(-z))``, the grim reaper
  curve written as a graph over the vertical axis and extended trivially
  in ``s``.  It solves ``u'' / (1 + u'^2) + u' = 0`` for ``z > ln A``.

Both also serve the manufactured-solution machinery through the common
:class:`AnalyticField` interface (``eval`` and ``jets``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from translab.errors import DomainError, InputError
from translab.expr import number
from translab.grid import GridSpec, Jet2, JetField, ScalarField2D

GRIM_MARGIN = 1e-6


class AnalyticField:
    """A field with closed-form value and derivatives."""

    name = "field"

    def contains(self, s, z) -> np.ndarray:
        return np.ones(np.broadcast(np.asarray(s), np.asarray(z)).shape, dtype=bool)

    def _check(self, s, z):
        if not np.all(self.contains(s, z)):
            raise DomainError(f"point outside the domain of {self.describe()}")

    def eval(self, s, z):
        self._check(s, z)
        return self._value(np.asarray(s, float), np.asarray(z, float))

    def jets(self, s, z) -> JetField:
        """Exact jets at (arrays of) points."""
        self._check(s, z)
        s, z = np.broadcast_arrays(np.asarray(s, float), np.asarray(z, float))
        return self._jets(s, z)

    def analytic_jet(self, s: float, z: float) -> Jet2:
        j = self.jets(s, z)
        return Jet2.from_components(*(float(getattr(j, n)) for n in JetField._NAMES))

    def sample(self, grid: GridSpec) -> ScalarField2D:
        S, Z = grid.mesh()
        if not np.all(self.contains(S, Z)):
            raise DomainError(f"grid rectangle escapes the domain of {self.describe()}")
        return ScalarField2D.on_grid(grid, self._value(S, Z))

    def describe(self) -> str:
        return self.name

    def _value(self, s, z):
        raise NotImplementedError

    def _jets(self, s, z) -> JetField:
        raise NotImplementedError


class ExactSolution(AnalyticField):
    """An analytic translator; ``offset`` is the value of its asymptotic plane."""

    offset = 0.0

    def decay_profile(self, R: float) -> tuple[float, float]:
        raise NotImplementedError

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Plane(ExactSolution):
    a: float = 0.0
    c: float = 0.0
    name = "plane"

    @property
    def offset(self) -> float:
        return self.c

    def _value(self, s, z):
        return self.a * s + self.c + 0.0 * z

    def _jets(self, s, z):
        zero = np.zeros_like(s)
        return JetField(self._value(s, z), zero + self.a, zero, zero, zero, zero)

    def decay_profile(self, R: float) -> tuple[float, float]:
        """Sup of ``(u - c)^2`` and ``|Du|^2`` over ``{z >= R}``."""
        return (0.0 if self.a == 0 else math.inf), self.a * self.a

    def params(self):
        return {"a": self.a, "c": self.c}

    def closed_form(self) -> str:
        return "u(s,z) = a*s + c"

    def domain_text(self) -> str:
        return "all (s, z)"

    def describe(self):
        return f"plane:a={self.a!r},c={self.c!r}"


@dataclass(frozen=True)
class GrimProfile(ExactSolution):
    A: float = 1.0
    B: float = math.pi / 2
    name = "grim"

    def __post_init__(self):
        if not self.A > 0:
            raise InputError("GrimProfile amplitude A must be positive")

    @property
    def offset(self) -> float:
        return self.B

    @property
    def z_min(self) -> float:
        return math.log(self.A) + GRIM_MARGIN

    def contains(self, s, z):
        s, z = np.broadcast_arrays(np.asarray(s, float), np.asarray(z, float))
        return z >= self.z_min

    def _value(self, s, z):
        return self.B - np.arcsin(self.A * np.exp(-z)) + 0.0 * s

    def _jets(self, s, z):
        w = self.A * np.exp(-z)
        q = 1.0 - w * w
        uz = w / np.sqrt(q)
        uzz = -w / (q * np.sqrt(q))
        zero = np.zeros_like(s)
        return JetField(self._value(s, z), zero, uz, zero, zero, uzz)

    def decay_profile(self, R: float) -> tuple[float, float]:
        """Sup of ``(u - B)^2`` and ``|Du|^2`` over the tail ``{z >= R}``.

        Both quantities decrease in ``z``, so the sups sit at ``z = R``.
        """
        if R <= math.log(self.A):
            raise DomainError(f"tail start R={R} must exceed ln A = {math.log(self.A)}")
        w = self.A * math.exp(-R)
        return math.asin(w) ** 2, w * w / (1.0 - w * w)

    def params(self):
        return {"A": self.A, "B": self.B}

    def closed_form(self) -> str:
        return "u(s,z) = B - arcsin(A*exp(-z))"

    def domain_text(self) -> str:
        return f"z >= ln(A) + {GRIM_MARGIN:g}"

    def describe(self):
        return f"grim:A={self.A!r},B={self.B!r}"


@dataclass(frozen=True)
class SineDecay(AnalyticField):
    """``u* = amp sin(s) exp(-z)``: a smooth non-translator for manufactured solutions."""

    amp: float = 0.1
    name = "mms"

    def _value(self, s, z):
        return self.amp * np.sin(s) * np.exp(-z)

    def _jets(self, s, z):
        e = self.amp * np.exp(-z)
        sn, cs = np.sin(s), np.cos(s)
        return JetField(e * sn, e * cs, -e * sn, -e * sn, -e * cs, e * sn)

    def params(self):
        return {"amp": self.amp}

    def describe(self):
        return f"mms:amp={self.amp!r}"


CATALOG = (Plane, GrimProfile)
_KINDS = {"plane": Plane, "grim": GrimProfile, "mms": SineDecay}


def parse_fixture(text: str) -> AnalyticField:
    """Parse ``kind:key=value,...``, e.g. ``grim:A=1,B=pi/2`` or ``plane:a=2,c=1``."""
    kind, _, rest = str(text).partition(":")
    kind = kind.strip().lower()
    if kind not in _KINDS:
        raise InputError(f"unknown fixture kind {kind!r}; expected one of {sorted(_KINDS)}")
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"fixture parameter {item!r} is not key=value")
        kwargs[key.strip()] = number(val)
    try:
        return _KINDS[kind](**kwargs)
    except TypeError as exc:
        raise InputError(f"bad parameters for fixture {kind!r}: {exc}") from exc
