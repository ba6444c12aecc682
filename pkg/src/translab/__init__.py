"""Numerical laboratory for translating solitons of mean curvature flow written
as graphs over a vertical plane: exact solutions, a Newton solver for the
translator equation, the boundary-flux identity, Bernstein-type gradient
checks and an explicit flow evolver."""

from translab.errors import (ConvergenceFailure, DegenerateGridError, DomainError, HypothesisFailure, InputError,
                             LinearSolveError, TranslabError)
from translab.exact import GrimProfile, Plane, SineDecay, parse_fixture
from translab.geometry import GraphPatch, VerticalPlaneChart
from translab.grid import GridSpec, ScalarField2D, read_field, write_field
from translab.report import CheckReport

__version__ = "0.1.0"

__all__ = [
    "CheckReport", "ConvergenceFailure", "DegenerateGridError", "DomainError", "GraphPatch", "GridSpec",
    "GrimProfile", "HypothesisFailure", "InputError", "LinearSolveError", "Plane", "ScalarField2D", "SineDecay",
    "TranslabError", "VerticalPlaneChart", "parse_fixture", "read_field", "write_field",
]
