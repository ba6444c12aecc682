"""Exception hierarchy shared by every module."""


class TranslabError(Exception):
    """Base class for all errors raised by translab."""


class InputError(TranslabError, ValueError):
    """Malformed or inconsistent input (shape mismatch, bad flag, ...)."""


class DegenerateGridError(InputError):
    """Grid too small for the requested stencil."""


class DomainError(TranslabError, ValueError):
    """Point or region outside the domain where a field is defined."""


class HypothesisFailure(TranslabError):
    """An estimate's hypothesis does not hold for the given configuration.

    Distinct from a failed check: sweeps catch this to skip invalid
    configurations without masking real failures.
    """


class LinearSolveError(TranslabError, RuntimeError):
    """The Newton linear system could not be factorized."""


class ConvergenceFailure(TranslabError, RuntimeError):
    """Newton iteration did not reach the requested tolerance."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
