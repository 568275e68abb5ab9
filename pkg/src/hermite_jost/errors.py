"""Exception types raised across the package."""


class HermiteJostError(Exception):
    """Base class for all errors raised by :mod:`hermite_jost`."""


class PrecisionLossError(HermiteJostError, ArithmeticError):
    """A recurrence could not deliver the requested relative accuracy."""

    def __init__(self, message, index=None, estimate=None):
        super().__init__(message)
        self.index = index
        self.estimate = estimate


class QuadratureError(HermiteJostError, ArithmeticError):
    """Adaptive quadrature did not converge within its refinement budget."""


class DomainError(HermiteJostError, ValueError):
    """Argument outside the validated window of an asymptotic formula."""


class OverflowGuardError(HermiteJostError, OverflowError):
    """A sequence would leave the double-precision exponent range."""


class NonPositiveWeightError(HermiteJostError, ValueError):
    """An off-diagonal weight a_n = sqrt(n) + c_n is not positive."""

    def __init__(self, index, value):
        super().__init__(f"a_{index} = {value!r} is not positive")
        self.index = index
        self.value = value


class AdmissibilityError(HermiteJostError, ValueError):
    """The perturbation does not satisfy the smallness conditions."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class TailNotConvergedError(HermiteJostError, ArithmeticError):
    """The Jost series tail estimate stayed above tolerance up to the horizon."""

    def __init__(self, message, estimate=None, terms=None):
        super().__init__(message)
        self.estimate = estimate
        self.terms = terms


class DegenerateJostError(HermiteJostError, ArithmeticError):
    """|F(lambda)| is numerically zero."""


class EigensolverError(HermiteJostError, ArithmeticError):
    """Implicit QL iteration failed to converge."""

    def __init__(self, index, iterations):
        super().__init__(f"QL iteration stuck at index {index} after {iterations} sweeps")
        self.index = index
        self.iterations = iterations


class ConfigError(HermiteJostError, ValueError):
    """Invalid run configuration; ``field`` or ``line`` locate the problem."""

    def __init__(self, message, field=None, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.field = field
        self.line = line


class BranchCutWarning(RuntimeWarning):
    """Argument is within rounding distance of a branch point."""
