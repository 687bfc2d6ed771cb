"""Exception hierarchy shared by every module of the package."""


class MotivicError(Exception):
    """Base class; the CLI maps subclasses to exit code 3."""


class NegativeTwist(MotivicError, ValueError):
    pass


class PrecisionExhausted(MotivicError, ZeroDivisionError):
    """A series is indistinguishable from zero at its stated precision."""


class DivergentEvaluation(MotivicError):
    pass


class PoleAtEvaluationPoint(MotivicError):
    pass


class NonPolynomialBasis(MotivicError):
    pass


class NonConvergent(MotivicError):
    pass


class DivergentSeries(MotivicError):
    pass


class DecompositionFailure(MotivicError):
    pass


class InconsistentBases(MotivicError):
    pass


class Unsupported(MotivicError):
    pass


class NotAFunctionalEquationSolution(MotivicError):
    pass


class PoleOrderTooHigh(MotivicError):
    pass


class UsageError(MotivicError, ValueError):
    """Invalid command-line parameters (CLI exit code 2)."""
