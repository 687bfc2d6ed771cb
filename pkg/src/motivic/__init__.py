"""Exact arithmetic for Anderson t-modules over F_q[t]: dual motives,
exponential and logarithm coefficients, zeta values and pairing identities."""

__version__ = "0.1.0"

from .errors import (DecompositionFailure, DivergentEvaluation, DivergentSeries,  # noqa: E402
                     InconsistentBases, MotivicError, NegativeTwist, NonConvergent,
                     NonPolynomialBasis, NotAFunctionalEquationSolution, PoleAtEvaluationPoint,
                     PoleOrderTooHigh, PrecisionExhausted, Unsupported, UsageError)
from .scalar import FqContext, FqElement, LaurentSeries, RatFunc, ThetaPoly  # noqa: E402
from .tate import TateElement, TRational  # noqa: E402
from .motive import (MotiveElement, MotiveSpec, make_carlitz_tensor,  # noqa: E402
                     make_mzv_star, mzv_13_example)
from .tmodule import TModule, exp_coeff, exp_eval, from_motive, log_coeff, log_eval  # noqa: E402
from .special import (SpecialValue, anderson_thakur_poly, gamma_factorial,  # noqa: E402
                      mzv_naive, zeta_naive)
from .reports import VerificationReport  # noqa: E402

__all__ = [
    "__version__", "FqContext", "FqElement", "LaurentSeries", "RatFunc", "ThetaPoly",
    "TateElement", "TRational", "MotiveElement", "MotiveSpec", "make_carlitz_tensor",
    "make_mzv_star", "mzv_13_example", "TModule", "exp_coeff", "exp_eval", "from_motive",
    "log_coeff", "log_eval", "SpecialValue", "anderson_thakur_poly", "gamma_factorial",
    "mzv_naive", "zeta_naive", "VerificationReport", "MotivicError", "NegativeTwist",
    "PrecisionExhausted", "DivergentEvaluation", "PoleAtEvaluationPoint",
    "NonPolynomialBasis", "NonConvergent", "DivergentSeries", "DecompositionFailure",
    "InconsistentBases", "Unsupported", "NotAFunctionalEquationSolution",
    "PoleOrderTooHigh", "UsageError",
]
