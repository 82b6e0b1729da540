"""Szász–Mirakyan–Laguerre–Durrmeyer operators on [0, ∞).

Library layout:

* :mod:`smld.special` -- stable scalar kernels (incomplete gamma, scaled
  Kummer function, log-domain Poisson weights),
* :mod:`smld.operator` -- operator application, kernel, certified k-sum
  truncation and coefficient quadrature,
* :mod:`smld.moments` -- raw/central moments by four cross-checking routes
  plus leading-order predictions,
* :mod:`smld.spectral` -- the coefficient matrix P and its two closed-form
  eigenpairs,
* :mod:`smld.analysis` -- convergence experiments in sup, weighted, and
  L_p norms, and the Schur-test quantities,
* :mod:`smld.verification` -- the named check battery behind
  ``smld verify-all``,
* :mod:`smld.cli` -- the command-line interface.
"""

from .operator import (
    DEFAULT_TRUNCATION,
    OperatorParams,
    TestFunction,
    TruncationPolicy,
    apply_operator,
    apply_operator_grid,
    apply_szasz,
    coefficient,
    growth_bound,
    kernel,
    load_sampled,
    validate,
    value_at_zero,
)
from .special import AccuracyPolicy

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AccuracyPolicy",
    "DEFAULT_TRUNCATION",
    "OperatorParams",
    "TestFunction",
    "TruncationPolicy",
    "apply_operator",
    "apply_operator_grid",
    "apply_szasz",
    "coefficient",
    "growth_bound",
    "kernel",
    "load_sampled",
    "validate",
    "value_at_zero",
]
