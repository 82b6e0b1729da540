"""Operator parameters, truncation policy, and precondition checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from ..errors import ParameterError

if TYPE_CHECKING:  # pragma: no cover
    from .functions import TestFunction

__all__ = ["OperatorParams", "TruncationPolicy", "DEFAULT_TRUNCATION", "validate"]


@dataclass(frozen=True)
class OperatorParams:
    """The triple (n, alpha, beta) indexing one operator.

    n is a positive real (nothing requires it to be an integer); beta may be
    negative.  Validity (n > beta, alpha > -1, and compatibility with a
    function's growth class) is checked by :func:`validate`, not at
    construction, so invalid triples can be reported with precise codes.
    """

    n: float
    alpha: float = 0.0
    beta: float = 0.0

    @property
    def rate(self) -> float:
        """Exponential rate n - beta of the coefficient integrals."""
        return self.n - self.beta


@dataclass(frozen=True)
class TruncationPolicy:
    """Tolerances for k-sum truncation and coefficient quadrature."""

    eps_tail: float = 1e-13
    quad_nodes: int = 96
    eps_quad: float = 1e-12
    k_max: int = 50_000

    def __post_init__(self):
        if not (0.0 < self.eps_tail <= 1e-8):
            raise ParameterError(
                "eps_tail_range", f"eps_tail must lie in (0, 1e-8], got {self.eps_tail}"
            )
        if self.quad_nodes < 32:
            raise ParameterError(
                "quad_nodes_too_small", f"quad_nodes must be >= 32, got {self.quad_nodes}"
            )
        if not self.eps_quad > 0:
            raise ParameterError(
                "eps_quad_nonpositive", f"eps_quad must be > 0, got {self.eps_quad}"
            )
        if self.k_max < 256:
            raise ParameterError("k_max_too_small", f"k_max must be >= 256, got {self.k_max}")


DEFAULT_TRUNCATION = TruncationPolicy()


def validate(params: OperatorParams, f: "TestFunction | None" = None) -> None:
    """Check that the operator is well defined (and applicable to ``f``).

    Raises :class:`ParameterError` with a distinct code per violated
    constraint: ``n_le_beta``, ``alpha_le_minus_one``, or
    ``growth_incompatible`` (n <= beta + A, so the coefficient integrals
    of a function with growth rate A would diverge).
    """
    if not params.n > params.beta:
        raise ParameterError(
            "n_le_beta", f"requires n > beta, got n = {params.n}, beta = {params.beta}"
        )
    if not params.alpha > -1.0:
        raise ParameterError(
            "alpha_le_minus_one", f"requires alpha > -1, got alpha = {params.alpha}"
        )
    if f is not None and not params.n > params.beta + f.growth_a:
        raise ParameterError(
            "growth_incompatible",
            f"requires n > beta + A for growth class A = {f.growth_a}; "
            f"got n = {params.n}, beta = {params.beta}",
        )
