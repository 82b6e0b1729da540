"""Raw and central moments: closed forms, recurrences, asymptotics.

Four independent routes are kept alive on purpose so each can check the
others:

* closed form via the scaled Kummer function (which, for integer order,
  reduces to an exact finite sum),
* the three-term recurrence
      (n-b)^2 mu_{r+1} = (n-b)(alpha+2r+1+nx) mu_r - r(alpha+r) mu_{r-1},
  derived from the contiguous relation of 1F1 (DLMF 13.3.1); forward
  iteration is mildly stable because the subtracted term is at most
  r/(alpha+2r+1) of the leading one,
* explicit degree-r polynomials in nx for r <= 4, whose coefficients
  follow the pattern binom(r, j) (alpha+j+1)_{r-j},
* the binomial expansion of central moments, accumulated in double-double
  arithmetic because the expansion cancels r-1 leading orders.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from ._ddouble import DD, dd, dd_add, dd_div, dd_mul, dd_neg, dd_to_float, two_prod, two_sum
from .errors import CancellationWarning, ParameterError, UnsupportedOrderError
from .operator import (
    OperatorParams,
    TestFunction,
    TruncationPolicy,
    apply_operator,
    validate,
)
from .special import AccuracyPolicy, kummer_scaled, pochhammer

__all__ = [
    "MomentReport",
    "AsymptoticCase",
    "AsymptoticRow",
    "raw_moment_closed",
    "raw_moment_recurrence",
    "raw_moments_recurrence",
    "raw_moment_explicit",
    "diff_recurrence_residual",
    "central_moment_explicit",
    "central_moment_binomial",
    "asymptotic_prediction",
    "asymptotic_case",
    "asymptotic_ratio_table",
    "moment_report",
]


def raw_moment_closed(
    r: int, x: float, params: OperatorParams, policy: AccuracyPolicy | None = None
) -> float:
    """mu_r(x) = (alpha+1)_r / (n-beta)^r * e^(-nx) 1F1(alpha+r+1; alpha+1; nx)."""
    _check_order(r)
    validate(params)
    front = pochhammer(params.alpha + 1.0, r) / params.rate ** r
    return front * kummer_scaled(params.alpha + r + 1.0, params.alpha + 1.0, params.n * x, policy)


def raw_moments_recurrence(r_max: int, x: float, params: OperatorParams) -> list[float]:
    """All raw moments mu_0 .. mu_{r_max} by forward three-term recurrence."""
    _check_order(r_max)
    validate(params)
    rate = params.rate
    z = params.n * x
    al = params.alpha
    mus = [1.0]
    if r_max >= 1:
        mus.append((al + 1.0 + z) / rate)
    for r in range(1, r_max):
        nxt = (rate * (al + 2.0 * r + 1.0 + z) * mus[r] - r * (al + r) * mus[r - 1]) / rate**2
        mus.append(nxt)
    return mus


def raw_moment_recurrence(r: int, x: float, params: OperatorParams) -> float:
    return raw_moments_recurrence(r, x, params)[r]


def raw_moment_explicit(r: int, x: float, params: OperatorParams) -> float:
    """Explicit polynomial-in-nx raw moments, available for r <= 4."""
    validate(params)
    if r < 0 or r != int(r):
        raise ParameterError("moment_order", f"r must be a nonnegative integer, got {r}")
    if r > 4:
        raise UnsupportedOrderError(f"explicit raw moments exist for r <= 4, got {r}")
    al = params.alpha
    z = params.n * x
    rate = params.rate
    if r == 0:
        return 1.0
    if r == 1:
        return (z + al + 1.0) / rate
    if r == 2:
        return (z**2 + (2.0 * al + 4.0) * z + (al + 1.0) * (al + 2.0)) / rate**2
    if r == 3:
        return (
            z**3
            + 3.0 * (al + 3.0) * z**2
            + 3.0 * (al + 2.0) * (al + 3.0) * z
            + (al + 1.0) * (al + 2.0) * (al + 3.0)
        ) / rate**3
    return (
        z**4
        + 4.0 * (al + 4.0) * z**3
        + 6.0 * (al + 3.0) * (al + 4.0) * z**2
        + 4.0 * (al + 2.0) * (al + 3.0) * (al + 4.0) * z
        + (al + 1.0) * (al + 2.0) * (al + 3.0) * (al + 4.0)
    ) / rate**4


def diff_recurrence_residual(
    r: int, x: float, params: OperatorParams, h: float
) -> float:
    """|central difference of mu_r - (n r / (n-beta)) mu_{r-1} at alpha+1|.

    The derivative of the r-th moment equals n r / (n-beta) times the
    (r-1)-th moment with alpha shifted to alpha+1; the residual of the
    second-order central difference is O(h^2).
    """
    if r < 1:
        raise ParameterError("moment_order", f"requires r >= 1, got {r}")
    if not x - h > 0:
        raise ParameterError("diff_step", f"requires x - h > 0, got x = {x}, h = {h}")
    validate(params)
    left = raw_moment_recurrence(r, x - h, params)
    right = raw_moment_recurrence(r, x + h, params)
    shifted = OperatorParams(params.n, params.alpha + 1.0, params.beta)
    rhs = params.n * r / params.rate * raw_moment_recurrence(r - 1, x, shifted)
    return abs((right - left) / (2.0 * h) - rhs)


def central_moment_explicit(r: int, x: float, params: OperatorParams) -> float:
    """Explicit central moments for r <= 4."""
    validate(params)
    if r < 0 or r != int(r):
        raise ParameterError("moment_order", f"r must be a nonnegative integer, got {r}")
    if r > 4:
        raise UnsupportedOrderError(f"explicit central moments exist for r <= 4, got {r}")
    al = params.alpha
    b = params.beta
    n = params.n
    rate = params.rate
    if r == 0:
        return 1.0
    if r == 1:
        return (al + 1.0 + b * x) / rate
    if r == 2:
        return (
            (al + 1.0) * (al + 2.0) + 2.0 * x * (n + b * (al + 1.0)) + b**2 * x**2
        ) / rate**2
    if r == 3:
        return (
            b**3 * x**3
            + 3.0 * b * (2.0 * n + b * (al + 1.0)) * x**2
            + 3.0 * (al + 2.0) * (2.0 * n + b * (al + 1.0)) * x
            + (al + 1.0) * (al + 2.0) * (al + 3.0)
        ) / rate**3
    return (
        b**4 * x**4
        + 4.0 * b**2 * (3.0 * n + b * (al + 1.0)) * x**3
        + (12.0 * n**2 + 24.0 * (al + 2.0) * b * n + 6.0 * (al + 1.0) * (al + 2.0) * b**2)
        * x**2
        + 4.0 * (al + 2.0) * (al + 3.0) * (3.0 * n + b * (al + 1.0)) * x
        + (al + 1.0) * (al + 2.0) * (al + 3.0) * (al + 4.0)
    ) / rate**4


def _raw_moments_dd(r_max: int, x: float, params: OperatorParams) -> list[DD]:
    """Raw moments by the three-term recurrence in double-double arithmetic."""
    rate = two_sum(params.n, -params.beta)
    rate2 = dd_mul(rate, rate)
    z = two_prod(params.n, x)
    al1 = two_sum(params.alpha, 1.0)
    mus = [dd(1.0)]
    if r_max >= 1:
        mus.append(dd_div(dd_add(al1, z), rate))
    for r in range(1, r_max):
        coeff = dd_add(two_sum(params.alpha, 2.0 * r + 1.0), z)
        lead = dd_mul(dd_mul(rate, coeff), mus[r])
        sub = dd_mul(dd(r * 1.0), dd_mul(two_sum(params.alpha, float(r)), mus[r - 1]))
        mus.append(dd_div(dd_add(lead, dd_neg(sub)), rate2))
    return mus


def central_moment_binomial(r: int, x: float, params: OperatorParams) -> float:
    """Central moment via sum_j binom(r,j) (-x)^(r-j) mu_j, compensated.

    Both the raw moments and the alternating sum run in double-double
    arithmetic; emits :class:`CancellationWarning` if the estimated
    relative error still exceeds 1e-6 (it cannot for sane inputs, but the
    estimate is reported rather than assumed).
    """
    validate(params)
    if r < 0 or r != int(r):
        raise ParameterError("moment_order", f"r must be a nonnegative integer, got {r}")
    if r == 0:
        return 1.0
    mus = _raw_moments_dd(r, x, params)
    negx = dd(-x)
    powers = [dd(1.0)]
    for _ in range(r):
        powers.append(dd_mul(powers[-1], negx))
    acc = dd(0.0)
    max_term = 0.0
    for j in range(r + 1):
        term = dd_mul(dd_mul(dd(float(math.comb(r, j))), powers[r - j]), mus[j])
        max_term = max(max_term, abs(term[0]))
        acc = dd_add(acc, term)
    value = dd_to_float(acc)
    est_rel = (2.0**-96) * (r + 1) * max_term / max(abs(value), 1e-300)
    if est_rel > 1e-6:
        warnings.warn(
            f"central moment r = {r} at x = {x}: estimated relative error {est_rel:.2e}",
            CancellationWarning,
        )
    return value


def asymptotic_prediction(r: int, x: float, params: OperatorParams) -> float:
    """Stated leading term of the r-th central moment as n grows.

    r = 1: (alpha + 1 + beta x) / n; r >= 2: r(r-1) beta^(r-2) x^(r-1) / n^(r-1)
    with the convention beta^0 = 1 even at beta = 0.  The literal leading
    term is returned even where it vanishes (beta = 0, r >= 3); the ratio
    table flags those rows instead of inventing next-order terms.
    """
    if r < 1:
        raise ParameterError("moment_order", f"requires r >= 1, got {r}")
    validate(params)
    if r == 1:
        return (params.alpha + 1.0 + params.beta * x) / params.n
    return r * (r - 1) * params.beta ** (r - 2) * x ** (r - 1) / params.n ** (r - 1)


@dataclass(frozen=True)
class AsymptoticCase:
    """Leading-term prediction plus the A = n/(n-b), z = nx diagnostics."""

    r: int
    x: float
    params: OperatorParams
    predicted_leading: float
    a_factor: float
    z: float
    delta: float


def asymptotic_case(r: int, x: float, params: OperatorParams) -> AsymptoticCase:
    validate(params)
    a_factor = params.n / params.rate
    return AsymptoticCase(
        r=r,
        x=x,
        params=params,
        predicted_leading=asymptotic_prediction(r, x, params),
        a_factor=a_factor,
        z=params.n * x,
        delta=a_factor - 1.0,
    )


@dataclass(frozen=True)
class AsymptoticRow:
    n: float
    exact: float
    predicted: float
    two_term: float
    ratio: float | None
    flagged: bool  # prediction vanished; no ratio


def _two_term_value(r: int, x: float, params: OperatorParams) -> float:
    # x^r S0 + x^(r-1) S1 / n with S0 = (A-1)^r,
    # S1 = (alpha+1) r A (A-1)^(r-1) + r(r-1) A^2 (A-1)^(r-2)
    a = params.n / params.rate
    s0 = (a - 1.0) ** r
    s1 = (params.alpha + 1.0) * r * a * (a - 1.0) ** (r - 1)
    if r >= 2:
        s1 += r * (r - 1) * a**2 * (a - 1.0) ** (r - 2)
    return x**r * s0 + x ** (r - 1) * s1 / params.n


def asymptotic_ratio_table(
    r: int, x: float, alpha: float, beta: float, n_grid
) -> list[AsymptoticRow]:
    """Exact central moment vs predicted leading term along an n grid."""
    ns = [float(n) for n in n_grid]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("n_grid_order", "n_grid must be strictly ascending")
    rows = []
    for n in ns:
        params = OperatorParams(n, alpha, beta)
        exact = central_moment_binomial(r, x, params)
        predicted = asymptotic_prediction(r, x, params)
        two_term = _two_term_value(r, x, params)
        flagged = predicted == 0.0
        ratio = None if flagged else exact / predicted
        rows.append(AsymptoticRow(n, exact, predicted, two_term, ratio, flagged))
    return rows


@dataclass(frozen=True)
class MomentReport:
    """One (r, x) row with every computed route and the worst disagreement."""

    r: int
    x: float
    value_closed: float
    value_recurrence: float
    value_explicit: float | None
    value_quadrature: float
    max_cross_residual: float


def _cross_residual(values: list[float]) -> float:
    worst = 0.0
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            denom = max(abs(values[i]), abs(values[j]), 1.0)
            worst = max(worst, abs(values[i] - values[j]) / denom)
    return worst


def moment_report(
    r: int,
    x: float,
    params: OperatorParams,
    policy: TruncationPolicy | None = None,
    accuracy: AccuracyPolicy | None = None,
) -> MomentReport:
    """Compute mu_r(x) by every route and report the max pairwise residual."""
    closed = raw_moment_closed(r, x, params, accuracy)
    recur = raw_moment_recurrence(r, x, params)
    explicit = raw_moment_explicit(r, x, params) if r <= 4 else None
    quad = apply_operator(TestFunction.monomial(r), x, params, policy)
    present = [closed, recur, quad] + ([explicit] if explicit is not None else [])
    return MomentReport(r, x, closed, recur, explicit, quad, _cross_residual(present))


def _check_order(r: int) -> None:
    if r < 0 or r != int(r):
        raise ParameterError("moment_order", f"r must be a nonnegative integer, got {r}")
