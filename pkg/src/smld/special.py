"""Numerically stable scalar kernels used by every other module.

The operators on the half line only ever need these primitives on a
restricted parameter range (second Kummer parameter > 0, gamma shape > 0,
argument >= 0), and the implementations target exactly that range:

* ``log_gamma`` -- thin wrapper with a domain check,
* ``pochhammer`` -- rising factorial,
* ``reg_lower_gamma`` -- regularized lower incomplete gamma P(s, z),
  series below z = s + 1 and a Lentz continued fraction for the upper
  tail above it (the classical stable split),
* ``kummer_scaled`` -- e^(-z) 1F1(a; b; z) without overflow,
* ``poisson_weight_log`` / ``poisson_tail`` -- log-domain Poisson weights
  and certified tail masses for truncating the operator's k-sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonConvergenceError, ParameterError

__all__ = [
    "AccuracyPolicy",
    "DEFAULT_ACCURACY",
    "log_gamma",
    "pochhammer",
    "reg_lower_gamma",
    "kummer_scaled",
    "poisson_weight_log",
    "poisson_tail",
]

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class AccuracyPolicy:
    """Tolerances governing series truncation in ``kummer_scaled``.

    ``switchover_z`` is the base threshold between the small-z Taylor
    series and the large-z asymptotic expansion; the effective threshold
    is ``switchover_z + |a| + |b|``, which tracks where the asymptotic
    series starts to pay off for larger parameters.
    """

    series_rel_tol: float = 1e-14
    max_terms: int = 512
    switchover_z: float = 40.0

    def __post_init__(self):
        if not (0.0 < self.series_rel_tol < 1e-6):
            raise ParameterError(
                "series_rel_tol_range",
                f"series_rel_tol must lie in (0, 1e-6), got {self.series_rel_tol}",
            )
        if self.max_terms < 64:
            raise ParameterError(
                "max_terms_too_small", f"max_terms must be >= 64, got {self.max_terms}"
            )
        if not self.switchover_z > 0:
            raise ParameterError(
                "switchover_nonpositive",
                f"switchover_z must be > 0, got {self.switchover_z}",
            )


DEFAULT_ACCURACY = AccuracyPolicy()


def log_gamma(s: float) -> float:
    """ln Gamma(s) for s > 0."""
    if not s > 0:
        raise ParameterError("log_gamma_domain", f"log_gamma requires s > 0, got {s}")
    return math.lgamma(s)


def pochhammer(a: float, r: int) -> float:
    """Rising factorial (a)_r = a (a+1) ... (a+r-1), with (a)_0 = 1."""
    if r < 0 or r != int(r):
        raise ParameterError("pochhammer_order", f"r must be a nonnegative integer, got {r}")
    out = 1.0
    for i in range(int(r)):
        out *= a + i
    return out


def reg_lower_gamma(s: float, z: float) -> float:
    """Regularized lower incomplete gamma P(s, z) = gamma(s, z) / Gamma(s).

    Monotone nondecreasing in z with values in [0, 1].  Uses the power
    series for z < s + 1 and the Lentz continued fraction for the upper
    function Q(s, z) otherwise.
    """
    if not s > 0:
        raise ParameterError("reg_gamma_shape", f"requires s > 0, got {s}")
    if z < 0:
        raise ParameterError("reg_gamma_argument", f"requires z >= 0, got {z}")
    if z == 0.0:
        return 0.0
    log_front = -z + s * math.log(z) - math.lgamma(s)
    if z < s + 1.0:
        ap = s
        term = 1.0 / s
        total = term
        for _ in range(100_000):
            ap += 1.0
            term *= z / ap
            total += term
            if abs(term) < abs(total) * 1e-17:
                return min(1.0, total * math.exp(log_front))
        raise NonConvergenceError("lower gamma series did not converge")
    # Lentz's method for the continued fraction of Q(s, z).
    tiny = 1e-300
    b = z + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 100_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            q = math.exp(log_front) * h
            return max(0.0, min(1.0, 1.0 - q))
    raise NonConvergenceError("upper gamma continued fraction did not converge")


def _kummer_finite(m: int, b: float, z: float) -> float:
    # e^(-z) 1F1(b + m; b; z) = sum_{j=0}^{m} C(m, j) z^j / (b)_j, by the
    # Kummer transformation; exact finite sum, all terms positive.
    term = 1.0
    total = 1.0
    for j in range(1, m + 1):
        term *= (m - j + 1) * z / (j * (b + j - 1))
        total += term
    return total


def kummer_scaled(a: float, b: float, z: float, policy: AccuracyPolicy | None = None) -> float:
    """Exponentially scaled confluent hypergeometric e^(-z) 1F1(a; b; z).

    Three regimes:

    * a - b a nonnegative integer m: the function is e^z times a degree-m
      polynomial (Kummer transformation, DLMF 13.2.39), evaluated as an
      exact finite sum -- this covers every raw-moment evaluation;
    * small z: Taylor series with the e^(-z) factor folded into the first
      term so no intermediate quantity overflows;
    * large z: the standard asymptotic expansion
      Gamma(b)/Gamma(a) z^(a-b) [1 + (b-a)(1-a)/z + ...] (DLMF 13.7.1),
      truncated at the first non-decreasing term.
    """
    policy = policy or DEFAULT_ACCURACY
    if not b > 0:
        raise ParameterError("kummer_b_domain", f"requires b > 0, got {b}")
    if z < 0:
        raise ParameterError("kummer_z_domain", f"requires z >= 0, got {z}")
    if z == 0.0:
        return 1.0

    diff = a - b
    m = round(diff)
    if m >= 0 and abs(diff - m) < 1e-9:
        return _kummer_finite(int(m), b, z)

    if z <= policy.switchover_z + abs(a) + abs(b) or a <= 0:
        return _kummer_taylor(a, b, z, policy)
    try:
        return _kummer_asymptotic(a, b, z, policy)
    except NonConvergenceError:
        # just above the switchover with large parameters the asymptotic
        # series may not have settled yet; the scaled Taylor series still
        # converges for any z the e^{-z} prefactor can represent
        return _kummer_taylor(a, b, z, policy)


def _kummer_taylor(a: float, b: float, z: float, policy: AccuracyPolicy) -> float:
    scale = math.exp(-z)
    if scale == 0.0:
        raise NonConvergenceError(
            f"cannot scale Taylor series at z = {z}; argument too large for this regime"
        )
    tol = policy.series_rel_tol
    term = scale
    total = scale
    for k in range(policy.max_terms):
        term *= (a + k) * z / ((b + k) * (k + 1.0))
        total += term
        if abs(term) <= tol * abs(total) and k + 1.0 >= z:
            return total
    raise NonConvergenceError(
        f"scaled Kummer series did not converge within {policy.max_terms} terms"
    )


def _kummer_asymptotic(a: float, b: float, z: float, policy: AccuracyPolicy) -> float:
    # terms must decrease, else the expansion is not usable at this (a, b, z)
    tol = policy.series_rel_tol
    term = 1.0
    total = 1.0
    for k in range(policy.max_terms):
        nxt = term * (b - a + k) * (1.0 - a + k) / ((k + 1.0) * z)
        if abs(nxt) <= tol * abs(total):
            total += nxt
            return math.exp(math.lgamma(b) - math.lgamma(a) + (a - b) * math.log(z)) * total
        if abs(nxt) >= abs(term):
            raise NonConvergenceError(
                f"Kummer asymptotic series diverged before reaching tolerance at z = {z}"
            )
        term = nxt
        total += term
    raise NonConvergenceError(
        f"Kummer asymptotic series did not converge within {policy.max_terms} terms"
    )


def _log_reg_upper_gamma(s: float, z: float) -> float:
    """ln Q(s, z) for z > s + 1, usable far below the underflow threshold.

    Internal: the quadrature window search needs tail masses down to
    ~1e-320 in log form, where 1 - P(s, z) would round to zero.
    """
    if z <= s + 1.0:
        p = reg_lower_gamma(s, z)
        if p >= 1.0:
            return -745.0  # tail below double resolution in this regime
        return math.log1p(-p)
    tiny = 1e-300
    b = z + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 100_000):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            return -z + s * math.log(z) - math.lgamma(s) + math.log(h)
    raise NonConvergenceError("upper gamma continued fraction did not converge")


# stirlerr(k) = lgamma(k+1) - [k ln k - k + 0.5 ln(2 pi k)]; series for k >= 16
_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirlerr(k: float) -> float:
    if k < 16:
        return math.lgamma(k + 1.0) - (k + 0.5) * math.log(k) + k - _LN_SQRT_2PI
    kk = k * k
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / kk) / kk) / kk) / kk) / k


def _bd0(x: float, lam: float) -> float:
    # x ln(x/lam) + lam - x, computed without cancellation when x ~ lam
    # (Loader's deviance term).
    if abs(x - lam) < 0.1 * (x + lam):
        v = (x - lam) / (x + lam)
        s = (x - lam) * v
        ej = 2.0 * x * v
        v2 = v * v
        for j in range(1, 1000):
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
    return x * math.log(x / lam) + lam - x


def poisson_weight_log(n: float, x: float, k: int) -> float:
    """ln psi_{n,k}(x) = k ln(nx) - nx - ln k!.

    Returns -inf for x = 0, k >= 1 (and exactly 0 for x = 0, k = 0) so the
    k = 0 term survives at the interpolation point.  Large (k, nx) pairs go
    through the saddle-point form -bd0(k, nx) - stirlerr(k) - 0.5 ln(2 pi k),
    which avoids the cancellation of three large logarithms.
    """
    if not n > 0:
        raise ParameterError("poisson_n", f"requires n > 0, got {n}")
    if x < 0:
        raise ParameterError("poisson_x", f"requires x >= 0, got {x}")
    if k < 0 or k != int(k):
        raise ParameterError("poisson_k", f"k must be a nonnegative integer, got {k}")
    if x == 0.0:
        return 0.0 if k == 0 else _NEG_INF
    lam = n * x
    if k == 0:
        return -lam
    if k <= 15:
        return k * math.log(lam) - lam - math.lgamma(k + 1.0)
    return -_stirlerr(float(k)) - _bd0(float(k), lam) - 0.5 * math.log(2.0 * math.pi * k)


def poisson_tail(n: float, x: float, K: int) -> float:
    """Tail mass sum_{k > K} psi_{n,k}(x), clamped to [0, 1].

    Equal to P(K + 1, nx) by the standard Poisson/gamma duality, which is
    how it is computed -- no cancellation against 1.
    """
    if not n > 0:
        raise ParameterError("poisson_n", f"requires n > 0, got {n}")
    if x < 0:
        raise ParameterError("poisson_x", f"requires x >= 0, got {x}")
    if K < 0 or K != int(K):
        raise ParameterError("poisson_k", f"K must be a nonnegative integer, got {K}")
    return reg_lower_gamma(K + 1.0, n * x)
