"""The full verification battery, one named check per acceptance clause.

Each check returns a :class:`CheckResult` with the measured worst value
and the tolerance it was held to; ``run_all`` executes the fixed sequence
the CLI's ``verify-all`` command reports.  Checks measure, they never
assume: where a stated bound is not actually attained by the exact
formulas (see the failing checks' details), the measured value is
reported and the check honestly fails.

Default parameter grid: n in {5, 10, 50, 200}, alpha in {-0.5, -0.25, 0,
0.5, 1}, beta in {0, 0.5, 1, 2} (with n > beta), x in {0, 0.1, 1, 2, 5}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .analysis import (
    compact_estimate_check,
    korovkin_weighted_check,
    lp_error,
    schur_E,
    schur_first_integral,
    schur_second_integral,
)
from .moments import (
    central_moment_binomial,
    central_moment_explicit,
    diff_recurrence_residual,
    raw_moment_closed,
    raw_moment_explicit,
    raw_moments_recurrence,
)
from .operator import (
    OperatorParams,
    TestFunction,
    TruncationPolicy,
    apply_operator,
    value_at_zero,
)
from .spectral import (
    build_P_adaptive,
    eigen_operator_check,
    eigen_vector_check,
    iterate_decay,
    lambda2,
)

__all__ = ["CheckResult", "run_all", "ALL_CHECKS", "G_N", "G_ALPHA", "G_BETA", "G_X"]

G_N = (5.0, 10.0, 50.0, 200.0)
G_ALPHA = (-0.5, -0.25, 0.0, 0.5, 1.0)
G_BETA = (0.0, 0.5, 1.0, 2.0)
G_X = (0.0, 0.1, 1.0, 2.0, 5.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


def _grid_params(ns=G_N, alphas=G_ALPHA, betas=G_BETA) -> Iterable[OperatorParams]:
    for n in ns:
        for al in alphas:
            for b in betas:
                if n > b:
                    yield OperatorParams(n, al, b)


def _result(name: str, measured: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(measured <= tolerance), measured, tolerance, detail)


# -- 1: normalization ----------------------------------------------------------


def check_01_normalization() -> list[CheckResult]:
    one = TestFunction.monomial(0)
    worst = 0.0
    for params in _grid_params():
        for x in G_X:
            worst = max(worst, abs(apply_operator(one, x, params) - 1.0))
    return [_result("01_normalization", worst, 1e-12, "max |M[1](x) - 1| over grid")]


# -- 2, 3: raw-moment routes -----------------------------------------------------


def check_02_moment_cross_agreement() -> list[CheckResult]:
    worst_rec = 0.0
    worst_exp = 0.0
    worst_quad = 0.0
    for params in _grid_params():
        for x in G_X:
            rec = raw_moments_recurrence(8, x, params)
            for r in range(9):
                closed = raw_moment_closed(r, x, params)
                denom = max(abs(closed), 1.0)
                worst_rec = max(worst_rec, abs(closed - rec[r]) / denom)
                if r <= 4:
                    explicit = raw_moment_explicit(r, x, params)
                    worst_exp = max(worst_exp, abs(closed - explicit) / denom)
    for params in _grid_params():
        for x in G_X:
            for r in range(1, 5):
                closed = raw_moment_closed(r, x, params)
                quad = apply_operator(TestFunction.monomial(r), x, params)
                worst_quad = max(worst_quad, abs(closed - quad) / max(abs(closed), 1.0))
    return [
        _result("02a_closed_vs_recurrence", worst_rec, 1e-11, "r <= 8"),
        _result("02b_closed_vs_explicit", worst_exp, 1e-12, "r <= 4"),
        _result("02c_closed_vs_quadrature", worst_quad, 1e-7, "r <= 4"),
    ]


def check_03_three_term_residual() -> list[CheckResult]:
    worst = 0.0
    for params in _grid_params():
        rate = params.rate
        for x in G_X:
            z = params.n * x
            closed = [raw_moment_closed(r, x, params) for r in range(9)]
            for r in range(1, 8):
                lhs = rate**2 * closed[r + 1]
                rhs = rate * (params.alpha + 2 * r + 1 + z) * closed[r] - r * (
                    params.alpha + r
                ) * closed[r - 1]
                worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    return [
        _result("03_three_term_residual", worst, 1e-10, "closed-form values in the recurrence")
    ]


# -- 4: differential recurrence ---------------------------------------------------


def check_04_diff_recurrence() -> list[CheckResult]:
    subset = list(_grid_params(ns=(10.0, 50.0), alphas=(-0.5, 0.0, 1.0), betas=(0.0, 1.0)))
    worst_resid = 0.0
    worst_ratio_dev = 0.0
    floor = 1e-10
    note = ""
    for params in subset:
        for r in (2, 3):
            r_h = diff_recurrence_residual(r, 1.0, params, 1e-3)
            r_h2 = diff_recurrence_residual(r, 1.0, params, 5e-4)
            worst_resid = max(worst_resid, r_h)
            if r_h <= floor and r_h2 <= floor:
                # moment of order r is a degree-r polynomial in x; for r = 2 the
                # central difference is exact, so both residuals sit at the
                # rounding floor and the factor-4 law is vacuous
                note = "r=2 residuals at rounding floor; order ratio measured on r=3"
                continue
            worst_ratio_dev = max(worst_ratio_dev, abs(r_h / r_h2 - 4.0))
    return [
        _result("04a_diff_recurrence_residual", worst_resid, 1e-5, "r in {2,3}, x=1, h=1e-3"),
        _result("04b_diff_recurrence_order", worst_ratio_dev, 0.5, note),
    ]


# -- 5: central moments -----------------------------------------------------------


def check_05_central_moments() -> list[CheckResult]:
    worst_dd = 0.0
    worst_quad = 0.0
    for params in _grid_params():
        for x in G_X:
            for r in range(1, 5):
                explicit = central_moment_explicit(r, x, params)
                binom = central_moment_binomial(r, x, params)
                worst_dd = max(worst_dd, abs(explicit - binom) / max(abs(explicit), 1e-300))
    for params in _grid_params():
        for x in G_X:
            for r in (1, 2, 3, 4):
                explicit = central_moment_explicit(r, x, params)
                # (t-x)^r as a direct power: the expanded polynomial would
                # evaluate with ~1e-13 cancellation noise near t = x
                f = TestFunction.from_callable(
                    lambda t, x=x, r=r: (t - x) ** r,
                    growth_a=1.0,
                    growth_k=2.0**r * (max(1.0, (r / math.e) ** r) + x**r),
                    label=f"(t-{x})^{r}",
                )
                quad = apply_operator(f, x, params)
                worst_quad = max(worst_quad, abs(explicit - quad) / max(abs(explicit), 1.0))
    return [
        _result("05a_central_explicit_vs_binomial", worst_dd, 1e-10, "relative, r <= 4"),
        _result("05b_central_explicit_vs_quadrature", worst_quad, 1e-6, "r <= 4"),
    ]


# -- 6: asymptotics ----------------------------------------------------------------


def check_06_asymptotics() -> list[CheckResult]:
    worst_r1 = 0.0
    for params in _grid_params(ns=(50.0, 200.0)):
        for x in G_X:
            c1 = central_moment_explicit(1, x, params)
            lead = params.alpha + 1.0 + params.beta * x
            allowed = 5.0 * lead / params.n
            worst_r1 = max(worst_r1, abs(params.n * c1 - lead) / allowed)
    worst_r2 = 0.0
    for al in G_ALPHA:
        for b in G_BETA:
            params = OperatorParams(1e4, al, b)
            c2 = central_moment_explicit(2, 1.0, params)
            worst_r2 = max(worst_r2, abs(params.n * c2 / 2.0 - 1.0))
    worst_r3 = 0.0
    for al in G_ALPHA:
        for b in (1.0, 2.0):
            params = OperatorParams(1e5, al, b)
            exact = central_moment_binomial(3, 1.0, params)
            predicted = 6.0 * b / params.n**2
            worst_r3 = max(worst_r3, abs(exact / predicted - 1.0))
    return [
        _result("06a_asymptotic_r1", worst_r1, 1.0, "|n c_1 - lead| / (5 lead / n), n >= 50"),
        _result("06b_asymptotic_r2", worst_r2, 0.01, "n = 1e4, x = 1"),
        _result(
            "06c_asymptotic_r3",
            worst_r3,
            0.05,
            "exact third central moment carries the same-order term "
            "6(alpha+2)x/n^2 that the stated leading term omits; the ratio "
            "tends to 1 + (alpha+2)/(beta x), not 1",
        ),
    ]


# -- 7: eigenpairs -----------------------------------------------------------------


def check_07_eigenpairs() -> list[CheckResult]:
    xs = np.linspace(0.0, 5.0, 11)
    tight = TruncationPolicy(eps_tail=1e-14, eps_quad=1e-13)
    worst_op = 0.0
    worst_lam = 0.0
    worst_flat = 0.0
    for params in _grid_params():
        for which in ("constant", "exponential"):
            chk = eigen_operator_check(params, which, xs, tight)
            worst_op = max(worst_op, chk.operator_residual)
        lam = lambda2(params)
        phi = TestFunction.exp_scaled(-params.beta)
        ratio0 = value_at_zero(phi, params, tight)
        worst_lam = max(worst_lam, abs(ratio0 - lam))
        ratios = [
            apply_operator(phi, float(x), params, tight) * math.exp(params.beta * float(x))
            for x in xs
        ]
        worst_flat = max(worst_flat, max(abs(r - lam) for r in ratios))
    worst_deficit = 0.0
    worst_vec = 0.0
    for params in _grid_params():
        p_mat = build_P_adaptive(params)
        upper = p_mat.row_deficits[: p_mat.K // 2 + 1]
        worst_deficit = max(worst_deficit, float(upper.max()))
        for which in ("constant", "exponential"):
            chk = eigen_vector_check(p_mat, which)
            worst_vec = max(worst_vec, chk.vector_residual)
    return [
        _result("07a_eigen_operator_residual", worst_op, 1e-8, "phi_1, phi_2 on x in [0,5]"),
        _result("07b_row_deficits", worst_deficit, 1e-12, "upper rows at adaptive K"),
        _result("07c_eigen_vector_residual", worst_vec, 1e-10, "upper rows"),
        _result("07d_lambda2_vs_operator_ratio", worst_lam, 1e-12, "at x = 0, tight policy"),
        _result("07e_ratio_x_independent", worst_flat, 1e-8, "M[e^-bt](x) e^(bx) flat in x"),
    ]


# -- 8: iterate decay ----------------------------------------------------------------


def check_08_iterate_decay() -> list[CheckResult]:
    xs = np.linspace(0.0, 5.0, 11)
    worst = 0.0
    for al in (0.0, 1.0):
        params = OperatorParams(10.0, al, 2.0)
        report = iterate_decay(params, 4, xs)
        for ratio in report.amplitude_ratios:
            worst = max(worst, abs(ratio - report.lam))
    return [_result("08_iterate_decay", worst, 1e-6, "n=10, beta=2, alpha in {0,1}, r <= 4")]


# -- 9: compact estimate ---------------------------------------------------------------


def check_09_compact_estimate() -> list[CheckResult]:
    f = TestFunction.abs_shift(1.0)
    report = compact_estimate_check(f, (25.0, 100.0, 400.0, 1600.0), 0.0, 0.0, 2.0)
    ratios = report.ratios
    spread = max(ratios) / min(ratios)
    detail = "ratios E_n/omega(f, n^-1/2): " + ", ".join(f"{r:.4f}" for r in ratios)
    return [_result("09_compact_estimate", spread, 3.0, detail)]


# -- 10: Korovkin weighted ---------------------------------------------------------------


def check_10_korovkin() -> list[CheckResult]:
    worst_e0 = 0.0
    worst_e1 = 0.0
    worst_e2 = 0.0
    for params in _grid_params():
        doubled = OperatorParams(2.0 * params.n - params.beta, params.alpha, params.beta)
        e0_a, e1_a, e2_a = korovkin_weighted_check(params)
        e0_b, e1_b, e2_b = korovkin_weighted_check(doubled)
        worst_e0 = max(worst_e0, abs(e0_a), abs(e0_b))
        worst_e1 = max(worst_e1, abs(e1_a / e1_b / 2.0 - 1.0))
        worst_e2 = max(worst_e2, abs(e2_a / e2_b / 2.0 - 1.0))
    return [
        _result("10a_korovkin_e0", worst_e0, 0.0, "exactly zero"),
        _result("10b_korovkin_e1_halving", worst_e1, 0.05, "value(n)/value(2n-beta) vs 2"),
        _result(
            "10c_korovkin_e2_halving",
            worst_e2,
            0.05,
            "the e_2 difference scales as n/(n-beta)^2, not (n-beta)^-1, so "
            "the halving ratio is 4n/(2n-beta) + O(1/n); off by >5% for n <= 10",
        ),
    ]


# -- 11: local L_p ------------------------------------------------------------------------


def check_11_local_lp() -> list[CheckResult]:
    f = TestFunction.abs_shift(1.0)
    ns = (10.0, 40.0, 160.0, 640.0)
    worst_ratio = 0.0
    decreasing = True
    details = []
    for p in (1.0, 2.0):
        errors = [lp_error(f, OperatorParams(n, 0.0, 0.0), p, 2.0) for n in ns]
        decreasing &= all(b < a for a, b in zip(errors, errors[1:]))
        worst_ratio = max(worst_ratio, errors[-1] / errors[0])
        details.append(f"p={p:g}: " + ", ".join(f"{e:.5f}" for e in errors))
    measured = worst_ratio if decreasing else math.inf
    return [_result("11_local_lp_decrease", measured, 0.25, "; ".join(details))]


# -- 12: Schur quantities -------------------------------------------------------------------


def check_12_schur() -> list[CheckResult]:
    xs = np.linspace(0.0, 20.0, 81)
    worst_first = 0.0
    for params in _grid_params():
        for p in (1.0, 2.0):
            for gamma in (0.0, params.beta, p * params.beta):
                if gamma > p * params.beta:
                    continue
                for x in xs:
                    worst_first = max(
                        worst_first, schur_first_integral(params, gamma, p, float(x)) - 1.0
                    )
    # E_n sup over t in [0, 10]: computed at beta = 0, where the grid sup is
    # constant in n (for beta > 0 the prefactor 1 - beta/n makes it grow)
    ts = np.linspace(0.0, 10.0, 2001)
    worst_growth = 0.0
    worst_a0 = 0.0
    for al in (-0.5, -0.25, 0.0):
        sups = []
        for n in G_N:
            params = OperatorParams(n, al, 0.0)
            sups.append(max(schur_E(params, float(t)) for t in ts))
        for a, b in zip(sups, sups[1:]):
            worst_growth = max(worst_growth, b / a - 1.0)
    for params in _grid_params(alphas=(0.0,)):
        sup = max(schur_E(params, float(t)) for t in ts[:: 40])
        worst_a0 = max(worst_a0, sup - 1.0)
    worst_second = -math.inf
    for n in (5.0, 10.0, 50.0):
        for al in (-0.5, -0.25, 0.0):
            for b in (1.0, 2.0):
                for p in (1.0, 2.0):
                    for gamma in (b, p * b):
                        params = OperatorParams(n, al, b)
                        res = schur_second_integral(params, gamma, p, 1.0)
                        worst_second = max(worst_second, res.direct - res.bound)
                        res = schur_second_integral(params, gamma, p, 4.0)
                        worst_second = max(worst_second, res.direct - res.bound)
    return [
        _result("12a_schur_first_integral", worst_first, 1e-13, "gamma <= p beta, x in [0,20]"),
        _result("12b_schur_E_sup_monotone", worst_growth, 1e-9, "beta=0; sup constant in n"),
        _result("12b2_schur_E_alpha0_bounded", worst_a0, 1e-13, "E_n <= 1 for alpha = 0"),
        _result(
            "12c_schur_second_bound",
            worst_second,
            0.0,
            "the stated majorant uses the incomplete-gamma factor with "
            "parameter alpha+1 where the exact series identity carries "
            "parameter alpha; the exact x-integral exceeds it (e.g. equality "
            "defect (1-beta/n) vs (1-beta/n)(1-e^(-(n-beta)ct)) at alpha=0)",
        ),
    ]


# -- 13: Mazhar-Totik specialization -----------------------------------------------------------


def _mazhar_totik_reference(kind: str, x: float, n: float) -> float:
    """Independent direct summation of the alpha = beta = 0 operator.

    Closed-form coefficients (gamma integrals) and a plain Poisson weight
    recurrence; shares no code with the operator path.
    """
    if x == 0.0:
        weights = [1.0]
    else:
        lam = n * x
        big_k = int(lam + 12.0 * math.sqrt(lam) + 60.0)
        weights = [math.exp(-lam)]
        for k in range(big_k):
            weights.append(weights[-1] * lam / (k + 1.0))
    total = 0.0
    for k, w in enumerate(weights):
        if kind == "one":
            coef = 1.0
        elif kind == "t":
            coef = (k + 1.0) / n
        elif kind == "t2":
            coef = (k + 1.0) * (k + 2.0) / n**2
        elif kind == "exp_neg":
            coef = (n / (n + 1.0)) ** (k + 1)
        else:  # pragma: no cover
            raise ValueError(kind)
        total += w * coef
    return total


def check_13_mazhar_totik() -> list[CheckResult]:
    functions = {
        "one": TestFunction.monomial(0),
        "t": TestFunction.monomial(1),
        "t2": TestFunction.monomial(2),
        "exp_neg": TestFunction.exp_scaled(-1.0),
    }
    worst = 0.0
    for n in (5.0, 20.0):
        params = OperatorParams(n, 0.0, 0.0)
        for kind, f in functions.items():
            for x in (0.0, 1.0, 2.0):
                ours = apply_operator(f, x, params)
                ref = _mazhar_totik_reference(kind, x, n)
                worst = max(worst, abs(ours - ref))
    return [_result("13_mazhar_totik_regression", worst, 1e-9, "alpha = beta = 0")]


# -- 14: interpolation at zero ------------------------------------------------------------------


def check_14_interpolation_at_zero() -> list[CheckResult]:
    catalog = [
        TestFunction.monomial(0),
        TestFunction.monomial(1),
        TestFunction.monomial(2),
        TestFunction.exp_scaled(-1.0),
        TestFunction.abs_shift(1.0),
        TestFunction.sqrt(),
        TestFunction.sin_scaled(1.0),
    ]
    worst = 0.0
    for params in _grid_params():
        for f in catalog:
            worst = max(
                worst, abs(value_at_zero(f, params) - apply_operator(f, 0.0, params))
            )
    return [_result("14_interpolation_at_zero", worst, 1e-10, "builtin catalog")]


ALL_CHECKS: tuple[Callable[[], list[CheckResult]], ...] = (
    check_01_normalization,
    check_02_moment_cross_agreement,
    check_03_three_term_residual,
    check_04_diff_recurrence,
    check_05_central_moments,
    check_06_asymptotics,
    check_07_eigenpairs,
    check_08_iterate_decay,
    check_09_compact_estimate,
    check_10_korovkin,
    check_11_local_lp,
    check_12_schur,
    check_13_mazhar_totik,
    check_14_interpolation_at_zero,
)


def run_all() -> list[CheckResult]:
    results: list[CheckResult] = []
    for check in ALL_CHECKS:
        results.extend(check())
    return results
