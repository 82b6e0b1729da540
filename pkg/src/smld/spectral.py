"""Truncated coefficient matrix P and verification of its two eigenpairs.

The operator maps a Poisson-basis coefficient vector v to P v, where

    P[k, j] = q1^(k+alpha+1) * q2^j * (k+alpha+1)_j / j!,
    q1 = (n-beta)/(2n-beta),  q2 = n/(2n-beta).

Each row is a negative-binomial distribution over j, so rows sum to one
and a finite truncation leaves a computable tail ("row deficit").  Two
eigenpairs are known in closed form: the constant vector with eigenvalue
1 and the geometric vector (1 - beta/n)^j with eigenvalue
(1 - beta/n)^(alpha+1), whose lift through the Poisson basis is e^(-beta x).
Nothing here searches for further spectrum; only these two pairs are
verified, at matrix level and at operator level.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, TruncationError
from .operator import (
    OperatorParams,
    TestFunction,
    TruncationPolicy,
    DEFAULT_TRUNCATION,
    apply_operator,
    validate,
)
from .special import _bd0, _stirlerr, poisson_weight_log

__all__ = [
    "TruncatedP",
    "EigenCheck",
    "IterateDecayReport",
    "build_P",
    "adaptive_K",
    "build_P_adaptive",
    "row_deficit_tail",
    "eigen_vector_check",
    "eigen_operator_check",
    "iterate_decay",
    "lift",
    "lambda2",
]

_WHICH = ("constant", "exponential")


@dataclass(frozen=True)
class TruncatedP:
    """(K+1) x (K+1) leading block of P with per-row truncation deficits."""

    K: int
    entries: np.ndarray
    params: OperatorParams
    row_deficits: np.ndarray


@dataclass(frozen=True)
class EigenCheck:
    which: str
    lam: float
    vector_residual: float | None = None
    operator_residual: float | None = None


@dataclass(frozen=True)
class IterateDecayReport:
    steps: int
    lam: float
    max_deviations: tuple[float, ...]  # per step, vs lam^m e^(-beta x)
    amplitude_ratios: tuple[float, ...]  # sup-amplitude ratio per step


def lambda2(params: OperatorParams) -> float:
    """(1 - beta/n)^(alpha+1), the eigenvalue on e^(-beta x)."""
    validate(params)
    return (1.0 - params.beta / params.n) ** (params.alpha + 1.0)


def _log_nb_pmf(s: float, q1: float, q2: float, j: int) -> float:
    """ln of the row pmf q1^s q2^j (s)_j / j!, stable for large (s, j).

    Written through stirlerr/bd0 (the saddle-point form of a real-order
    binomial weight), so the result is accurate to a few ulps even where
    three large lgamma values would cancel to O(1).
    """
    if j == 0:
        return s * math.log(q1)
    nn = s + j
    return (
        _stirlerr(nn)
        - _stirlerr(s)
        - _stirlerr(float(j))
        - _bd0(s, nn * q1)
        - _bd0(float(j), nn * q2)
        + 0.5 * math.log(nn / (2.0 * math.pi * s * j))
        + math.log(s / nn)
    )


def _nb_row(s: float, q1: float, q2: float, K: int) -> np.ndarray:
    """Columns 0..K of the row pmf, anchored at the mode and filled by the
    two-sided term recurrence (so no entry inherits a large-log error)."""
    mode = int(min(K, max(0, math.floor(s * q2 / q1))))
    anchor = math.exp(_log_nb_pmf(s, q1, q2, mode))
    row = np.empty(K + 1)
    row[mode] = anchor
    if mode < K:
        jj = np.arange(mode, K, dtype=float)
        row[mode + 1 :] = anchor * np.cumprod(q2 * (s + jj) / (jj + 1.0))
    if mode > 0:
        jj = np.arange(mode, 0, -1, dtype=float)
        row[mode - 1 :: -1] = anchor * np.cumprod(jj / (q2 * (s + jj - 1.0)))
    return row


def build_P(params: OperatorParams, K: int) -> TruncatedP:
    """Leading (K+1) x (K+1) block of P with per-row truncation deficits."""
    validate(params)
    if K < 1:
        raise ParameterError("matrix_order", f"requires K >= 1, got {K}")
    n, al, b = params.n, params.alpha, params.beta
    denom = 2.0 * n - b
    q1 = (n - b) / denom
    q2 = n / denom
    entries = np.empty((K + 1, K + 1))
    for k in range(K + 1):
        entries[k] = _nb_row(k + al + 1.0, q1, q2, K)
    # pairwise summation keeps the measurement noise ~1e-15; true deficits
    # are masses, so the measured values are floored at zero
    deficits = np.maximum(1.0 - entries.sum(axis=1), 0.0)
    return TruncatedP(K, entries, params, deficits)


def row_deficit_tail(params: OperatorParams, k: int, K: int, floor: float = 1e-30) -> float:
    """Row-k deficit computed independently: sum the negative-binomial pmf
    beyond column K by its term recurrence until terms fall below ``floor``.
    """
    validate(params)
    n, al, b = params.n, params.alpha, params.beta
    denom = 2.0 * n - b
    q1 = (n - b) / denom
    q2 = n / denom
    s = k + al + 1.0
    j = K + 1
    term = math.exp(_log_nb_pmf(s, q1, q2, j))
    total = 0.0
    while j < K + 1 + 10_000_000:
        total += term
        j += 1
        term *= (s + j - 1.0) / j * q2
        if term < floor * max(total, 1e-300):
            break
    return total


def adaptive_K(
    params: OperatorParams, deficit_tol: float = 1e-12, start: int = 512, cap: int = 40_000
) -> int:
    """Smallest tried K whose worst upper row (k = K//2) has deficit <= tol.

    Deficits grow with the row index, so checking the last row of the
    upper half suffices.  Uses the analytic tail, no matrix build.
    """
    validate(params)
    K = start
    while True:
        if row_deficit_tail(params, K // 2, K) <= deficit_tol:
            return K
        K = int(K * 1.4) + 16
        if K > cap:
            raise TruncationError(f"adaptive K exceeded cap = {cap}")


def build_P_adaptive(
    params: OperatorParams, deficit_tol: float = 1e-12, start: int = 512
) -> TruncatedP:
    return build_P(params, adaptive_K(params, deficit_tol, start))


def _eigen_pair(params: OperatorParams, which: str, K: int):
    if which == "constant":
        return np.ones(K + 1), 1.0
    if which == "exponential":
        if params.beta < 0 or params.beta >= params.n:
            raise ParameterError(
                "exponential_eigen_beta",
                f"exponential eigenpair needs 0 <= beta < n, got beta = {params.beta}",
            )
        z = 1.0 - params.beta / params.n
        return z ** np.arange(K + 1.0), lambda2(params)
    raise ParameterError("eigen_which", f"which must be one of {_WHICH}, got {which!r}")


def eigen_vector_check(p_mat: TruncatedP, which: str) -> EigenCheck:
    """Max row residual |(P v)_k - lam v_k| over the upper rows k <= K/2.

    Only upper rows are measured: truncation error concentrates in the
    high rows, while the identity is exact for the infinite matrix.
    """
    v, lam = _eigen_pair(p_mat.params, which, p_mat.K)
    pv = p_mat.entries @ v
    upper = slice(0, p_mat.K // 2 + 1)
    residual = float(np.max(np.abs(pv[upper] - lam * v[upper])))
    return EigenCheck(which, lam, vector_residual=residual)


def eigen_operator_check(
    params: OperatorParams,
    which: str,
    x_grid,
    policy: TruncationPolicy | None = None,
) -> EigenCheck:
    """Max |M[phi](x) - lam phi(x)| over the grid, phi = 1 or e^(-beta x)."""
    validate(params)
    if which == "constant":
        phi = TestFunction.monomial(0)
        lam = 1.0
        phi_vals = lambda x: 1.0
    elif which == "exponential":
        if params.beta < 0 or params.beta >= params.n:
            raise ParameterError(
                "exponential_eigen_beta",
                f"exponential eigenpair needs 0 <= beta < n, got beta = {params.beta}",
            )
        phi = TestFunction.exp_scaled(-params.beta)
        lam = lambda2(params)
        phi_vals = lambda x: math.exp(-params.beta * x)
    else:
        raise ParameterError("eigen_which", f"which must be one of {_WHICH}, got {which!r}")
    residual = 0.0
    for x in np.atleast_1d(np.asarray(x_grid, dtype=float)):
        residual = max(
            residual, abs(apply_operator(phi, float(x), params, policy) - lam * phi_vals(x))
        )
    return EigenCheck(which, lam, operator_residual=residual)


def lift(v, x: float, n: float, policy: TruncationPolicy | None = None) -> float:
    """Poisson-basis lift Phi_v(x) = sum_j v_j psi_{n,j}(x) of a finite vector."""
    policy = policy or DEFAULT_TRUNCATION
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ParameterError("unbounded_coefficients", "coefficient vector must be finite")
    if not n > 0:
        raise ParameterError("poisson_n", f"requires n > 0, got {n}")
    if x < 0:
        raise ParameterError("x_negative", f"requires x >= 0, got {x}")
    if x == 0.0:
        return float(v[0])
    terms = [float(v[j]) * math.exp(poisson_weight_log(n, x, j)) for j in range(len(v))]
    return math.fsum(terms)


def iterate_decay(
    params: OperatorParams,
    r: int,
    x_grid,
    K: int | None = None,
    policy: TruncationPolicy | None = None,
    deficit_tol: float = 1e-12,
) -> IterateDecayReport:
    """Push the geometric eigenvector through P r times and lift each iterate.

    The m-th lift must track lam^m e^(-beta x); successive sup-amplitudes
    over the grid must contract by exactly lam.
    """
    validate(params)
    if not 0 < params.beta < params.n:
        raise ParameterError(
            "iterate_beta_range", f"requires 0 < beta < n, got beta = {params.beta}"
        )
    if r < 0:
        raise ParameterError("iterate_steps", f"requires r >= 0, got {r}")
    xs = np.atleast_1d(np.asarray(x_grid, dtype=float))
    p_mat = build_P(params, K) if K is not None else build_P_adaptive(params, deficit_tol)
    upper_deficit = float(np.max(p_mat.row_deficits[: p_mat.K // 2 + 1]))
    if upper_deficit > 1e-8:
        warnings.warn(
            f"iterate_decay: truncation-dominated regime, upper-row deficit {upper_deficit:.2e}",
            stacklevel=2,
        )
    lam = lambda2(params)
    z = 1.0 - params.beta / params.n
    v = z ** np.arange(p_mat.K + 1.0)
    deviations = []
    amplitudes = []
    for m in range(r + 1):
        lifted = np.array([lift(v, float(x), params.n, policy) for x in xs])
        target = lam**m * np.exp(-params.beta * xs)
        deviations.append(float(np.max(np.abs(lifted - target))))
        amplitudes.append(float(np.max(np.abs(lifted))))
        if m < r:
            v = p_mat.entries @ v
    ratios = tuple(
        amplitudes[m + 1] / amplitudes[m] for m in range(r) if amplitudes[m] != 0.0
    )
    return IterateDecayReport(r, lam, tuple(deviations), ratios)
