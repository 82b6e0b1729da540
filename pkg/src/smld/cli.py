"""Command-line front end: parse flags, dispatch, emit CSV/JSON tables.

Commands: moments, central-moments, asymptotics, apply, converge, eigen,
schur, verify-all.  Output is deterministic: identical invocations produce
byte-identical files.  Exit codes: 0 success, 1 verification failure,
2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import analysis, moments, spectral, verification
from .errors import SmldError
from .operator import (
    OperatorParams,
    TestFunction,
    TruncationPolicy,
    apply_operator,
    apply_szasz,
    load_sampled,
)
from .special import AccuracyPolicy

__all__ = ["RunConfig", "Table", "parse_config", "run", "emit", "main"]

_COMMANDS = (
    "moments",
    "central-moments",
    "asymptotics",
    "apply",
    "converge",
    "eigen",
    "schur",
    "verify-all",
)


@dataclass
class RunConfig:
    command: str
    params: OperatorParams | None = None
    alpha: float = 0.0
    beta: float = 0.0
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    accuracy: AccuracyPolicy = field(default_factory=AccuracyPolicy)
    fmt: str = "csv"
    output: str | None = None
    x: float = 1.0
    max_r: int = 4
    r: int = 2
    f: TestFunction | None = None
    n_grid: tuple[float, ...] = ()
    x_grid: tuple[float, ...] = ()
    t_grid: tuple[float, ...] = ()
    norm: analysis.NormSpec | None = None
    p: float = 1.0
    gamma: float = 0.0
    operator: str = "mn"
    k_trunc: int | None = None


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]


def _parse_function(spec: str) -> TestFunction:
    kind, _, arg = spec.partition(":")
    if kind == "monomial":
        return TestFunction.monomial(int(arg))
    if kind == "poly":
        return TestFunction.polynomial([float(c) for c in arg.split(",")])
    if kind == "exp":
        return TestFunction.exp_scaled(float(arg))
    if kind == "abs":
        return TestFunction.abs_shift(float(arg))
    if kind == "sqrt":
        if arg:
            raise ValueError("sqrt takes no argument")
        return TestFunction.sqrt()
    if kind == "sin":
        return TestFunction.sin_scaled(float(arg))
    if kind == "file":
        return load_sampled(arg)
    raise ValueError(
        f"unknown function spec {spec!r}; expected monomial:r, poly:c0,c1,..., "
        "exp:c, abs:c, sqrt, sin:c, or file:<path>"
    )


def _parse_norm(spec: str) -> analysis.NormSpec:
    kind, _, arg = spec.partition(":")
    parts = [float(v) for v in arg.split(",")] if arg else []
    if kind == "sup" and len(parts) == 1:
        return analysis.NormSpec.sup_compact(parts[0])
    if kind == "phi" and len(parts) == 1:
        return analysis.NormSpec.weighted_phi(parts[0])
    if kind == "lp" and len(parts) == 2:
        return analysis.NormSpec.lp(parts[0], parts[1])
    if kind == "wlp" and len(parts) == 3:
        return analysis.NormSpec.weighted_lp(parts[0], parts[1], parts[2])
    raise ValueError(
        f"unknown norm spec {spec!r}; expected sup:a, phi:Xmax, lp:p,R or wlp:p,gamma,Rmax"
    )


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smld",
        description="Szasz-Mirakyan-Laguerre-Durrmeyer operators: "
        "moments, spectra, and convergence verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="output format (default csv)")
    common.add_argument("--output", default=None, help="output path (default stdout)")
    common.add_argument("--eps-tail", type=float, default=1e-13,
                        help="k-sum tail tolerance (default 1e-13)")
    common.add_argument("--quad-nodes", type=int, default=96,
                        help="quadrature node budget (default 96)")
    common.add_argument("--eps-quad", type=float, default=1e-12,
                        help="target relative quadrature error (default 1e-12)")
    common.add_argument("--k-max", type=int, default=50_000,
                        help="hard cap on the k-sum (default 50000)")
    common.add_argument("--series-rel-tol", type=float, default=1e-14,
                        help="series truncation tolerance (default 1e-14)")
    common.add_argument("--max-terms", type=int, default=512,
                        help="series length cap (default 512)")
    common.add_argument("--switchover-z", type=float, default=40.0,
                        help="series/asymptotic switch base (default 40)")

    prm = argparse.ArgumentParser(add_help=False)
    prm.add_argument("--n", type=float, required=True, help="operator index n > beta")
    prm.add_argument("--alpha", type=float, default=0.0, help="Laguerre exponent > -1")
    prm.add_argument("--beta", type=float, default=0.0, help="exponential tilt < n")

    p = sub.add_parser("moments", parents=[common, prm], help="raw moments by every route")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--max-r", type=int, default=4)

    p = sub.add_parser("central-moments", parents=[common, prm], help="central moments")
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--max-r", type=int, default=4)

    p = sub.add_parser("asymptotics", parents=[common], help="central-moment ratio table")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--n-grid", type=_float_list, required=True,
                   help="comma-separated ascending n values")

    p = sub.add_parser("apply", parents=[common, prm], help="apply the operator to f")
    p.add_argument("--f", required=True, help="function spec (monomial:r, poly:..., exp:c, "
                   "abs:c, sqrt, sin:c, file:<path>)")
    p.add_argument("--x-grid", type=_float_list, default=(0.0, 1.0, 2.0))
    p.add_argument("--operator", choices=("mn", "szasz"), default="mn")

    p = sub.add_parser("converge", parents=[common], help="error sweep in a chosen norm")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--f", required=True)
    p.add_argument("--norm", required=True, help="sup:a, phi:Xmax, lp:p,R or wlp:p,gamma,Rmax")
    p.add_argument("--n-grid", type=_float_list, required=True)

    p = sub.add_parser("eigen", parents=[common, prm], help="verify both eigenpairs")
    p.add_argument("--x-grid", type=_float_list, default=(0.0, 1.0, 2.0, 5.0))
    p.add_argument("--k", type=int, default=None, help="matrix truncation (default adaptive)")

    p = sub.add_parser("schur", parents=[common, prm], help="Schur-test quantities")
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--x-grid", type=_float_list, default=(0.0, 1.0, 5.0, 20.0))
    p.add_argument("--t-grid", type=_float_list, default=(0.5, 1.0, 2.0, 5.0))

    sub.add_parser("verify-all", parents=[common], help="run the whole verification battery")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    """Parse and validate argv into a RunConfig; exits with code 2 on usage errors."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    cfg = RunConfig(command=ns.command)
    cfg.fmt = ns.format
    cfg.output = ns.output
    try:
        cfg.policy = TruncationPolicy(
            eps_tail=ns.eps_tail, quad_nodes=ns.quad_nodes, eps_quad=ns.eps_quad, k_max=ns.k_max
        )
        cfg.accuracy = AccuracyPolicy(
            series_rel_tol=ns.series_rel_tol, max_terms=ns.max_terms, switchover_z=ns.switchover_z
        )
    except SmldError as exc:
        parser.error(str(exc))
    if hasattr(ns, "alpha"):
        if not ns.alpha > -1.0:
            parser.error("--alpha: requires alpha > -1")
        cfg.alpha, cfg.beta = ns.alpha, ns.beta
        n_val = getattr(ns, "n", None)
        if n_val is not None:
            if not n_val > ns.beta:
                parser.error("--beta: requires n > beta")
            cfg.params = OperatorParams(n_val, ns.alpha, ns.beta)
    try:
        if hasattr(ns, "f"):
            cfg.f = _parse_function(ns.f)
        if hasattr(ns, "norm"):
            cfg.norm = _parse_norm(ns.norm)
    except (ValueError, SmldError) as exc:
        parser.error(str(exc))
    for name in ("x", "max_r", "r", "p", "gamma", "operator"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    for name, attr in (("n_grid", "n_grid"), ("x_grid", "x_grid"), ("t_grid", "t_grid")):
        if hasattr(ns, name):
            setattr(cfg, attr, tuple(getattr(ns, name)))
    if hasattr(ns, "k"):
        cfg.k_trunc = ns.k
    if cfg.command in ("asymptotics", "converge"):
        if any(b <= a for a, b in zip(cfg.n_grid, cfg.n_grid[1:])):
            parser.error("--n-grid: values must be strictly ascending")
        if any(n <= ns.beta for n in cfg.n_grid):
            parser.error("--n-grid: requires n > beta for every n")
    return cfg


# -- dispatch -------------------------------------------------------------------


def _run_moments(cfg: RunConfig) -> Table:
    rows = []
    for r in range(cfg.max_r + 1):
        rep = moments.moment_report(r, cfg.x, cfg.params, cfg.policy, cfg.accuracy)
        rows.append(
            (r, cfg.x, rep.value_closed, rep.value_recurrence, rep.value_explicit,
             rep.value_quadrature, rep.max_cross_residual)
        )
    return Table(["r", "x", "closed", "recurrence", "explicit", "quadrature", "max_residual"],
                 rows)


def _run_central_moments(cfg: RunConfig) -> Table:
    rows = []
    for r in range(cfg.max_r + 1):
        explicit = moments.central_moment_explicit(r, cfg.x, cfg.params) if r <= 4 else None
        binom = moments.central_moment_binomial(r, cfg.x, cfg.params)
        f = TestFunction.from_callable(
            lambda t, x=cfg.x, r=r: (t - x) ** r,
            growth_a=1.0,
            growth_k=2.0**r * (max(1.0, (r / math.e) ** r) + cfg.x**r),
            label=f"(t-{cfg.x})^{r}",
        )
        quad = apply_operator(f, cfg.x, cfg.params, cfg.policy)
        present = [v for v in (explicit, binom, quad) if v is not None]
        resid = max(
            abs(a - b) / max(abs(a), abs(b), 1.0) for a in present for b in present
        )
        rows.append((r, cfg.x, explicit, binom, quad, resid))
    return Table(["r", "x", "explicit", "binomial", "quadrature", "max_residual"], rows)


def _run_asymptotics(cfg: RunConfig) -> Table:
    table = moments.asymptotic_ratio_table(cfg.r, cfg.x, cfg.alpha, cfg.beta, cfg.n_grid)
    rows = [
        (row.n, row.exact, row.predicted, row.two_term, row.ratio, row.flagged)
        for row in table
    ]
    return Table(["n", "exact", "predicted", "two_term", "ratio", "flagged"], rows)


def _run_apply(cfg: RunConfig) -> Table:
    rows = []
    for x in cfg.x_grid:
        if cfg.operator == "szasz":
            val = apply_szasz(cfg.f, x, cfg.params.n, cfg.policy)
        else:
            val = apply_operator(cfg.f, x, cfg.params, cfg.policy)
        rows.append((x, val, float(cfg.f(x))))
    return Table(["x", "operator_value", "f_value"], rows)


def _run_converge(cfg: RunConfig) -> Table:
    norm = cfg.norm
    al, b = cfg.alpha, cfg.beta
    if norm.kind == "sup_compact":
        report = analysis.compact_estimate_check(
            cfg.f, cfg.n_grid, al, b, norm.a, cfg.policy, norm.grid_points
        )
        rows = [
            (n, err, ratio, report.fitted_slope)
            for (n, err), ratio in zip(report.rows, report.ratios)
        ]
        return Table(["n", "error", "omega_ratio", "fitted_slope"], rows)
    errors = []
    for n in cfg.n_grid:
        params = OperatorParams(n, al, b)
        if norm.kind == "lp":
            errors.append(analysis.lp_error(cfg.f, params, norm.p, norm.r_cut, cfg.policy))
        elif norm.kind == "weighted_lp":
            val, _ok = analysis.weighted_lp_error(
                cfg.f, params, norm.p, norm.gamma, norm.r_max, cfg.policy
            )
            errors.append(val)
        else:  # weighted_phi
            def diff(xs, params=params):
                from .operator import apply_operator_grid

                return apply_operator_grid(cfg.f, xs, params, cfg.policy) - np.asarray(
                    cfg.f(xs), dtype=float
                )

            errors.append(analysis.weighted_phi_norm(diff, norm.x_max, norm.grid_points))
    slope = None
    if len([e for e in errors if e > 0]) >= 3:
        slope = analysis.rate_slope(list(zip(cfg.n_grid, errors)))
    rows = [(n, e, slope) for n, e in zip(cfg.n_grid, errors)]
    return Table(["n", "error", "fitted_slope"], rows)


def _run_eigen(cfg: RunConfig) -> Table:
    params = cfg.params
    if cfg.k_trunc is not None:
        p_mat = spectral.build_P(params, cfg.k_trunc)
    else:
        p_mat = spectral.build_P_adaptive(params)
    upper_deficit = float(p_mat.row_deficits[: p_mat.K // 2 + 1].max())
    rows = []
    for which in ("constant", "exponential"):
        vec = spectral.eigen_vector_check(p_mat, which)
        op = spectral.eigen_operator_check(params, which, cfg.x_grid, cfg.policy)
        rows.append(
            (which, vec.lam, vec.vector_residual, op.operator_residual, p_mat.K, upper_deficit)
        )
    return Table(
        ["which", "lambda", "vector_residual", "operator_residual", "K", "max_upper_deficit"],
        rows,
    )


def _run_schur(cfg: RunConfig) -> Table:
    params = cfg.params
    rows = []
    hyp = cfg.gamma <= cfg.p * params.beta + 1e-15
    for x in cfg.x_grid:
        val = analysis.schur_first_integral(params, cfg.gamma, cfg.p, x)
        rows.append(("first_integral", x, val, hyp))
    lemma_ok = analysis.schur_lemma_applicable(params)
    for t in cfg.t_grid:
        rows.append(("E", t, analysis.schur_E(params, t), lemma_ok))
    for t in cfg.t_grid:
        res = analysis.schur_second_integral(params, cfg.gamma, cfg.p, t, cfg.policy)
        rows.append(("second_direct", t, res.direct, res.hypothesis_ok))
        rows.append(("second_bound", t, res.bound, res.hypothesis_ok))
    return Table(["quantity", "arg", "value", "hypothesis_ok"], rows)


def _run_verify_all(cfg: RunConfig) -> tuple[Table, bool]:
    results = verification.run_all()
    rows = [(r.name, r.measured, r.tolerance, r.passed, r.detail) for r in results]
    return Table(["check", "measured", "tolerance", "passed", "detail"], rows), all(
        r.passed for r in results
    )


# -- output ----------------------------------------------------------------------


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str) and ("," in value or '"' in value):
        return '"' + value.replace('"', '""') + '"'
    return str(value)


def emit(table: Table, fmt: str, destination) -> None:
    """Write the table as CSV (header row, '.'-decimal) or JSON (stable keys)."""
    if fmt == "csv":
        lines = [",".join(table.columns)]
        for row in table.rows:
            lines.append(",".join(_csv_cell(v) for v in row))
        destination.write("\n".join(lines) + "\n")
    else:
        payload = [dict(zip(table.columns, row)) for row in table.rows]
        destination.write(json.dumps(payload, indent=2) + "\n")


def run(config: RunConfig) -> int:
    """Dispatch a parsed config; returns the process exit code."""
    verify_failed = False
    try:
        if config.command == "moments":
            table = _run_moments(config)
        elif config.command == "central-moments":
            table = _run_central_moments(config)
        elif config.command == "asymptotics":
            table = _run_asymptotics(config)
        elif config.command == "apply":
            table = _run_apply(config)
        elif config.command == "converge":
            table = _run_converge(config)
        elif config.command == "eigen":
            table = _run_eigen(config)
        elif config.command == "schur":
            table = _run_schur(config)
        elif config.command == "verify-all":
            table, all_ok = _run_verify_all(config)
            verify_failed = not all_ok
        else:  # pragma: no cover
            raise SmldError(f"unknown command {config.command!r}")
    except SmldError as exc:
        print(f"smld: {exc.code}: {exc}", file=sys.stderr)
        return 3
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            emit(table, config.fmt, fh)
    else:
        emit(table, config.fmt, sys.stdout)
    return 1 if verify_failed else 0


def main(argv: Sequence[str] | None = None) -> int:
    config = parse_config(sys.argv[1:] if argv is None else list(argv))
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
