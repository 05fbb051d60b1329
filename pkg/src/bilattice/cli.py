"""Command-line front end.

Usage:
    bilattice coeffs --family charlier --a 3 --beta 1/3 --lattice bi --t 10 --n 50 --digits 700
    bilattice verify --family meixner --a 3 --beta 2/3 --gamma 9/10 --lattice shifted --n 30
    bilattice b0-scan --family charlier --a 3 --beta 1/3 --t-grid 0,1,10,inf
    bilattice special --a 3 --beta 1 --n 30

Exit codes: 0 pass, 1 verification failure, 2 usage or parameter error,
3 numerical singularity.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from fractions import Fraction

import mpmath

from .errors import (BilatticeError, DegenerateError, MonotonicityError, PoleError,
                     PositivityWarning, SingularityError, ValidityError)
from .measures import INF, Family, FamilyParams, LatticeKind, LatticeSpec
from .oracle import oracle_coeffs
from .painleve import (PrecisionPolicy, beta_half_closed_form, certified_iterate, compare_coeffs,
                       dp2_reduce)
from .precision import PrecisionContext, parse_rational
from .verify import CROSS_TOL, DEFAULT_T_GRID, b0_scan, expected_direction, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SINGULAR = 0, 1, 2, 3

COEFF_HEADER = ["n", "a_sq_painleve", "b_painleve", "a_sq_oracle", "b_oracle",
                "abs_diff_a_sq", "abs_diff_b", "b_minus_n", "b_minus_half_n", "a_sq_minus_an"]
DIFF_DIGITS = 6


def _fmt(x, digits: int) -> str:
    return mpmath.nstr(x, digits)


def _fmt_t(t) -> str:
    return "inf" if t == INF else str(t)


def parse_t(text: str):
    s = text.strip().lower()
    if s in ("inf", "infinity", "oo", "∞"):
        return INF
    return parse_rational(s)


def _params(args) -> FamilyParams:
    if args.family == Family.MEIXNER.value:
        if args.gamma is None:
            raise ValidityError("--gamma is required for the meixner family")
        return FamilyParams.meixner(args.a, args.beta, args.gamma)
    if args.gamma is not None:
        raise ValidityError("--gamma only applies to the meixner family")
    return FamilyParams.charlier(args.a, args.beta)


def _lattice(args) -> LatticeSpec:
    if args.lattice == LatticeKind.BI.value:
        return LatticeSpec(LatticeKind.BI, parse_t(args.t))
    return LatticeSpec(LatticeKind(args.lattice))


def _policy(args) -> PrecisionPolicy:
    return PrecisionPolicy(args.base_digits, args.digits_per_index)


def _config(args) -> dict:
    return {"command": args.command, "family": args.family, "a": str(parse_rational(args.a)),
           "beta": str(parse_rational(args.beta)),
           "gamma": None if args.gamma is None else str(parse_rational(args.gamma)),
           "lattice": args.lattice, "t": _fmt_t(parse_t(args.t)), "n": args.n,
           "digits": args.digits,
           "tail_eps": None if args.tail_eps is None else str(args.tail_eps)}


def _emit(args, config: dict, header: list, rows: list, extra: dict | None = None) -> None:
    """Write rows as CSV or as one JSON object with the config echo and one array per column."""
    if args.format == "json":
        payload = {"config": config}
        payload.update(extra or {})
        payload["data"] = {h: [r[i] for r in rows] for i, h in enumerate(header)}
        text = json.dumps(payload, indent=1, ensure_ascii=False) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------------

def cmd_coeffs(args) -> int:
    params = _params(args)
    lattice = _lattice(args)
    params.validate(lattice)
    N = args.n
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        run = certified_iterate(params, lattice, N, _policy(args), args.digits,
                                parse_rational(args.perturb_b0), args.tail_eps)
    basis = oracle_coeffs(params, lattice, N, run.ctx)
    cmp = compare_coeffs(run.coeffs, basis.coeffs)
    digits = run.agreement_digits()
    a = run.ctx.real(params.a)
    rows = []
    for n in range(N + 1):
        A, B = run.coeffs.a_sq[n], run.coeffs.b[n]
        da, db = cmp.diffs[n]
        rows.append([n, _fmt(A, digits), _fmt(B, digits),
                     _fmt(basis.coeffs.a_sq[n], digits), _fmt(basis.coeffs.b[n], digits),
                     _fmt(da, DIFF_DIGITS), _fmt(db, DIFF_DIGITS),
                     _fmt(B - n, digits), _fmt(B - run.ctx.real(Fraction(n, 2)), digits),
                     _fmt(A - a * n, digits)])
    # only disagreement inside the certified range counts as a failure
    bad = cmp.first_divergence(run.ctx.real(CROSS_TOL))
    if bad is not None and bad > run.certified_upto:
        bad = None
    extra = {"working_digits": run.ctx.digits, "agreement_digits": digits,
             "certified_upto": run.certified_upto, "first_divergence": bad}
    _emit(args, _config(args), COEFF_HEADER, rows, extra)
    _status(f"coeffs: N={N} digits={run.ctx.digits} certified_upto={run.certified_upto} "
            f"first_divergence={bad}")
    return EXIT_OK if bad is None else EXIT_FAIL


def cmd_verify(args) -> int:
    params = _params(args)
    lattice = _lattice(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        report = run_suite(params, lattice, args.n, args.digits, _policy(args),
                           b0_shift=parse_rational(args.perturb_b0), tail_eps=args.tail_eps)
    header = ["check", "passed", "residual", "tol", "detail"]
    rows = []
    for c in report.checks:
        d = c.as_dict(DIFF_DIGITS)
        rows.append([d["name"], "pass" if d["passed"] else "fail",
                     d["residual"] or "", d["tol"] or "", d["detail"]])
    info = dict(report.info)
    _emit(args, _config(args), header, rows, {"passed": report.passed, "info": info})
    failed = [c.name for c in report.checks if not c.passed]
    _status(f"verify: {len(report.checks) - len(failed)}/{len(report.checks)} checks passed"
            + (f"; failed: {', '.join(failed)}" if failed else "")
            + (f"; divergence index {info['divergence']}" if info.get("divergence") is not None else ""))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_b0_scan(args) -> int:
    params = _params(args)
    grid = [parse_t(x) for x in args.t_grid.split(",")] if args.t_grid else list(DEFAULT_T_GRID)
    ctx = PrecisionContext(args.digits or 60, args.tail_eps)
    header = ["t", "b0"]
    try:
        rows = b0_scan(params, ctx, grid)
        status = EXIT_OK
        msg = "monotone"
    except MonotonicityError as exc:
        rows = b0_scan(params, ctx, grid, strict=False)
        status = EXIT_FAIL
        msg = str(exc)
    direction = {1: "increasing", -1: "decreasing", 0: "constant"}[expected_direction(params.beta)]
    out = [[_fmt_t(t), _fmt(y, ctx.digits)] for t, y in rows]
    _emit(args, _config(args), header, out, {"expected_direction": direction})
    _status(f"b0-scan: expected {direction}; {msg}")
    return status


def cmd_special(args) -> int:
    beta = parse_rational(args.beta)
    N = args.n
    a = parse_rational(args.a)
    policy = _policy(args)
    ctx = PrecisionContext(args.digits or policy.digits_for(N), args.tail_eps)
    tol = ctx.real(CROSS_TOL)
    if beta == Fraction(1, 2):
        params = FamilyParams.charlier(a, beta)
        run = certified_iterate(params, LatticeSpec.bi(1), N, policy, ctx.digits)
        header = ["n", "a_sq_closed", "b_closed", "a_sq_painleve", "b_painleve",
                  "abs_diff_a_sq", "abs_diff_b"]
        rows, worst = [], ctx.mp.zero
        for n in range(N + 1):
            A, B = beta_half_closed_form(a, n, ctx)
            dA = abs(A - run.coeffs.a_sq[n])
            dB = abs(B - run.coeffs.b[n])
            worst = max(worst, dA, dB)
            rows.append([n, _fmt(A, 40), _fmt(B, 40), _fmt(run.coeffs.a_sq[n], 40),
                         _fmt(run.coeffs.b[n], 40), _fmt(dA, DIFF_DIGITS), _fmt(dB, DIFF_DIGITS)])
        ok = worst < tol
        _emit(args, _config(args), header, rows, {"max_abs_diff": _fmt(worst, DIFF_DIGITS)})
        _status(f"special beta=1/2: max |closed - iterated| = {_fmt(worst, 3)}")
        return EXIT_OK if ok else EXIT_FAIL
    if beta == 1:
        params = FamilyParams.charlier(a, 1)
        b0 = _b0_plain(params, ctx)
        dp = dp2_reduce(a, b0, N, ctx)
        header = ["n", "c", "dp2_residual", "product_residual"]
        rows = []
        for n in range(N + 1):
            res = dp.residuals[n - 1] if 1 <= n < N else None
            prod = dp.product_residuals[n] if n < N else None
            rows.append([n, _fmt(dp.c[n], 40), "" if res is None else _fmt(abs(res), DIFF_DIGITS),
                         "" if prod is None else _fmt(abs(prod), DIFF_DIGITS)])
        worst = max([abs(r) for r in dp.residuals] + [abs(r) for r in dp.product_residuals])
        inside = all(abs(c) < 1 for c in dp.c[1:])
        extra = {"max_residual": _fmt(worst, DIFF_DIGITS), "abs_c_below_one": inside}
        ok = worst < tol and inside
        if args.lattice == LatticeKind.BI.value:
            # beta = 1: both lattices are N, the bi-lattice measure is (1 + t) times the plain one
            lat = LatticeSpec(LatticeKind.BI, parse_t(args.t))
            merged = oracle_coeffs(params, lat, N, ctx)
            plain = oracle_coeffs(params, LatticeSpec.plain(), N, ctx)
            cmp = compare_coeffs(merged.coeffs, plain.coeffs)
            gap = max(cmp.max_abs_da_sq, cmp.max_abs_db)
            extra["bi_vs_plain_max_abs_diff"] = _fmt(gap, DIFF_DIGITS)
            ok = ok and gap < tol
        _emit(args, _config(args), header, rows, extra)
        _status(f"special beta=1: max dP-II residual {_fmt(worst, 3)}, |c_n| < 1: {inside}")
        return EXIT_OK if ok else EXIT_FAIL
    raise ValidityError("special needs --beta 1/2 (closed form) or --beta 1 (dP-II reduction)")


def _b0_plain(params: FamilyParams, ctx: PrecisionContext):
    from .measures import b0_initial

    return b0_initial(params, LatticeSpec.plain(), ctx)


# -- parser ------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, family_default="charlier", lattice_default="plain") -> None:
    p.add_argument("--family", choices=[f.value for f in Family], default=family_default)
    p.add_argument("--a", required=True, help="a > 0, exact rational such as 3 or 7/2")
    p.add_argument("--beta", required=True, help="beta, exact rational such as 1/3")
    p.add_argument("--gamma", default=None, help="gamma (meixner only)")
    p.add_argument("--lattice", choices=[k.value for k in LatticeKind], default=lattice_default)
    p.add_argument("--t", default="0", help="bi-lattice mixing weight, rational or 'inf'")
    p.add_argument("--n", type=int, default=30, help="largest index N")
    p.add_argument("--digits", type=int, default=None,
                   help="working digits (default: base + per-index policy)")
    p.add_argument("--base-digits", type=int, default=60)
    p.add_argument("--digits-per-index", type=int, default=12)
    p.add_argument("--tail-eps", default=None, help="series and measure truncation tolerance")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bilattice",
        description="Recurrence coefficients of generalized Charlier and Meixner polynomials "
                    "on the lattices N, N+1-beta and their union.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="Painleve iteration next to the Stieltjes oracle")
    _common(p)
    p.add_argument("--perturb-b0", default="0", help="add this to b0 (negative control)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", help="run every invariant, one line per check")
    _common(p)
    p.add_argument("--perturb-b0", default="0", help="add this to b0 (negative control)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("b0-scan", help="b0 on the bi-lattice as a function of t")
    _common(p, lattice_default="bi")
    p.add_argument("--t-grid", default=None, help="comma separated t values, e.g. 0,1/10,1,inf")
    p.set_defaults(func=cmd_b0_scan)

    p = sub.add_parser("special", help="beta = 1/2 closed form or beta = 1 dP-II reduction")
    _common(p)
    p.set_defaults(func=cmd_special)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.n < 1:
            raise ValidityError("--n must be at least 1")
        if args.digits is not None and args.digits < 30:
            raise ValidityError("--digits must be at least 30")
        if args.tail_eps is not None:
            args.tail_eps = parse_rational(args.tail_eps)
        return args.func(args)
    except SingularityError as exc:
        _status(f"error: {exc}")
        return EXIT_SINGULAR
    except (ValidityError, DegenerateError, PoleError, ValueError, ZeroDivisionError) as exc:
        _status(f"error: {exc}")
        return EXIT_USAGE
    except BilatticeError as exc:
        _status(f"error: {type(exc).__name__}: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
