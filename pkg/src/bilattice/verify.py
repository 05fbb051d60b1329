"""Verification suite: every invariant of the measures, painleve and oracle layers.

Each check returns a :class:`Check` carrying its residual and tolerance, so
the CLI can print a machine-readable report and the tests can assert on the
same objects.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (BilatticeError, MonotonicityError, PositivityWarning, SingularityError,
                     ValidityError)
from .measures import (INF, FamilyParams, LatticeKind, LatticeSpec, b0_initial, build_measure,
                       closed_moments, moment, pearson_residual)
from .oracle import (hankel_coeffs, interlacing_ok, ladder_diagnostics, meixner_ladder_residuals,
                     oracle_coeffs, partial_sum_check, structure_coeffs, zeros)
from .painleve import (PainleveRun, PrecisionPolicy, certified_iterate, charlier_identity_residuals,
                       charlier_iterate, compare_coeffs, iterate, meixner_chain_residuals,
                       meixner_iterate, meixner_uv_residuals)
from .precision import PrecisionContext, Real

CROSS_TOL = Fraction(1, 10**20)


@dataclass
class Check:
    name: str
    passed: bool
    residual: Real | None = None
    tol: Real | None = None
    detail: str = ""

    def as_dict(self, digits: int = 6) -> dict:
        from mpmath import nstr

        return {
            "name": self.name,
            "passed": bool(self.passed),
            "residual": None if self.residual is None else nstr(self.residual, digits),
            "tol": None if self.tol is None else nstr(self.tol, digits),
            "detail": self.detail,
        }


def _max_abs(values) -> Real:
    values = list(values)
    return max(abs(v) for v in values) if values else 0


def _bounded(name: str, residual, tol, detail: str = "") -> Check:
    return Check(name, residual < tol, residual, tol, detail)


def _scale(coeffs) -> Real:
    """Magnitude used to make identity residuals relative (products of two coefficients)."""
    big = max([abs(x) for x in coeffs.a_sq] + [abs(x) for x in coeffs.b] + [1])
    return big * big


# -- initial values and moments -------------------------------------------------

def check_b0(params: FamilyParams, lattice: LatticeSpec, ctx: PrecisionContext) -> list[Check]:
    """Closed-form b_0 and (m0, m1) against sums over the truncated measure."""
    measure = build_measure(params, lattice, ctx, max_order=2)
    m0, m1 = moment(measure, 0), moment(measure, 1)
    c0, c1 = closed_moments(params, lattice, ctx)
    tol = ctx.tol(10)
    b0 = b0_initial(params, lattice, ctx)
    return [
        _bounded("b0_vs_moment_ratio", abs(b0 - m1 / m0) / max(1, abs(b0)), tol),
        _bounded("closed_m0_vs_sum", abs(c0 - m0) / abs(m0), tol),
        _bounded("closed_m1_vs_sum", abs(c1 - m1) / max(abs(m1), 1), tol),
    ]


def bessel_shift_residual(params: FamilyParams, ctx: PrecisionContext) -> Real:
    """sqrt(a) I_{2-b} + (1-b) I_{1-b} - sqrt(a) I_{-b} at 2 sqrt(a), relative."""
    from .precision import bessel_i

    mp = ctx.mp
    beta = params.beta
    sa = mp.sqrt(ctx.real(params.a))
    z = 2 * sa
    rhs = sa * bessel_i(-beta, z, ctx)
    lhs = sa * bessel_i(2 - beta, z, ctx) + ctx.real(1 - beta) * bessel_i(1 - beta, z, ctx)
    return abs(lhs - rhs) / abs(rhs)


def check_pearson(params: FamilyParams, ctx: PrecisionContext, points=None) -> Check:
    beta = params.beta
    if points is None:
        points = [Fraction(k, 4) for k in range(1, 80, 7)] + [1 - beta, 3, Fraction(5, 2)]
    worst = ctx.mp.zero
    for x in points:
        if x <= -beta:
            continue
        worst = max(worst, abs(pearson_residual(params, x, ctx)))
    return _bounded("pearson", worst, ctx.tol(10))


# -- the two pipelines ------------------------------------------------------------

@dataclass
class CrossResult:
    run: PainleveRun
    oracle: object
    comparison: object
    divergence: int | None
    singular_at: int | None = None


def cross_pipeline(params: FamilyParams, lattice: LatticeSpec, N: int,
                   policy: PrecisionPolicy = PrecisionPolicy(), digits: int | None = None,
                   b0_shift=0, tail_eps=None) -> CrossResult:
    """Certified Painleve run against the Stieltjes oracle at the same working precision."""
    run = certified_iterate(params, lattice, N, policy, digits, b0_shift, tail_eps)
    basis = oracle_coeffs(params, lattice, N, run.ctx)
    cmp = compare_coeffs(run.coeffs, basis.coeffs)
    return CrossResult(run, basis, cmp, cmp.first_divergence(run.ctx.real(policy.tol)))


def negative_control(params: FamilyParams, lattice: LatticeSpec, N: int, shift=Fraction(1, 1000),
                     digits: int | None = None, tol=CROSS_TOL) -> dict:
    """Perturb b_0 and locate where the Painleve orbit leaves the oracle.

    ``divergence`` is the first n with a difference above ``tol``; ``separation``
    is the first n at which the difference exceeds 1 (the orbit has visibly left
    the orthogonality solution), or the index of a singularity hit.
    """
    ctx = PrecisionContext(digits or PrecisionPolicy().digits_for(N))
    basis = oracle_coeffs(params, lattice, N, ctx)
    singular = None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        try:
            coeffs, _, _ = iterate(params, lattice, N, ctx, b0_shift=shift)
        except SingularityError as exc:
            singular = exc.index
            coeffs = None
    divergence = separation = singular
    if coeffs is not None:
        cmp = compare_coeffs(coeffs, basis.coeffs)
        divergence = cmp.first_divergence(ctx.real(tol))
        separation = cmp.first_divergence(1)
    return {"divergence": divergence, "separation": separation, "singular_at": singular}


# -- identity chains --------------------------------------------------------------

def check_charlier_identities(run: PainleveRun) -> list[Check]:
    p = run.params
    res = charlier_identity_residuals(run.coeffs, p.a, p.beta, run.ctx)
    scale = _scale(run.coeffs)
    tol = run.ctx.tol(10)
    out = [_bounded("first_moment", abs(res["first_moment"]) / scale, tol)]
    for key in ("b_step", "linear", "a_sq_step", "first_integral"):
        out.append(_bounded(key, _max_abs(res[key]) / scale, tol))
    return out


def check_meixner_uv(run: PainleveRun) -> list[Check]:
    p = run.params
    ctx = run.ctx
    scale = _scale(run.coeffs)
    tol = ctx.tol(10)
    out = []
    uvres = meixner_uv_residuals(run.uv, p.a, p.beta, p.gamma, ctx)
    for key, vals in uvres.items():
        out.append(_bounded(key, _max_abs(vals) / scale**2, tol))
    for key, vals in meixner_chain_residuals(run.coeffs, run.uv, p.a, p.beta, p.gamma, ctx).items():
        out.append(_bounded(key, _max_abs(vals) / scale, tol))
    return out


def check_structure(basis, n_max: int) -> list[Check]:
    """Delta P_n = n P_{n-1} + B_n P_{n-2} with B_n = a_n^2 a_{n-1}^2 / a."""
    measure = basis.measure
    ctx = measure.ctx
    a = ctx.real(measure.params.a)
    A = basis.coeffs.a_sq
    tol = ctx.tol(10)
    lead = bcoef = other = ctx.mp.zero
    for n in range(2, n_max + 1):
        sc = structure_coeffs(basis, measure, n)
        scale = max(1, abs(sc.B))
        lead = max(lead, abs(sc.A_lead - n) / n)
        bcoef = max(bcoef, abs(sc.B - A[n] * A[n - 1] / a) / scale)
        other = max([other] + [abs(c) / scale for c in sc.others])
    return [
        _bounded("structure_leading_coefficient", lead, tol),
        _bounded("structure_B_n", bcoef, tol),
        _bounded("structure_lower_terms", other, tol),
    ]


def check_ladder(basis, params: FamilyParams, n_max: int) -> list[Check]:
    measure = basis.measure
    ctx = measure.ctx
    ladders = [ladder_diagnostics(basis, measure, params, n) for n in range(n_max + 1)]
    res = meixner_ladder_residuals(basis, ladders, params, ctx)
    scale = _scale(basis.coeffs.truncated(n_max))
    tol = ctx.tol(10)
    return [_bounded(key, _max_abs(vals) / scale, tol) for key, vals in res.items()]


def check_zeros(basis, n_max: int) -> list[Check]:
    """Trace identity and lattice interlacing for P_1 .. P_{n_max}."""
    ctx = basis.measure.ctx
    tol = ctx.tol(10)
    pts = basis.measure.points
    trace = ctx.mp.zero
    bad = []
    B = basis.coeffs.b
    for n in range(1, n_max + 1):
        zs = zeros(basis, n)
        s = sum(B[:n])
        trace = max(trace, abs(sum(zs) - s) / max(1, abs(s)))
        if not interlacing_ok(zs, pts):
            bad.append(n)
    return [
        _bounded("zero_trace", trace, tol),
        Check("interlacing", not bad, detail=f"failed at n={bad}" if bad else ""),
    ]


def check_positivity(coeffs, beta, label: str) -> Check:
    bad = coeffs.positivity_violations(beta)
    return Check(f"positivity_{label}", not bad, detail=f"violated at n={bad}" if bad else "")


def check_partial_sums(coeffs, beta, n_max: int) -> Check:
    limit = len(coeffs.b) if beta == 1 else len(coeffs.b) // 2
    n_max = min(n_max, limit)
    bad = [n for n in range(1, n_max + 1) if not partial_sum_check(coeffs, beta, n)]
    return Check("partial_sums", not bad, detail=f"n <= {n_max}" + (f", failed at {bad}" if bad else ""))


# -- precision and oracle self-consistency -----------------------------------------

def check_oracle_doubling(params, lattice, N: int, ctx: PrecisionContext, basis=None) -> Check:
    """Doubling digits and the truncation tolerance moves the oracle by < 1e-20."""
    basis = basis or oracle_coeffs(params, lattice, N, ctx)
    fine = oracle_coeffs(params, lattice, N, ctx.doubled())
    cmp = compare_coeffs(basis.coeffs, fine.coeffs)
    worst = max(cmp.max_abs_da_sq, cmp.max_abs_db)
    return _bounded("oracle_doubling", worst, ctx.real(CROSS_TOL))


def check_hankel(basis, n_max: int = 8) -> Check:
    n_max = min(n_max, basis.N)
    hk = hankel_coeffs(basis.measure, n_max)
    cmp = compare_coeffs(basis.coeffs.truncated(n_max), hk)
    worst = max(cmp.max_abs_da_sq, cmp.max_abs_db)
    return _bounded("hankel_vs_stieltjes", worst, basis.measure.ctx.real(CROSS_TOL))


def shift_covariance(params: FamilyParams, N: int, ctx: PrecisionContext) -> Real:
    """Shifted-lattice run vs the plain run of the shifted-equivalent parameters (b + 1 - beta)."""
    eq = params.shifted_equivalent()
    b_hat = b0_initial(params, LatticeSpec.shifted(), ctx)
    b_eq = b0_initial(eq, LatticeSpec.plain(), ctx)
    shift = ctx.real(1 - params.beta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        if params.is_meixner:
            _, hat = meixner_iterate(params.a, params.beta, params.gamma, b_hat, N, ctx)
            _, ref = meixner_iterate(eq.a, eq.beta, eq.gamma, b_eq, N, ctx)
        else:
            hat = charlier_iterate(params.a, params.beta, b_hat, N, ctx)
            ref = charlier_iterate(eq.a, eq.beta, b_eq, N, ctx)
    worst = max(abs(x - y) for x, y in zip(hat.a_sq, ref.a_sq))
    return max(worst, max(abs(x - (y + shift)) for x, y in zip(hat.b, ref.b)))


# -- b0(t) -------------------------------------------------------------------------

DEFAULT_T_GRID = (Fraction(0), Fraction(1, 10), Fraction(1), Fraction(10), Fraction(100), INF)


def expected_direction(beta) -> int:
    """+1 when b0(t) should increase with t (0 < beta < 1), -1 when 1 < beta < 2, 0 at beta = 1."""
    if beta < 1:
        return 1
    if beta > 1:
        return -1
    return 0


def b0_scan(params: FamilyParams, ctx: PrecisionContext, t_grid=DEFAULT_T_GRID,
            strict: bool = True) -> list[tuple]:
    """Rows (t, b0(t)) on the bi-lattice; raises MonotonicityError on a violation when strict."""
    grid = sorted(t_grid)
    rows = [(t, b0_initial(params, LatticeSpec(LatticeKind.BI, t), ctx)) for t in grid]
    if strict:
        direction = expected_direction(params.beta)
        for (t0, y0), (t1, y1) in zip(rows, rows[1:]):
            step = y1 - y0
            ok = abs(step) <= ctx.tol(10) * max(1, abs(y0)) if direction == 0 else step * direction > 0
            if not ok:
                raise MonotonicityError(
                    f"b0 not {'constant' if direction == 0 else 'monotone'} between t={t0} and t={t1}",
                    (t0, t1))
    return rows


# -- full report -------------------------------------------------------------------

@dataclass
class Report:
    checks: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, items):
        if isinstance(items, Check):
            self.checks.append(items)
        else:
            self.checks.extend(items)


def _guard(report: Report, name: str, fn):
    """Run one check group; a numerical error becomes a failed check, not a crash."""
    try:
        report.add(fn())
    except (BilatticeError, ArithmeticError) as exc:
        report.add(Check(name, False, detail=f"{type(exc).__name__}: {exc}"))


def run_suite(params: FamilyParams, lattice: LatticeSpec, N: int, digits: int | None = None,
              policy: PrecisionPolicy = PrecisionPolicy(), diag_digits: int = 60,
              b0_shift=0, tail_eps=None) -> Report:
    """Every applicable invariant for one (family, lattice) configuration.

    The cross-pipeline comparison runs at the policy's precision; the polynomial
    diagnostics (structure, ladder sums, zeros) run on a separate oracle basis at
    ``diag_digits``, which is ample for the orders they are checked at.
    """
    params.validate(lattice)
    report = Report()
    diag = PrecisionContext(max(30, diag_digits))
    beta = params.beta

    report.info["lattice"] = lattice.kind.value
    _guard(report, "b0", lambda: check_b0(params, lattice, diag))
    if not params.is_meixner:
        _guard(report, "pearson", lambda: check_pearson(params, diag))
        if 0 < beta < 2:
            _guard(report, "bessel_shift_identity",
                   lambda: _bounded("bessel_shift_identity", bessel_shift_residual(params, diag),
                                    diag.tol(10)))

    cross = None
    try:
        cross = cross_pipeline(params, lattice, N, policy, digits, b0_shift, tail_eps)
    except SingularityError as exc:
        report.add(Check("cross_pipeline", False, detail=str(exc)))
        report.info["singular_at"] = exc.index
    except BilatticeError as exc:
        report.add(Check("cross_pipeline", False, detail=f"{type(exc).__name__}: {exc}"))
    if cross is not None:
        run = cross.run
        cmp = cross.comparison
        worst = max(cmp.max_abs_da_sq, cmp.max_abs_db)
        tol = run.ctx.real(policy.tol)
        detail = "" if cross.divergence is None else f"diverges at n={cross.divergence}"
        report.add(Check("cross_pipeline", worst < tol, worst, tol, detail))
        report.add(Check("doubling_certificate", run.certified, run.max_disagreement, tol,
                         f"certified up to n={run.certified_upto}"))
        report.info.update(digits=run.ctx.digits, divergence=cross.divergence,
                           certified_upto=run.certified_upto)
        report.add(check_positivity(cross.oracle.coeffs, beta, "oracle"))
        report.add(check_positivity(run.coeffs, beta, "painleve"))
        if params.is_meixner:
            _guard(report, "uv_identities", lambda: check_meixner_uv(run))
        else:
            _guard(report, "charlier_identities", lambda: check_charlier_identities(run))
        _guard(report, "oracle_doubling",
               lambda: check_oracle_doubling(params, lattice, N, run.ctx, cross.oracle))
        if lattice.kind is LatticeKind.BI and 0 < beta < 2:
            report.add(check_partial_sums(cross.oracle.coeffs, beta, 15))

    n_diag = min(N, 15)
    try:
        basis = oracle_coeffs(params, lattice, n_diag, diag)
    except BilatticeError as exc:
        report.add(Check("diagnostic_basis", False, detail=str(exc)))
        return report
    _guard(report, "hankel_vs_stieltjes", lambda: check_hankel(basis))
    if params.is_meixner:
        _guard(report, "ladder", lambda: check_ladder(basis, params, n_diag))
    elif n_diag >= 2:
        _guard(report, "structure", lambda: check_structure(basis, min(12, n_diag)))
    _guard(report, "zeros", lambda: check_zeros(basis, min(12, n_diag)))

    if lattice.kind is LatticeKind.SHIFTED:
        def covariance():
            return _bounded("shift_covariance", shift_covariance(params, N, cross.run.ctx
                                                                   if cross else diag),
                            (cross.run.ctx if cross else diag).real(CROSS_TOL))
        try:
            params.shifted_equivalent().validate(LatticeSpec.plain())
            _guard(report, "shift_covariance", covariance)
        except ValidityError:
            pass
    return report


__all__ = [
    "Check", "CrossResult", "Report", "DEFAULT_T_GRID", "b0_scan", "bessel_shift_residual",
    "check_b0", "check_charlier_identities", "check_hankel", "check_ladder", "check_meixner_uv",
    "check_oracle_doubling", "check_partial_sums", "check_pearson", "check_positivity",
    "check_structure", "check_zeros", "cross_pipeline", "expected_direction",
    "negative_control", "run_suite", "shift_covariance",
]
