import warnings
from fractions import Fraction

import pytest

from bilattice.errors import DegenerateError, LengthError, PositivityWarning, SingularityError
from bilattice.measures import FamilyParams, LatticeSpec, b0_initial
from bilattice.oracle import oracle_coeffs
from bilattice.painleve import (CoeffSeq, PrecisionPolicy, beta_half_closed_form, certified_iterate,
                                charlier_identity_residuals, charlier_iterate, compare_coeffs,
                                dp2_reduce, meixner_chain_residuals, meixner_iterate,
                                meixner_uv_residuals)
from bilattice.precision import PrecisionContext
from bilattice.verify import shift_covariance

CHARLIER = FamilyParams.charlier(3, Fraction(1, 3))
MEIXNER = FamilyParams.meixner(3, Fraction(2, 3), Fraction(9, 10))
CTX = PrecisionContext(300)


def test_charlier_first_steps_beta_half():
    ctx = PrecisionContext(60)
    c = charlier_iterate(4, Fraction(1, 2), 2, 3, ctx)
    assert c.a_sq[0] == 0
    assert c.a_sq[1] == 1
    assert c.b[1] == Fraction(5, 2)


def test_charlier_matches_beta_half_closed_form():
    ctx = PrecisionContext(60)
    c = charlier_iterate(4, Fraction(1, 2), 2, 20, ctx)
    for n in range(21):
        A, B = beta_half_closed_form(4, n, ctx)
        assert abs(c.a_sq[n] - A) < ctx.tol(10)
        assert abs(c.b[n] - B) < ctx.tol(10)


def test_removable_singularity_is_crossed():
    """a = 4: a_4^2 = a and b_4 = 4, so the rational update is 0/0 at n = 4."""
    ctx = PrecisionContext(60)
    c = charlier_iterate(4, Fraction(1, 2), 2, 8, ctx)
    assert abs(c.a_sq[4] - 4) < ctx.tol(10)
    assert abs(c.a_sq[5] - 5) < ctx.tol(10)


def test_hitting_a_is_always_removable():
    """Steering a_2^2 onto a forces the right side of the update to vanish as well."""
    ctx = PrecisionContext(60)
    mp = ctx.mp
    beta = Fraction(1, 3)

    def run(b0, N):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PositivityWarning)
            return charlier_iterate(3, beta, b0, N, ctx)

    lo, hi = mp.mpf("1.5"), mp.mpf("1.9")
    for _ in range(250):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if run(mid, 2).a_sq[2] < 3 else (lo, mid)
    c = run(lo, 6)
    assert abs(c.a_sq[2] - 3) < ctx.tol(10)
    res = charlier_identity_residuals(c, 3, beta, ctx)
    assert max(abs(r) for r in res["linear"]) < ctx.tol(10)


def test_vanishing_a_sq_is_reported():
    ctx = PrecisionContext(60)
    # a_1^2 = a - b0 (b0 + beta - 1) = 3 - 2 * 3/2 = 0
    with pytest.raises(SingularityError) as info:
        charlier_iterate(3, Fraction(1, 2), 2, 4, ctx)
    assert info.value.index == 1


def test_charlier_rejects_short_runs():
    with pytest.raises(ValueError):
        charlier_iterate(3, 1, 1, 0, PrecisionContext(40))


def test_positivity_warning_off_solution():
    ctx = PrecisionContext(60)
    with pytest.warns(PositivityWarning):
        charlier_iterate(3, Fraction(1, 3), 1, 12, ctx)


def test_beta_half_closed_form_values():
    ctx = PrecisionContext(40)
    A, B = beta_half_closed_form(4, 3, ctx)
    assert A == 3 and B == Fraction(7, 2)
    A0, B0 = beta_half_closed_form(9, 0, ctx)
    assert A0 == 0 and B0 == 3


def test_meixner_initial_values():
    ctx = PrecisionContext(60)
    b0 = b0_initial(MEIXNER, LatticeSpec.plain(), ctx)
    uv, coeffs = meixner_iterate(3, Fraction(2, 3), Fraction(9, 10), b0, 5, ctx)
    assert uv.u[0] == 0
    g1 = ctx.real(Fraction(9, 10)) - 1
    assert abs(uv.v[0] - 3 / g1 * (ctx.real(Fraction(9, 10)) - ctx.real(Fraction(2, 3)) + 3 - b0)) < ctx.tol(10)
    assert coeffs.a_sq[0] == 0
    assert abs(coeffs.b[0] - b0) < ctx.tol(10)
    assert len(uv.u) == 7 and len(uv.v) == 6


def test_meixner_degenerate_cases():
    ctx = PrecisionContext(40)
    with pytest.raises(DegenerateError, match="a_n\\^2 = n a"):
        meixner_iterate(3, Fraction(1, 2), Fraction(1, 2), 3, 5, ctx)
    with pytest.raises(DegenerateError):
        meixner_iterate(3, Fraction(1, 2), 1, 3, 5, ctx)


def test_gamma_equal_beta_closed_form_from_oracle():
    """gamma = beta reduces the weight to a^x/x!, whose coefficients are a n and n + a."""
    ctx = PrecisionContext(60)
    p = FamilyParams.meixner(3, Fraction(1, 2), Fraction(1, 2))
    basis = oracle_coeffs(p, LatticeSpec.plain(), 10, ctx)
    for n in range(11):
        assert abs(basis.coeffs.a_sq[n] - 3 * n) < ctx.tol(10)
        assert abs(basis.coeffs.b[n] - (n + 3)) < ctx.tol(10)


@pytest.mark.parametrize("lattice", [LatticeSpec.plain(), LatticeSpec.shifted(), LatticeSpec.bi(10)])
def test_charlier_cross_pipeline(lattice):
    run = certified_iterate(CHARLIER, lattice, 20)
    basis = oracle_coeffs(CHARLIER, lattice, 20, run.ctx)
    cmp = compare_coeffs(run.coeffs, basis.coeffs)
    assert max(cmp.max_abs_da_sq, cmp.max_abs_db) < run.ctx.real(Fraction(1, 10**20))
    assert run.certified


@pytest.mark.parametrize("lattice", [LatticeSpec.plain(), LatticeSpec.shifted(), LatticeSpec.bi(2)])
def test_meixner_cross_pipeline(lattice):
    run = certified_iterate(MEIXNER, lattice, 20)
    basis = oracle_coeffs(MEIXNER, lattice, 20, run.ctx)
    cmp = compare_coeffs(run.coeffs, basis.coeffs)
    assert max(cmp.max_abs_da_sq, cmp.max_abs_db) < run.ctx.real(Fraction(1, 10**20))
    assert run.uv is not None and run.certified


def test_low_precision_run_is_not_certified():
    run = certified_iterate(CHARLIER, LatticeSpec.plain(), 40, digits=40)
    assert not run.certified
    assert run.certified_upto < 40


def test_precision_policy():
    assert PrecisionPolicy().digits_for(30) == 420
    assert PrecisionPolicy(40, 2).digits_for(10) == 60


def test_agreement_digits_are_bounded():
    run = certified_iterate(CHARLIER, LatticeSpec.plain(), 10)
    assert 20 < run.agreement_digits() <= run.ctx.digits


def test_charlier_identity_chain():
    run = certified_iterate(CHARLIER, LatticeSpec.bi(10), 25)
    res = charlier_identity_residuals(run.coeffs, CHARLIER.a, CHARLIER.beta, run.ctx)
    tol = run.ctx.tol(10) * 10**4
    assert abs(res["first_moment"]) < tol
    for key in ("b_step", "linear", "a_sq_step", "first_integral"):
        assert max(abs(r) for r in res[key]) < tol, key


def test_meixner_identity_chain():
    run = certified_iterate(MEIXNER, LatticeSpec.shifted(), 25)
    p = MEIXNER
    for vals in meixner_uv_residuals(run.uv, p.a, p.beta, p.gamma, run.ctx).values():
        assert max(abs(r) for r in vals) < run.ctx.tol(10) * 10**8
    for vals in meixner_chain_residuals(run.coeffs, run.uv, p.a, p.beta, p.gamma, run.ctx).values():
        assert max(abs(r) for r in vals) < run.ctx.tol(10) * 10**4


@pytest.mark.parametrize("params", [CHARLIER, MEIXNER, FamilyParams.charlier(2, Fraction(3, 2))])
def test_shift_covariance(params):
    assert shift_covariance(params, 20, CTX) < CTX.tol(200)


def test_dp2_reduction():
    ctx = PrecisionContext(420)
    p = FamilyParams.charlier(3, 1)
    dp = dp2_reduce(3, b0_initial(p, LatticeSpec.plain(), ctx), 30, ctx)
    assert dp.c[0] == 1
    assert all(abs(c) < 1 for c in dp.c[1:])
    tol = ctx.real(Fraction(1, 10**20))
    assert max(abs(r) for r in dp.residuals) < tol
    assert max(abs(r) for r in dp.product_residuals) < tol


def test_compare_coeffs():
    ctx = PrecisionContext(40)
    x = CoeffSeq([ctx.mp.zero, ctx.real(1)], [ctx.real(2), ctx.real(3)])
    cmp = compare_coeffs(x, x)
    assert cmp.max_abs_da_sq == 0 and cmp.max_abs_db == 0
    assert cmp.first_divergence(Fraction(1, 10**20)) is None
    y = CoeffSeq([ctx.mp.zero, ctx.real(1)], [ctx.real(2), ctx.real(4)])
    cmp = compare_coeffs(x, y)
    assert cmp.max_abs_db == 1 and cmp.argmax_b == 1 and cmp.first_divergence(Fraction(1, 2)) == 1
    with pytest.raises(LengthError):
        compare_coeffs(x, x.truncated(0))


def test_coeffseq_views():
    ctx = PrecisionContext(40)
    c = CoeffSeq([ctx.mp.zero, ctx.real(-1)], [ctx.real(2), ctx.real(-3)])
    assert c.N == 1 and len(c) == 2
    assert c.d[1] == -4
    assert c.positivity_violations(Fraction(1, 3)) == [1]
