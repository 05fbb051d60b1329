from fractions import Fraction

import pytest

from bilattice.errors import RankError
from bilattice.measures import DiscreteMeasure, FamilyParams, LatticeSpec, build_measure
from bilattice.oracle import (eval_monic, hankel_coeffs, interlacing_ok, ladder_diagnostics,
                              meixner_ladder_residuals, oracle_coeffs, partial_sum_check,
                              stieltjes_coeffs, structure_coeffs, zeros)
from bilattice.painleve import certified_iterate
from bilattice.precision import PrecisionContext

CTX = PrecisionContext(60)
TOL = CTX.tol(10)
CHARLIER = FamilyParams.charlier(3, Fraction(1, 3))
MEIXNER = FamilyParams.meixner(3, Fraction(2, 3), Fraction(9, 10))


def hand_measure(weight, size, ctx=CTX):
    """Measure on 0..size-1 with the given weight; the tail is negligible by construction."""
    mp = ctx.mp
    pts = tuple(mp.mpf(k) for k in range(size))
    wts = tuple(weight(k) for k in range(size))
    return DiscreteMeasure(pts, wts, mp.zero, 4 * size, CHARLIER, LatticeSpec.plain(), ctx)


def classical_charlier(a, size=260):
    mp = CTX.mp
    return hand_measure(lambda k: mp.power(a, k) / mp.factorial(k), size)


def classical_meixner_half(size=420):
    # (1)_k (1/2)^k / k! = 2^-k
    return hand_measure(lambda k: CTX.mp.power(2, -k), size)


# -- Stieltjes against classical closed forms ---------------------------------

def test_classical_charlier_coefficients():
    basis = stieltjes_coeffs(classical_charlier(3), 15)
    for n in range(16):
        assert abs(basis.coeffs.a_sq[n] - 3 * n) < TOL
        assert abs(basis.coeffs.b[n] - (n + 3)) < TOL


def test_classical_meixner_coefficients():
    basis = stieltjes_coeffs(classical_meixner_half(), 15)
    assert abs(basis.coeffs.b[0] - 1) < TOL
    assert abs(basis.coeffs.a_sq[1] - 2) < TOL
    for n in range(16):
        assert abs(basis.coeffs.a_sq[n] - 2 * n * n) < TOL
        assert abs(basis.coeffs.b[n] - (3 * n + 1)) < TOL


def test_norms_are_products_of_a_sq():
    basis = oracle_coeffs(CHARLIER, LatticeSpec.bi(10), 12, CTX)
    for n in range(1, 13):
        assert abs(basis.coeffs.a_sq[n] - basis.norms[n] / basis.norms[n - 1]) < TOL * basis.coeffs.a_sq[n]


@pytest.mark.parametrize("params, lattice", [
    (CHARLIER, LatticeSpec.plain()), (CHARLIER, LatticeSpec.bi(10)),
    (MEIXNER, LatticeSpec.shifted()), (MEIXNER, LatticeSpec.bi(2)),
])
def test_orthogonality(params, lattice):
    basis = oracle_coeffs(params, lattice, 8, CTX)
    m = basis.measure
    mp = CTX.mp
    vals = [[eval_monic(basis, n, x) for x in m.points] for n in range(9)]
    for i in range(9):
        for j in range(i):
            ip = mp.fsum(w * p * q for w, p, q in zip(m.weights, vals[i], vals[j]))
            assert abs(ip) < TOL * mp.sqrt(basis.norms[i] * basis.norms[j])


def test_low_degree_polynomials():
    basis = oracle_coeffs(MEIXNER, LatticeSpec.bi(2), 4, CTX)
    b0, a1 = basis.coeffs.b[0], basis.coeffs.a_sq[1]
    x = CTX.real(Fraction(7, 3))
    assert abs(eval_monic(basis, 1, x) - (x - b0)) < TOL
    assert abs(eval_monic(basis, 2, b0) + a1) < TOL
    with pytest.raises(ValueError):
        eval_monic(basis, 10, x)


def test_rank_errors():
    tiny = classical_charlier(3, size=4)
    with pytest.raises(RankError):
        stieltjes_coeffs(tiny, 5)
    m = build_measure(CHARLIER, LatticeSpec.plain(), CTX, max_order=10)
    with pytest.raises(RankError):
        stieltjes_coeffs(m, 8)


def test_oracle_precision_doubling():
    lo = oracle_coeffs(MEIXNER, LatticeSpec.bi(2), 15, CTX)
    hi = oracle_coeffs(MEIXNER, LatticeSpec.bi(2), 15, CTX.doubled())
    for n in range(16):
        assert abs(lo.coeffs.b[n] - hi.coeffs.b[n]) < TOL * max(1, abs(hi.coeffs.b[n]))
        assert abs(lo.coeffs.a_sq[n] - hi.coeffs.a_sq[n]) < TOL * max(1, abs(hi.coeffs.a_sq[n]))


@pytest.mark.parametrize("params, lattice", [(CHARLIER, LatticeSpec.bi(10)), (MEIXNER, LatticeSpec.plain())])
def test_hankel_cross_check(params, lattice):
    ctx = PrecisionContext(120)
    basis = oracle_coeffs(params, lattice, 6, ctx)
    h = hankel_coeffs(basis.measure, 6, ctx)
    for n in range(7):
        assert abs(h.b[n] - basis.coeffs.b[n]) < ctx.tol(40)
        assert abs(h.a_sq[n] - basis.coeffs.a_sq[n]) < ctx.tol(40)


# -- structure relation and ladder sums ----------------------------------------

@pytest.mark.parametrize("lattice", [LatticeSpec.plain(), LatticeSpec.shifted(), LatticeSpec.bi(10)])
def test_structure_relation(lattice):
    basis = oracle_coeffs(CHARLIER, lattice, 10, CTX)
    for n in range(2, 9):
        s = structure_coeffs(basis, basis.measure, n)
        assert abs(s.A_lead - n) < TOL * n
        assert all(abs(c) < TOL * max(1, abs(s.B)) for c in s.others)


def test_structure_relation_pointwise():
    """Delta P_n = n P_{n-1} + B_n P_{n-2} holds away from the support as well."""
    basis = oracle_coeffs(CHARLIER, LatticeSpec.bi(10), 10, CTX)
    n = 7
    B = structure_coeffs(basis, basis.measure, n).B
    for x in (Fraction(1, 7), Fraction(-5, 2), Fraction(31, 3)):
        xr = CTX.real(x)
        lhs = eval_monic(basis, n, xr + 1) - eval_monic(basis, n, xr)
        rhs = n * eval_monic(basis, n - 1, xr) + B * eval_monic(basis, n - 2, xr)
        assert abs(lhs - rhs) < TOL * max(1, abs(lhs))


def test_ladder_sums_close():
    basis = oracle_coeffs(MEIXNER, LatticeSpec.bi(2), 10, CTX)
    ladders = [ladder_diagnostics(basis, basis.measure, MEIXNER, n) for n in range(8)]
    res = meixner_ladder_residuals(basis, ladders, MEIXNER, CTX)
    assert set(res) >= {"R_plus_T", "r_plus_t", "b_from_T", "a_sq_from_t"}
    for key, vals in res.items():
        assert max(abs(v) for v in vals) < CTX.tol(15), key


def test_ladder_needs_meixner():
    basis = oracle_coeffs(CHARLIER, LatticeSpec.plain(), 4, CTX)
    with pytest.raises(ValueError):
        ladder_diagnostics(basis, basis.measure, CHARLIER, 2)


# -- zeros --------------------------------------------------------------------

def test_first_zero_is_b0():
    basis = oracle_coeffs(CHARLIER, LatticeSpec.bi(10), 3, CTX)
    (z,) = zeros(basis, 1)
    assert abs(z - basis.coeffs.b[0]) < TOL
    assert zeros(basis, 0) == []


@pytest.mark.parametrize("params, lattice", [
    (CHARLIER, LatticeSpec.bi(10)), (MEIXNER, LatticeSpec.bi(2)), (CHARLIER, LatticeSpec.shifted()),
])
def test_zero_trace_and_interlacing(params, lattice):
    basis = oracle_coeffs(params, lattice, 12, CTX)
    for n in (5, 12):
        zs = zeros(basis, n)
        assert len(zs) == n
        trace = sum(basis.coeffs.b[:n])
        assert abs(sum(zs) - trace) < TOL * max(1, abs(trace))
        assert interlacing_ok(zs, basis.measure.points)
        assert all(abs(eval_monic(basis, n, z)) < CTX.tol(20) * basis.norms[n] ** 0.5 for z in zs)


def test_interlacing_detects_crowded_zeros():
    pts = [CTX.real(k) for k in range(5)]
    assert interlacing_ok([CTX.real("0.5"), CTX.real("1.5")], pts)
    assert not interlacing_ok([CTX.real("0.2"), CTX.real("0.7")], pts)


# -- partial sums ---------------------------------------------------------------

def test_partial_sums_bi_lattice():
    basis = oracle_coeffs(CHARLIER, LatticeSpec.bi(10), 20, CTX)
    for n in range(1, 11):
        assert partial_sum_check(basis.coeffs, CHARLIER.beta, n)


def test_partial_sums_single_lattice():
    p = FamilyParams.charlier(3, 1)
    basis = oracle_coeffs(p, LatticeSpec.plain(), 6, CTX)
    for n in range(1, 6):
        assert partial_sum_check(basis.coeffs, 1, n)


def test_partial_sums_meixner_from_iteration():
    run = certified_iterate(MEIXNER, LatticeSpec.bi(2), 20)
    for n in range(1, 11):
        assert partial_sum_check(run.coeffs, MEIXNER.beta, n)


def test_partial_sums_need_enough_terms():
    basis = oracle_coeffs(CHARLIER, LatticeSpec.bi(10), 4, CTX)
    with pytest.raises(ValueError):
        partial_sum_check(basis.coeffs, CHARLIER.beta, 5)
