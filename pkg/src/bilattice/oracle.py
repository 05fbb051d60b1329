"""Independent route to the recurrence coefficients: discrete inner products.

Nothing here uses the Painleve systems.  Coefficients come from the
Stieltjes procedure over a truncated :class:`DiscreteMeasure`; the other
functions evaluate the resulting polynomials and the sums that the identity
checks need.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import RankError, ZeroCountError
from .measures import DiscreteMeasure, FamilyParams, LatticeSpec, build_measure
from .painleve import CoeffSeq
from .precision import PrecisionContext, Real, like


@dataclass
class OrthoBasis:
    """Monic recurrence coefficients with the squared norms <P_n, P_n>."""

    coeffs: CoeffSeq
    norms: list
    measure: DiscreteMeasure | None = None

    @property
    def N(self) -> int:
        return self.coeffs.N


@dataclass
class LadderDiagnostics:
    R: Real
    T: Real
    r: Real
    t: Real


def stieltjes_coeffs(measure: DiscreteMeasure, N: int, ctx: PrecisionContext | None = None) -> OrthoBasis:
    """Stieltjes procedure: b_n = <x P_n, P_n>/<P_n, P_n>, a_n^2 = <P_n,P_n>/<P_{n-1},P_{n-1}>."""
    ctx = ctx or measure.ctx
    mp = ctx.mp
    if len(measure) < N + 1:
        raise RankError(f"{len(measure)} support points cannot carry degree {N}")
    if measure.max_order < 2 * N + 1:
        raise RankError(f"measure certified to order {measure.max_order}, need {2 * N + 1}")
    xs = [mp.mpf(x) for x in measure.points]
    ws = [mp.mpf(w) for w in measure.weights]
    prev = [mp.zero] * len(xs)
    cur = [mp.mpf(1)] * len(xs)
    a_sq, b, norms = [mp.zero], [], []
    for n in range(N + 1):
        wp = [w * p for w, p in zip(ws, cur)]
        norm = mp.fsum(q * p for q, p in zip(wp, cur))
        if not norm > 0 or (norms and norm < norms[0] * ctx.eps**2):
            raise RankError(f"<P_{n}, P_{n}> underflowed")
        bn = mp.fsum(q * p * x for q, p, x in zip(wp, cur, xs)) / norm
        if n > 0:
            a_sq.append(norm / norms[-1])
        norms.append(norm)
        b.append(bn)
        if n == N:
            break
        an2 = a_sq[n]
        prev, cur = cur, [(x - bn) * p - an2 * q for x, p, q in zip(xs, cur, prev)]
    return OrthoBasis(CoeffSeq(a_sq, b), norms, measure)


def oracle_coeffs(params: FamilyParams, lattice: LatticeSpec, N: int, ctx: PrecisionContext) -> OrthoBasis:
    """Build a measure certified for degree N and run the Stieltjes procedure on it."""
    measure = build_measure(params, lattice, ctx, max_order=2 * N + 2)
    return stieltjes_coeffs(measure, N, ctx)


def eval_monic_all(basis: OrthoBasis, n: int, x) -> list:
    """[P_0(x), ..., P_n(x)] by the forward three-term recurrence."""
    if n > basis.N + 1:
        raise ValueError(f"degree {n} exceeds the basis (N={basis.N})")
    A, B = basis.coeffs.a_sq, basis.coeffs.b
    vals = [x * 0 + 1]
    prev = x * 0
    for k in range(n):
        nxt = (x - B[k]) * vals[k] - A[k] * prev
        prev = vals[k]
        vals.append(nxt)
    return vals


def eval_monic(basis: OrthoBasis, n: int, x) -> Real:
    """P_n(x) from xP_k = P_{k+1} + b_k P_k + a_k^2 P_{k-1}, P_{-1} = 0, P_0 = 1."""
    return eval_monic_all(basis, n, x)[n]


def _values_on(basis: OrthoBasis, n: int, xs) -> list:
    """Rows of P_0..P_n evaluated at every x in xs (list indexed by degree)."""
    cols = [eval_monic_all(basis, n, x) for x in xs]
    return [[col[k] for col in cols] for k in range(n + 1)]


def inner(measure: DiscreteMeasure, f, g) -> Real:
    mp = measure.ctx.mp
    return mp.fsum(w * p * q for w, p, q in zip(measure.weights, f, g))


@dataclass
class StructureCoeffs:
    A_lead: Real  # coefficient of P_{n-1}, should equal n
    B: Real       # coefficient of P_{n-2}
    others: list  # coefficients of P_0 .. P_{n-3}, should vanish


def structure_coeffs(basis: OrthoBasis, measure: DiscreteMeasure, n: int) -> StructureCoeffs:
    """Fourier coefficients of Delta P_n = P_n(x+1) - P_n(x) in P_0 .. P_{n-1}."""
    if not 2 <= n <= basis.N:
        raise ValueError("need 2 <= n <= N")
    xs = measure.points
    here = _values_on(basis, n, xs)
    shifted = [eval_monic(basis, n, x + 1) for x in xs]
    delta = [s - h for s, h in zip(shifted, here[n])]
    coeffs = [inner(measure, delta, here[k]) / basis.norms[k] for k in range(n)]
    return StructureCoeffs(coeffs[n - 1], coeffs[n - 2], coeffs[: n - 2])


def structure_b_coeff(basis: OrthoBasis, measure: DiscreteMeasure, n: int,
                      ctx: PrecisionContext | None = None) -> Real:
    """B_n in Delta P_n = n P_{n-1} + B_n P_{n-2}."""
    return structure_coeffs(basis, measure, n).B


def ladder_diagnostics(basis: OrthoBasis, measure: DiscreteMeasure, params: FamilyParams,
                       n: int, ctx: PrecisionContext | None = None) -> LadderDiagnostics:
    """The four ladder sums R_n, T_n, r_n, t_n with orthonormal p_n = P_n / sqrt(<P_n,P_n>)."""
    if not params.is_meixner:
        raise ValueError("ladder sums are defined for the Meixner weight")
    ctx = ctx or measure.ctx
    mp = ctx.mp
    g = ctx.real(params.gamma)
    xs = measure.points
    ws = measure.weights
    gn = 1 / mp.sqrt(basis.norms[n])
    here = [eval_monic_all(basis, n, x) for x in xs]
    back = [eval_monic_all(basis, n, x - 1) for x in xs]
    p_n = [h[n] * gn for h in here]
    p_n_back = [bk[n] * gn for bk in back]
    fx = [x / (g + x - 1) for x in xs]
    fg = [(g - 1) / (g + x - 1) for x in xs]
    R = mp.fsum(w * p * q * f for w, p, q, f in zip(ws, p_n, p_n_back, fx))
    T = mp.fsum(w * p * q * f for w, p, q, f in zip(ws, p_n, p_n_back, fg))
    if n == 0:
        return LadderDiagnostics(R, T, mp.zero, mp.zero)
    an = mp.sqrt(basis.coeffs.a_sq[n])
    gm = 1 / mp.sqrt(basis.norms[n - 1])
    p_m_back = [bk[n - 1] * gm for bk in back]
    r = an * mp.fsum(w * p * q * f for w, p, q, f in zip(ws, p_n, p_m_back, fx))
    t = an * mp.fsum(w * p * q * f for w, p, q, f in zip(ws, p_n, p_m_back, fg))
    return LadderDiagnostics(R, T, r, t)


def meixner_ladder_residuals(basis: OrthoBasis, ladders: list, params: FamilyParams,
                             ctx: PrecisionContext) -> dict:
    """All six scalar compatibility equations plus the derived ones, per n.

    ``ladders[n]`` must hold the diagnostics for n = 0 .. M; equations that
    reach index n+1 are evaluated for n = 0 .. M-1.
    """
    a = ctx.real(params.a)
    beta = ctx.real(params.beta)
    g = ctx.real(params.gamma)
    gb = g - beta
    A, B = basis.coeffs.a_sq, basis.coeffs.b
    R = [d.R for d in ladders]
    T = [d.T for d in ladders]
    r = [d.r for d in ladders]
    t = [d.t for d in ladders]
    M = len(ladders) - 1
    sR = [sum(R[: n + 1]) for n in range(M + 1)]
    sT = [sum(T[: n + 1]) for n in range(M + 1)]
    sT_prev = [sum(T[:n]) for n in range(M + 1)]

    out = {
        "R_plus_T": [R[n] + T[n] - 1 for n in range(M + 1)],
        "r_plus_t": [r[n] + t[n] for n in range(M + 1)],
        "b_from_T": [B[n] - (g - gb * T[n] + a + n - beta) for n in range(M + 1)],
        "a_sq_from_t": [A[n] - (n * a - gb * t[n]) for n in range(M + 1)],
    }
    rng = range(1, M)  # equations touching n-1 and n+1
    out["sum_rt"] = [
        r[n] + t[n] + r[n + 1] + t[n + 1]
        - (g * R[n] - B[n] * R[n] - B[n] * T[n] + beta * T[n] + a - beta - 1 + sR[n] + sT[n])
        for n in rng]
    out["weighted_sum_rt"] = [
        g * r[n] + beta * t[n] + g * r[n + 1] + beta * t[n + 1]
        - (-B[n] * g * R[n] - B[n] * beta * T[n] + g * a - beta + g * sR[n] + beta * sT[n])
        for n in rng]
    out["a_sq_RT"] = [
        A[n + 1] * R[n + 1] + A[n + 1] * T[n + 1] - A[n] * R[n - 1] - A[n] * T[n - 1]
        - ((g - B[n]) * r[n + 1] + (beta - B[n]) * t[n + 1]
           - (1 - B[n] + g) * r[n] - (1 - B[n] + beta) * t[n] + a)
        for n in rng]
    out["weighted_a_sq_RT"] = [
        g * A[n + 1] * R[n + 1] + beta * A[n + 1] * T[n + 1] - g * A[n] * R[n - 1] - beta * A[n] * T[n - 1]
        - (-g * B[n] * r[n + 1] - beta * B[n] * t[n + 1] - g * (1 - B[n]) * r[n]
           - beta * (1 - B[n]) * t[n] + g * a)
        for n in rng]
    out["t_pair"] = [
        t[n] + t[n + 1] - (gb * T[n] ** 2 - (2 * g + a + n - beta - 1) * T[n] + g - 1 + sT_prev[n])
        for n in range(M)]
    out["a_sq_T_shift"] = [
        A[n] * T[n - 1] - A[n + 1] * T[n + 1] - ((B[n] + g) * t[n + 1] + (1 - B[n] - g) * t[n])
        for n in rng]
    out["T_pair"] = [
        (T[n] + T[n - 1]) * (a * n - gb * t[n]) - (-(a + 2 * g + n - beta - 1) * t[n] + a * sT_prev[n])
        for n in range(1, M + 1)]
    out["a_sq_T_product"] = [
        A[n] * T[n] * T[n - 1] - t[n] * (t[n] - g + 1 - sT_prev[n]) for n in range(1, M + 1)]
    out["tT_system_forward"] = [
        a * T[n] * (T[n] - 1) * (T[n] * gb - g + 1) - (t[n] + a * T[n]) * (t[n + 1] + a * T[n])
        for n in range(M)]
    out["tT_system_backward"] = [
        (a * T[n] + t[n]) * (a * T[n - 1] + t[n]) * (gb * t[n] - a * n)
        - t[n] * (a * a * (g - 1) + a * (2 * g - beta - 1) * t[n] + gb * t[n] ** 2)
        for n in range(1, M + 1)]
    return out


def zeros(basis: OrthoBasis, n: int, ctx: PrecisionContext | None = None, tol=None) -> list:
    """The n zeros of P_n, bracketed by sign changes on a lattice-adapted grid, then bisected.

    The grid step is a quarter of the smallest gap between support points;
    since consecutive zeros are separated by a support point no sign change
    can be skipped.
    """
    if n == 0:
        return []
    measure = basis.measure
    if measure is None:
        raise ValueError("zeros need the basis' measure")
    ctx = ctx or measure.ctx
    mp = ctx.mp
    # bisect into the guard digits so the sum of n zeros stays well inside ctx.tol(10)
    tol = ctx.tol(-5) if tol is None else ctx.real(tol)
    pts = measure.points
    gaps = [q - p for p, q in zip(pts, pts[1:])]
    step = min(gaps) / 4 if gaps else mp.mpf(1) / 4
    A, B = basis.coeffs.a_sq, basis.coeffs.b
    an = [mp.sqrt(A[k]) for k in range(n + 1)]
    # Gershgorin interval of the n x n Jacobi matrix
    lo = min(B[k] - an[k] - (an[k + 1] if k + 1 < n else 0) for k in range(n))
    hi = max(B[k] + an[k] + (an[k + 1] if k + 1 < n else 0) for k in range(n))
    lo = max(lo, pts[0] - 1) - step
    hi = min(hi, pts[-1] + 1) + step

    def f(x):
        return eval_monic(basis, n, x)

    found = []
    x0 = lo
    f0 = f(x0)
    while x0 < hi and len(found) < n:
        x1 = x0 + step
        f1 = f(x1)
        if f1 == 0:
            found.append(x1)
            x1 += step / 2
            f1 = f(x1)
        elif f0 * f1 < 0:
            left, right, fl = x0, x1, f0
            while right - left > tol * max(1, abs(left)):
                mid = (left + right) / 2
                fm = f(mid)
                if fm == 0:
                    left = right = mid
                    break
                if (fm < 0) == (fl < 0):
                    left, fl = mid, fm
                else:
                    right = mid
            found.append((left + right) / 2)
        x0, f0 = x1, f1
    if len(found) < n:
        raise ZeroCountError(f"found {len(found)} sign changes for P_{n}")
    return found


def interlacing_ok(zs: list, points) -> bool:
    """Every open interval between consecutive zeros contains a support point."""
    pts = sorted(points)
    j = 0
    for left, right in zip(zs, zs[1:]):
        while j < len(pts) and pts[j] <= left:
            j += 1
        if j >= len(pts) or not pts[j] < right:
            return False
    return True


def partial_sum_check(coeffs: CoeffSeq, beta, n: int) -> bool:
    """Lattice lower bound on partial sums of b_k (sums of zeros).

    beta != 1: sum_{k<2n} b_k > n(n-1) + n(1-beta);  beta == 1: sum_{k<n} b_k > n(n-1)/2.
    """
    ref = coeffs.b[0]
    if beta == 1:
        if n > len(coeffs.b):
            raise ValueError("not enough coefficients")
        return sum(coeffs.b[:n]) > like(ref, Fraction(n * (n - 1), 2))
    if 2 * n > len(coeffs.b):
        raise ValueError("not enough coefficients")
    return sum(coeffs.b[: 2 * n]) > n * (n - 1) + n * (1 - like(ref, beta))


def hankel_coeffs(measure: DiscreteMeasure, N: int, ctx: PrecisionContext | None = None) -> CoeffSeq:
    """Recurrence coefficients from Hankel determinants of the moments (small N only).

    a_n^2 = D_{n+1} D_{n-1} / D_n^2 and b_n = D'_{n+1}/D_{n+1} - D'_n/D_n, where D'_n
    replaces the last column of the n x n Hankel matrix by moments shifted one further.
    """
    from .measures import moment

    ctx = ctx or measure.ctx
    mp = ctx.mp
    m = [moment(measure, j) for j in range(2 * N + 2)]

    def det(n, shifted=False):
        if n == 0:
            return mp.mpf(1) if not shifted else mp.zero
        rows = [[m[i + j] for j in range(n - 1)] + [m[i + n] if shifted else m[i + n - 1]]
                for i in range(n)]
        return mp.det(mp.matrix(rows))

    D = [det(n) for n in range(N + 2)]
    Dp = [det(n, True) for n in range(N + 2)]
    a_sq = [mp.zero] + [D[n + 1] * D[n - 1] / D[n] ** 2 for n in range(1, N + 1)]
    b = [Dp[n + 1] / D[n + 1] - Dp[n] / D[n] for n in range(N + 1)]
    return CoeffSeq(a_sq, b)
