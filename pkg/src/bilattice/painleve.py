"""Forward iteration of the discrete Painleve systems for the recurrence coefficients.

Generalized Charlier (any of the three lattices)::

    b_n + b_{n-1} - n + beta = a n / a_n^2
    (a_{n+1}^2 - a)(a_n^2 - a) = a (b_n - n)(b_n - n + beta - 1)

Generalized Meixner, through a_n^2 = n a - (gamma-1) u_n and
b_n = n + gamma - beta + a - (gamma-1) v_n / a::

    (u_n + v_n)(u_{n+1} + v_n) = (gamma-1)/a^2 v_n (v_n - a)(v_n - a (gamma-beta)/(gamma-1))
    (u_n + v_n)(u_n + v_{n-1}) = u_n / (u_n - a n/(gamma-1)) (u_n + a)(u_n + a (gamma-beta)/(gamma-1))

Both are solved forward with every update linear in the new unknown, so the
only freedom is the initial value b_0.  The orthogonality solution is an
unstable orbit: precision must grow linearly with the number of steps.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DegenerateError, LengthError, PositivityWarning, SingularityError
from .measures import FamilyParams, LatticeSpec, b0_initial
from .precision import PrecisionContext, Real, like


@dataclass
class CoeffSeq:
    """Monic recurrence coefficients a_sq[0..N] (a_sq[0] = 0) and b[0..N]."""

    a_sq: list
    b: list

    def __len__(self):
        return len(self.b)

    @property
    def N(self) -> int:
        return len(self.b) - 1

    @property
    def d(self) -> list:
        """d_n = b_n - n."""
        return [bn - n for n, bn in enumerate(self.b)]

    def positivity_violations(self, beta) -> list[int]:
        """Indices where a_n^2 <= 0 (n >= 1) or b_n <= min(0, 1 - beta)."""
        if not self.b:
            return []
        floor = like(self.b[0], min(0, 1 - beta))
        bad = [n for n in range(1, len(self.a_sq)) if not self.a_sq[n] > 0]
        bad += [n for n, bn in enumerate(self.b) if not bn > floor]
        return sorted(set(bad))

    def truncated(self, n: int) -> "CoeffSeq":
        return CoeffSeq(self.a_sq[: n + 1], self.b[: n + 1])


@dataclass
class UVSeq:
    """Auxiliary Meixner unknowns: u[0..N+1], v[0..N]."""

    u: list
    v: list


@dataclass
class DP2Seq:
    """c_n with a_n^2 = a(1 - c_n^2), b_n = n + sqrt(a) c_n c_{n+1}, plus equation residuals."""

    c: list
    residuals: list
    product_residuals: list = field(default_factory=list)


def _near(x, target, ctx: PrecisionContext, scale=1) -> bool:
    return abs(x - target) <= ctx.tol(5) * max(1, abs(scale))


def _warn_positivity(coeffs: CoeffSeq, beta) -> None:
    bad = coeffs.positivity_violations(beta)
    if bad:
        warnings.warn(f"positivity constraints violated at n={bad[:10]}", PositivityWarning,
                      stacklevel=3)


def charlier_iterate(a, beta, b0, N: int, ctx: PrecisionContext) -> CoeffSeq:
    """Run the generalized Charlier system forward from a_0^2 = 0 and b_0.

    a_1^2 is fixed by the first-moment identity d_0^2 + (beta-1) d_0 + a_1^2 = a,
    then b_n comes from the first equation and a_{n+1}^2 from the second.
    Where a_n^2 = a and the right side vanishes too (e.g. beta = 1/2, a = n^2/4
    on the symmetric bi-lattice) the step is 0/0 and a_{n+1}^2 is taken from the
    linear identity n a (b_n - b_{n-1} - 1) = a_n^2 (a_{n-1}^2 - a_{n+1}^2) instead.
    Along an exact orbit a_n^2 = a always comes with a vanishing right side, since
    then d_n + beta - 1 = -d_{n-1}; the SingularityError branch only catches orbits
    that reach a_n^2 = a through rounding.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    a = ctx.real(a)
    beta_r = ctx.real(beta)
    if not a > 0:
        raise ValueError("a must be positive")
    b0 = ctx.real(b0)
    a_sq = [ctx.mp.zero, a - b0 * (b0 + beta_r - 1)]
    b = [b0]
    for n in range(1, N + 1):
        an2 = a_sq[n]
        if _near(an2, 0, ctx, a):
            raise SingularityError("a_n^2 vanished", n)
        b.append(a * n / an2 - b[n - 1] + n - beta_r)
        if n == N:
            break
        dn = b[n] - n
        num = a * dn * (dn + beta_r - 1)
        if not _near(an2, a, ctx, a):
            a_sq.append(a + num / (an2 - a))
        elif _near(num, 0, ctx, a):
            # removable 0/0: take a_{n+1}^2 from n a (b_n - b_{n-1} - 1) = a_n^2 (a_{n-1}^2 - a_{n+1}^2)
            a_sq.append(a_sq[n - 1] - n * a * (b[n] - b[n - 1] - 1) / an2)
        else:
            raise SingularityError("a_n^2 hit a", n)
    out = CoeffSeq(a_sq, b)
    _warn_positivity(out, beta_r)
    return out


def meixner_iterate(a, beta, gamma, b0, N: int, ctx: PrecisionContext) -> tuple[UVSeq, CoeffSeq]:
    """Run the (u, v) system for the generalized Meixner coefficients."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if gamma == beta:
        raise DegenerateError(
            "gamma = beta gives the classical Charlier weight a^x/Gamma(x+1): "
            "use the closed form a_n^2 = n a, b_n = n + a")
    if gamma == 1:
        raise DegenerateError("gamma = 1 is excluded by the substitution (division by gamma - 1)")
    mp = ctx.mp
    a = ctx.real(a)
    beta_r = ctx.real(beta)
    g = ctx.real(gamma)
    b0 = ctx.real(b0)
    g1 = g - 1
    kappa = a * (g - beta_r) / g1

    def rhs1(v):
        return g1 / (a * a) * v * (v - a) * (v - kappa)

    def rhs2(u, n):
        pole = a * n / g1
        if _near(u, pole, ctx, pole):
            raise SingularityError("u_n hit a n/(gamma-1)", n)
        return u / (u - pole) * (u + a) * (u + kappa)

    u = [mp.zero]
    v = [a / g1 * (g - beta_r + a - b0)]
    scale = max(1, abs(a))
    for n in range(0, N + 1):
        if n > 0:
            s = u[n] + v[n - 1]
            if _near(s, 0, ctx, scale):
                raise SingularityError("u_n + v_{n-1} vanished", n)
            v.append(rhs2(u[n], n) / s - u[n])
        s = u[n] + v[n]
        if _near(s, 0, ctx, scale):
            raise SingularityError("u_n + v_n vanished", n)
        u.append(rhs1(v[n]) / s - v[n])

    a_sq = [n * a - g1 * u[n] for n in range(N + 1)]
    b = [n + g - beta_r + a - g1 * v[n] / a for n in range(N + 1)]
    a_sq[0] = mp.zero
    out = CoeffSeq(a_sq, b)
    _warn_positivity(out, beta_r)
    return UVSeq(u, v), out


def dp2_reduce(a, b0, N: int, ctx: PrecisionContext) -> DP2Seq:
    """beta = 1: rewrite the Charlier orbit as a discrete Painleve II orbit c_n.

    With a_n^2 = a(1 - c_n^2) the second equation becomes
    (a_{n+1}^2 - a)(a_n^2 - a) = a (b_n - n)^2, so b_n = n + sqrt(a) c_n c_{n+1},
    and the first equation turns into
    sqrt(a) (c_{n+1} + c_{n-1}) = n c_n / (1 - c_n^2).
    The sign of c_{n+1} follows the sign of (b_n - n)/c_n, starting from c_0 = 1.
    ``residuals[n-1]`` is the dP-II residual for n = 1..N-1 and
    ``product_residuals[n]`` is b_n - n - sqrt(a) c_n c_{n+1}.
    """
    mp = ctx.mp
    ar = ctx.real(a)
    sa = mp.sqrt(ar)
    coeffs = charlier_iterate(a, 1, b0, N, ctx)
    c = [mp.mpf(1)]
    for n in range(1, N + 1):
        ratio = 1 - coeffs.a_sq[n] / ar
        if not ratio > 0:
            raise SingularityError("a_n^2 >= a leaves no real c_n", n)
        sign = mp.sign((coeffs.b[n - 1] - (n - 1)) / c[n - 1])
        c.append((sign if sign != 0 else 1) * mp.sqrt(ratio))
    residuals = [sa * (c[n + 1] + c[n - 1]) - n * c[n] / (1 - c[n] ** 2) for n in range(1, N)]
    products = [coeffs.b[n] - n - sa * c[n] * c[n + 1] for n in range(N)]
    return DP2Seq(c, residuals, products)


def beta_half_closed_form(a, n: int, ctx: PrecisionContext | None = None) -> tuple[Real, Real]:
    """(a_n^2, b_n) = (n sqrt(a)/2, n/2 + sqrt(a)) for beta = 1/2, t = 1."""
    ctx = ctx or PrecisionContext(60)
    sa = ctx.mp.sqrt(ctx.real(a))
    return n * sa / 2, ctx.mp.mpf(n) / 2 + sa


@dataclass
class Comparison:
    max_abs_da_sq: Real
    max_abs_db: Real
    argmax_a_sq: int
    argmax_b: int
    diffs: list

    def first_divergence(self, tol) -> int | None:
        """Smallest n with |da_sq| or |db| above tol."""
        if self.diffs:
            tol = like(self.diffs[0][0], tol)
        for n, (da, db) in enumerate(self.diffs):
            if da > tol or db > tol:
                return n
        return None


def compare_coeffs(x: CoeffSeq, y: CoeffSeq) -> Comparison:
    """Elementwise maximum absolute differences between two coefficient sequences."""
    if len(x.b) != len(y.b) or len(x.a_sq) != len(y.a_sq):
        raise LengthError(f"lengths differ: {len(x.b)} vs {len(y.b)}")
    diffs = [(abs(p - q), abs(r - s)) for p, q, r, s in zip(x.a_sq, y.a_sq, x.b, y.b)]
    da = [d[0] for d in diffs]
    db = [d[1] for d in diffs]
    ia = max(range(len(da)), key=da.__getitem__)
    ib = max(range(len(db)), key=db.__getitem__)
    return Comparison(da[ia], db[ib], ia, ib, diffs)


# -- identity residuals on a computed orbit ------------------------------------

def charlier_identity_residuals(coeffs: CoeffSeq, a, beta, ctx: PrecisionContext) -> dict:
    """Residuals of the Charlier identity chain on a coefficient sequence.

    Keys: ``first_moment`` (scalar), ``b_step``, ``a_sq_step``, ``linear`` and
    ``first_integral`` (lists in n).
    """
    a = ctx.real(a)
    beta = ctx.real(beta)
    A, B = coeffs.a_sq, coeffs.b
    d = coeffs.d
    N = coeffs.N
    out = {"first_moment": A[1] * (B[1] + B[0] + beta - 1) - a}
    out["b_step"] = [B[n] + B[n - 1] - n + beta - a * n / A[n] for n in range(1, N + 1)]
    out["a_sq_step"] = [(A[n + 1] - a) * (A[n] - a) - a * d[n] * (d[n] + beta - 1) for n in range(N)]
    out["linear"] = [n * a * (B[n] - B[n - 1] - 1) - A[n] * (A[n - 1] - A[n + 1]) for n in range(1, N)]
    out["first_integral"] = [
        -d[n] ** 2 + d[0] ** 2 + A[n] * A[n + 1] / a - (beta - 1) * (d[n] - d[0])
        - (A[n + 1] + A[n] - A[1])
        for n in range(N)
    ]
    return out


def meixner_uv_residuals(uv: UVSeq, a, beta, gamma, ctx: PrecisionContext) -> dict:
    """Residuals of the two (u, v) equations, both multiplied out (no division)."""
    a = ctx.real(a)
    beta = ctx.real(beta)
    g = ctx.real(gamma)
    g1 = g - 1
    kappa = a * (g - beta) / g1
    u, v = uv.u, uv.v
    N = len(v) - 1
    r1 = [(u[n] + v[n]) * (u[n + 1] + v[n]) - g1 / a**2 * v[n] * (v[n] - a) * (v[n] - kappa)
          for n in range(N + 1)]
    r2 = [(u[n] + v[n]) * (u[n] + v[n - 1]) * (u[n] - a * n / g1)
          - u[n] * (u[n] + a) * (u[n] + kappa) for n in range(1, N + 1)]
    return {"u_step": r1, "v_step": r2}


def meixner_chain_residuals(coeffs: CoeffSeq, uv: UVSeq, a, beta, gamma, ctx) -> dict:
    """Coefficient identities expressed through t_n = (g-1)u_n/(g-b), T_n = (g-1)v_n/(a(g-b))."""
    a = ctx.real(a)
    beta = ctx.real(beta)
    g = ctx.real(gamma)
    gb = g - beta
    N = coeffs.N
    t = [(g - 1) * uv.u[n] / gb for n in range(N + 2)]
    T = [(g - 1) * uv.v[n] / (a * gb) for n in range(N + 1)]
    A, B = coeffs.a_sq, coeffs.b
    return {
        "b_from_T": [B[n] - (g - gb * T[n] + a + n - beta) for n in range(N + 1)],
        "a_sq_from_t": [A[n] - (n * a - gb * t[n]) for n in range(N + 1)],
        "a_sq_step_from_t": [A[n + 1] - A[n] - (gb * (t[n] - t[n + 1]) + a) for n in range(N)],
    }


# -- adaptive precision ----------------------------------------------------------

@dataclass(frozen=True)
class PrecisionPolicy:
    """digits = base_digits + digits_per_index * N, certified against a run at twice that."""

    base_digits: int = 60
    digits_per_index: int = 12
    tol: Fraction = Fraction(1, 10**20)

    def digits_for(self, N: int) -> int:
        return max(30, self.base_digits + self.digits_per_index * N)


@dataclass
class PainleveRun:
    params: FamilyParams
    lattice: LatticeSpec
    coeffs: CoeffSeq
    check: CoeffSeq
    ctx: PrecisionContext
    b0: Real
    uv: UVSeq | None
    certified_upto: int
    max_disagreement: Real

    @property
    def N(self) -> int:
        return self.coeffs.N

    @property
    def certified(self) -> bool:
        return self.certified_upto == self.N

    def agreement_digits(self) -> int:
        """Significant digits on which the run and its doubled-precision check agree."""
        worst = self.ctx.mp.zero
        for x, y in zip(self.coeffs.a_sq + self.coeffs.b, self.check.a_sq + self.check.b):
            scale = max(abs(y), 1)
            worst = max(worst, abs(x - y) / scale)
        if worst == 0:
            return self.ctx.digits
        return max(1, min(self.ctx.digits, int(-mpmath.log10(worst))))


def iterate(params: FamilyParams, lattice: LatticeSpec, N: int, ctx: PrecisionContext,
            b0_shift=0) -> tuple[CoeffSeq, UVSeq | None, Real]:
    """One Painleve run seeded by the closed-form b_0 (optionally perturbed)."""
    b0 = b0_initial(params, lattice, ctx) + ctx.real(b0_shift)
    if params.is_meixner:
        uv, coeffs = meixner_iterate(params.a, params.beta, params.gamma, b0, N, ctx)
        return coeffs, uv, b0
    return charlier_iterate(params.a, params.beta, b0, N, ctx), None, b0


def certified_iterate(params: FamilyParams, lattice: LatticeSpec, N: int,
                      policy: PrecisionPolicy = PrecisionPolicy(), digits: int | None = None,
                      b0_shift=0, tail_eps=None) -> PainleveRun:
    """Run at the policy's digits and again at twice the digits; record agreement."""
    params.validate(lattice)
    ctx = PrecisionContext(digits or policy.digits_for(N), tail_eps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PositivityWarning)
        check, _, _ = iterate(params, lattice, N, ctx.doubled(), b0_shift)
    coeffs, uv, b0 = iterate(params, lattice, N, ctx, b0_shift)
    tol = ctx.real(policy.tol)
    comparison = compare_coeffs(coeffs, check)
    first_bad = comparison.first_divergence(tol)
    upto = N if first_bad is None else first_bad - 1
    worst = max(comparison.max_abs_da_sq, comparison.max_abs_db)
    return PainleveRun(params, lattice, coeffs, check, ctx, b0, uv, upto, worst)
