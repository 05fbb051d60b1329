"""Arbitrary-precision reals and the special functions Gamma, I_nu and 1F1.

Every value lives in the private ``mpmath`` context owned by a
:class:`PrecisionContext`, so contexts of different precision never share
mutable state.  Contexts carry ``GUARD_DIGITS`` extra digits on top of the
stated precision; the special functions below are summed with certified
ratio-test tail bounds and never truncate silently.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Rational

import mpmath

from .errors import PoleError, PrecisionError

GUARD_DIGITS = 15

Real = mpmath.mpf


def parse_rational(text) -> Fraction:
    """Parse ``'1/3'``, ``'0.25'``, ``'2'`` or a number into an exact Fraction.

    Decimals are converted exactly as written (``'0.1'`` is 1/10).
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, (int, Rational)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(str(text))
    s = str(text).strip()
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(parse_rational(num)) / Fraction(parse_rational(den))
    return Fraction(s)


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision plus the series-truncation policy.

    Parameters
    ----------
    digits : int
        Decimal digits the results are meant to be correct to (>= 30).
    tail_eps : Fraction, optional
        Relative truncation tolerance for series and measure tails.
        Defaults to ``10**-digits``.
    max_terms : int
        Hard cap on the number of series terms / lattice points.
    """

    digits: int
    tail_eps: Fraction | None = None
    max_terms: int = 200_000

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < 30:
            raise ValueError(f"digits must be an integer >= 30, got {self.digits}")
        if self.tail_eps is None:
            object.__setattr__(self, "tail_eps", Fraction(1, 10**self.digits))
        else:
            object.__setattr__(self, "tail_eps", parse_rational(self.tail_eps))
        if not 0 < self.tail_eps < 1:
            raise ValueError("tail_eps must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    @cached_property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        ctx = mpmath.MPContext()
        ctx.dps = self.digits + GUARD_DIGITS
        return ctx

    @cached_property
    def eps(self):
        """Tail tolerance as a Real of this context."""
        return self.real(self.tail_eps)

    def real(self, x) -> Real:
        """Convert an int, Fraction, rational string or mpf into this context."""
        if isinstance(x, str):
            x = parse_rational(x)
        if isinstance(x, Fraction):
            return self.mp.mpf(x.numerator) / x.denominator
        return self.mp.mpf(x)

    def doubled(self) -> "PrecisionContext":
        """Twice the digits and the square of the tail tolerance."""
        return PrecisionContext(2 * self.digits, self.tail_eps**2, self.max_terms)

    def tol(self, lost: int = 0) -> Real:
        """``10**-(digits - lost)`` as a Real."""
        return self.mp.mpf(10) ** (-(self.digits - lost))


def like(ref, x):
    """Convert an exact rational ``x`` into the mpmath context of ``ref``."""
    if isinstance(x, Fraction):
        return type(ref)(x.numerator) / x.denominator
    return type(ref)(x)


def is_nonpositive_integer(x) -> bool:
    if isinstance(x, str):
        x = parse_rational(x)
    if isinstance(x, Fraction):
        return x.denominator == 1 and x <= 0
    if isinstance(x, int):
        return x <= 0
    return x <= 0 and x == int(x)


def _as_int(x) -> int:
    if isinstance(x, str):
        x = parse_rational(x)
    return int(x) if isinstance(x, (int, Fraction)) else int(mpmath.nint(x))


# -- Bernoulli numbers ------------------------------------------------------

@lru_cache(maxsize=8)
def _tangent_numbers(n: int) -> tuple[int, ...]:
    # Brent-Harvey in-place recurrence, integer arithmetic only.
    t = [0] * (n + 1)
    if n >= 1:
        t[1] = 1
    for k in range(2, n + 1):
        t[k] = (k - 1) * t[k - 1]
    for k in range(2, n + 1):
        for j in range(k, n + 1):
            t[j] = (j - k) * t[j - 1] + (j - k + 2) * t[j]
    return tuple(t)


def bernoulli_even(k: int) -> Fraction:
    """Exact B_{2k} for k >= 1."""
    n = 64
    while n < k:
        n *= 2
    t = _tangent_numbers(n)[k]
    four = 4**k
    return Fraction((-1) ** (k - 1) * 2 * k * t, four * (four - 1))


# -- Gamma -------------------------------------------------------------------

def _log_gamma_large(w, ctx: PrecisionContext):
    """Stirling series for ln Gamma(w), w real and large.

    For real w > 0 the remainder is bounded by the first omitted term.
    """
    mp = ctx.mp
    s = (w - mp.mpf(0.5)) * mp.ln(w) - w + mp.ln(2 * mp.pi) / 2
    w2 = w * w
    wpow = w
    eps = ctx.eps
    for k in range(1, ctx.max_terms):
        b = bernoulli_even(k)
        term = mp.mpf(b.numerator) / (b.denominator * (2 * k) * (2 * k - 1)) / wpow
        if abs(term) < eps:
            return s
        s += term
        wpow *= w2
    raise PrecisionError("Stirling series did not reach tail_eps within max_terms")


def gamma(x, ctx: PrecisionContext) -> Real:
    """Gamma(x) for real x off the poles 0, -1, -2, ...

    Shifts the argument up to ``x + m >= 2*digits + 10`` and evaluates the
    Stirling series there, dividing out the product (x)(x+1)...(x+m-1).
    """
    if is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x}")
    mp = ctx.mp
    z = ctx.real(x)
    threshold = 2 * (ctx.digits + GUARD_DIGITS) + 10
    m = max(0, math.ceil(threshold - z))
    prod = mp.mpf(1)
    for j in range(m):
        prod *= z + j
    return mp.exp(_log_gamma_large(z + m, ctx)) / prod


def rgamma(x, ctx: PrecisionContext) -> Real:
    """1/Gamma(x), equal to zero at the poles."""
    if is_nonpositive_integer(x):
        return ctx.mp.zero
    return 1 / gamma(x, ctx)


def pochhammer(x, k: int, ctx: PrecisionContext) -> Real:
    """Rising factorial (x)_k = x (x+1) ... (x+k-1)."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    z = ctx.real(x)
    out = ctx.mp.mpf(1)
    for j in range(k):
        out *= z + j
    return out


# -- Modified Bessel I_nu ----------------------------------------------------

def bessel_i(nu, z, ctx: PrecisionContext) -> Real:
    """I_nu(z) = sum_k (z/2)^(2k+nu) / (k! Gamma(k+nu+1)) for z >= 0.

    Terms whose Gamma argument is a nonpositive integer vanish, so
    I_{-m} = I_m for integer m.
    """
    mp = ctx.mp
    nu_r = ctx.real(nu)
    zr = ctx.real(z)
    if zr < 0:
        raise ValueError("bessel_i requires z >= 0")
    k0 = -_as_int(nu) if is_nonpositive_integer(nu) else 0
    if zr == 0:
        if nu_r == 0:
            return mp.mpf(1)
        if nu_r > 0 or k0 > 0:
            return mp.zero
        raise PoleError(f"I_nu(0) is unbounded for nu={nu}")
    h = zr / 2
    h2 = h * h
    term = mp.power(h, 2 * k0 + nu_r) * rgamma(k0 + 1, ctx) * rgamma(nu_r + k0 + 1, ctx)
    total = term
    eps = ctx.eps
    k = k0
    while k - k0 < ctx.max_terms:
        denom = (k + 1) * (k + nu_r + 1)
        if denom > 0:
            r = h2 / denom
            # r bounds every later ratio once k + nu + 1 > 0
            if r < 0.5 and abs(term) * r / (1 - r) <= eps * abs(total):
                return total
        term = term * h2 / denom
        total += term
        k += 1
    raise PrecisionError(f"I_{nu}({z}) did not converge within {ctx.max_terms} terms")


# -- Confluent hypergeometric M(p, q, z) ---------------------------------------

def _kummer_tail_ok(term, total, p, q, z, k, eps) -> bool:
    if k + 1 <= -p or k + q <= 0:
        return False
    ratio_cap = max(1, (p + k) / (q + k)) if p + k > 0 else 1
    r = abs(z) * ratio_cap / (k + 1)
    return r < 0.5 and abs(term) * r / (1 - r) <= eps * abs(total)


def _kummer_sum(p, q, zr, term, k, ctx: PrecisionContext):
    total = term
    eps = ctx.eps
    start = k
    while k - start < ctx.max_terms:
        if term == 0:
            return total
        if _kummer_tail_ok(term, total, p, q, zr, k, eps):
            return total
        term = term * (p + k) * zr / ((q + k) * (k + 1))
        total += term
        k += 1
    raise PrecisionError(f"M({p},{q},{zr}) did not converge within {ctx.max_terms} terms")


def kummer_m(p, q, z, ctx: PrecisionContext) -> Real:
    """Kummer's M(p, q, z) = sum_k (p)_k / ((q)_k k!) z^k."""
    pr, qr, zr = ctx.real(p), ctx.real(q), ctx.real(z)
    if is_nonpositive_integer(q):
        m = -_as_int(q)
        if not (is_nonpositive_integer(p) and -_as_int(p) < m):
            raise PoleError(f"M(p, q, z) has a pole at q={q}")
    return _kummer_sum(pr, qr, zr, ctx.mp.mpf(1), 0, ctx)


def kummer_m_regularized(p, q, z, ctx: PrecisionContext) -> Real:
    """M(p, q, z) / Gamma(q), finite for every q."""
    pr, qr, zr = ctx.real(p), ctx.real(q), ctx.real(z)
    if not is_nonpositive_integer(q):
        return _kummer_sum(pr, qr, zr, rgamma(qr, ctx), 0, ctx)
    k0 = 1 - _as_int(q)
    # first surviving term (p)_k0 z^k0 / k0!  (Gamma(q + k0) = Gamma(1) = 1)
    term = pochhammer(pr, k0, ctx) * ctx.mp.power(zr, k0) * rgamma(k0 + 1, ctx)
    if term == 0:
        return term
    return _kummer_sum(pr, qr, zr, term, k0, ctx)
