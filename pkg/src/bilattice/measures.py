"""Generalized Charlier / Meixner weights on the lattice, shifted lattice and bi-lattice.

The weight functions are

    Charlier:  w(x) = Gamma(beta) a^x / (Gamma(beta+x) Gamma(x+1))
    Meixner:   w(x) = Gamma(beta) Gamma(gamma+x) a^x / (Gamma(gamma) Gamma(beta+x) Gamma(x+1))

placed on N (``plain``), on N + 1 - beta (``shifted``) or on both with the
mixture mu = mu_1 + t mu_2 (``bi``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .errors import DegenerateError, PoleError, PrecisionError, ValidityError
from .precision import (
    PrecisionContext,
    Real,
    bessel_i,
    gamma as gamma_fn,
    is_nonpositive_integer,
    kummer_m,
    kummer_m_regularized,
    parse_rational,
    rgamma,
)

INF = math.inf


class Family(str, Enum):
    CHARLIER = "charlier"
    MEIXNER = "meixner"


class LatticeKind(str, Enum):
    PLAIN = "plain"
    SHIFTED = "shifted"
    BI = "bi"


@dataclass(frozen=True)
class FamilyParams:
    """Exact-rational parameters of a generalized Charlier or Meixner weight."""

    family: Family
    a: Fraction
    beta: Fraction
    gamma: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "a", parse_rational(self.a))
        object.__setattr__(self, "beta", parse_rational(self.beta))
        if self.family is Family.MEIXNER:
            if self.gamma is None:
                raise ValidityError("Meixner weight needs gamma")
            object.__setattr__(self, "gamma", parse_rational(self.gamma))
        elif self.gamma is not None:
            raise ValidityError("Charlier weight takes no gamma")
        if self.a <= 0:
            raise ValidityError(f"a must be positive, got {self.a}")

    @classmethod
    def charlier(cls, a, beta) -> "FamilyParams":
        return cls(Family.CHARLIER, a, beta)

    @classmethod
    def meixner(cls, a, beta, gamma) -> "FamilyParams":
        return cls(Family.MEIXNER, a, beta, gamma)

    @property
    def is_meixner(self) -> bool:
        return self.family is Family.MEIXNER

    def shifted_equivalent(self) -> "FamilyParams":
        """Parameters whose plain-lattice weight is proportional to this weight on N+1-beta."""
        if self.is_meixner:
            return FamilyParams.meixner(self.a, 2 - self.beta, self.gamma + 1 - self.beta)
        return FamilyParams.charlier(self.a, 2 - self.beta)

    def validate(self, lattice: "LatticeSpec") -> None:
        """Raise ValidityError unless the measure on ``lattice`` is positive."""
        beta, gam = self.beta, self.gamma
        kind = lattice.kind
        if kind is LatticeKind.PLAIN or (kind is LatticeKind.BI and lattice.t == 0):
            if beta <= 0 or (self.is_meixner and gam <= 0):
                raise ValidityError("plain lattice needs beta > 0 (and gamma > 0)")
        if kind is LatticeKind.SHIFTED or (kind is LatticeKind.BI and lattice.t == INF):
            if beta >= 2 or (self.is_meixner and gam <= beta - 1):
                raise ValidityError("shifted lattice needs beta < 2 (and gamma > beta - 1)")
            # Gamma(beta) and Gamma(gamma) enter the normalization
            if _sign_gamma(beta) <= 0 or (self.is_meixner and _sign_gamma(gam) <= 0):
                raise ValidityError("shifted-lattice weights are not positive for these parameters")
        if kind is LatticeKind.BI:
            if not 0 < beta < 2:
                raise ValidityError("bi-lattice needs 0 < beta < 2")
            if self.is_meixner and not gam > max(0, beta - 1):
                raise ValidityError("bi-lattice needs gamma > max(0, beta - 1)")


def _sign_gamma(x: Fraction) -> int:
    if is_nonpositive_integer(x):
        return 0
    if x > 0:
        return 1
    return -1 if math.floor(x) % 2 else 1


@dataclass(frozen=True)
class LatticeSpec:
    kind: LatticeKind
    t: Fraction | float = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "kind", LatticeKind(self.kind))
        t = self.t
        if not (isinstance(t, float) and t == INF):
            t = parse_rational(t)
            if t < 0:
                raise ValidityError("t must be nonnegative")
        object.__setattr__(self, "t", t)

    @classmethod
    def plain(cls) -> "LatticeSpec":
        return cls(LatticeKind.PLAIN)

    @classmethod
    def shifted(cls) -> "LatticeSpec":
        return cls(LatticeKind.SHIFTED)

    @classmethod
    def bi(cls, t) -> "LatticeSpec":
        if isinstance(t, str) and t.strip().lower() in ("inf", "infinity", "oo", "∞"):
            t = INF
        return cls(LatticeKind.BI, t)

    def components(self) -> tuple[bool, bool]:
        """Whether the N part and the N+1-beta part carry mass."""
        if self.kind is LatticeKind.PLAIN:
            return True, False
        if self.kind is LatticeKind.SHIFTED:
            return False, True
        return self.t != INF, self.t != 0


@dataclass(frozen=True)
class DiscreteMeasure:
    """Truncated discrete measure with a certified bound on the omitted part.

    ``tail_bound`` bounds sum over omitted points of w_k (1 + |x_k|)^max_order,
    hence the omitted contribution to any moment of order <= max_order.
    """

    points: tuple
    weights: tuple
    tail_bound: Real
    max_order: int
    params: FamilyParams
    lattice: LatticeSpec
    ctx: PrecisionContext

    def __len__(self):
        return len(self.points)


def weight_at(params: FamilyParams, x, ctx: PrecisionContext) -> Real:
    """Evaluate the weight function at real x (exact zero on its zero set)."""
    mp = ctx.mp
    # gamma == beta cancels Gamma(beta+x) against Gamma(gamma+x)
    reduced = params.is_meixner and params.gamma == params.beta
    if isinstance(x, (int, Fraction, str)):
        xq = parse_rational(x)
        numerator_pole = (params.is_meixner and not reduced
                          and is_nonpositive_integer(xq + params.gamma))
        if numerator_pole:
            raise PoleError(f"Meixner weight has a pole at x={x}")
        if is_nonpositive_integer(xq + 1) or (
                not reduced and is_nonpositive_integer(xq + params.beta)):
            return mp.zero
    xr = ctx.real(x)
    beta = ctx.real(params.beta)
    if is_nonpositive_integer(xr + 1) or (not reduced and is_nonpositive_integer(xr + beta)):
        return mp.zero
    a = ctx.real(params.a)
    if reduced:
        return mp.power(a, xr) * rgamma(xr + 1, ctx)
    w = gamma_fn(beta, ctx) * mp.power(a, xr) * rgamma(beta + xr, ctx) * rgamma(xr + 1, ctx)
    if params.is_meixner:
        gam = ctx.real(params.gamma)
        if is_nonpositive_integer(gam + xr):
            raise PoleError(f"Meixner weight has a pole at x={x}")
        w *= gamma_fn(gam + xr, ctx) * rgamma(gam, ctx)
    return w


def _truncated_sublattice(params, x0: Fraction, w0: Real, max_order: int, eps, ctx):
    """Points x0, x0+1, ... with weights until the certified tail is below eps * mass."""
    mp = ctx.mp
    a = ctx.real(params.a)
    beta = ctx.real(params.beta)
    gam = ctx.real(params.gamma) if params.is_meixner else None
    points, weights = [], []
    w = w0
    mass = mp.zero
    x = ctx.real(x0)
    xq = x0
    for _ in range(ctx.max_terms):
        points.append(xq)
        weights.append(w)
        mass += w
        if x + 1 > 0 and beta + x > 0 and (gam is None or gam + x > 0):
            lead = a / (x + 1)
            if gam is not None:
                lead *= max(1, (gam + x) / (beta + x))
            else:
                lead /= beta + x
            growth = ((2 + abs(x)) / (1 + abs(x))) ** max_order
            r = lead * growth
            if r < 0.5:
                tail = w * (1 + abs(x)) ** max_order * r / (1 - r)
                if tail <= eps * mass:
                    return points, weights, tail
        w = w * _weight_ratio_r(a, beta, gam, x)
        x += 1
        xq += 1
    raise PrecisionError("measure truncation exceeded max_terms points")


def _weight_ratio_r(a, beta, gam, x):
    r = a / ((beta + x) * (x + 1))
    if gam is not None:
        r *= gam + x
    return r


def shifted_base_weight(params: FamilyParams, ctx: PrecisionContext) -> Real:
    """w(1 - beta), the first weight on N + 1 - beta."""
    return weight_at(params, 1 - params.beta, ctx)


def build_measure(params: FamilyParams, lattice: LatticeSpec, ctx: PrecisionContext,
                  max_order: int = 64) -> DiscreteMeasure:
    """Truncated measure on the requested lattice, certified for moments up to ``max_order``.

    Coincident points (beta = 1 on the bi-lattice) are merged with summed weights.
    """
    params.validate(lattice)
    use_plain, use_shift = lattice.components()
    t = lattice.t
    eps = ctx.eps / 2
    parts = []
    if use_plain:
        parts.append(_truncated_sublattice(params, Fraction(0), ctx.mp.mpf(1), max_order, eps, ctx))
    if use_shift:
        w0 = shifted_base_weight(params, ctx)
        if lattice.kind is LatticeKind.BI:
            w0 = w0 * ctx.real(t)
        parts.append(_truncated_sublattice(params, 1 - params.beta, w0, max_order, eps, ctx))

    merged: dict[Fraction, Real] = {}
    for pts, wts, _ in parts:
        for p, w in zip(pts, wts):
            merged[p] = merged[p] + w if p in merged else w
    keys = sorted(merged)
    tail = sum((p[2] for p in parts), ctx.mp.zero)
    return DiscreteMeasure(
        points=tuple(ctx.real(k) for k in keys),
        weights=tuple(merged[k] for k in keys),
        tail_bound=tail,
        max_order=max_order,
        params=params,
        lattice=lattice,
        ctx=ctx,
    )


def moment(measure: DiscreteMeasure, j: int) -> Real:
    """j-th moment over the truncated support (within ``tail_bound`` of the true value)."""
    if not 0 <= j <= measure.max_order:
        raise ValueError(f"moment order {j} exceeds the certified order {measure.max_order}")
    mp = measure.ctx.mp
    return mp.fsum(w * x**j for x, w in zip(measure.points, measure.weights))


# -- closed forms ------------------------------------------------------------

def _plain_moments(params: FamilyParams, ctx: PrecisionContext):
    a = ctx.real(params.a)
    beta = params.beta
    if params.is_meixner:
        gam = params.gamma
        m0 = kummer_m(gam, beta, a, ctx)
        m1 = ctx.real(gam) * a / ctx.real(beta) * kummer_m(gam + 1, beta + 1, a, ctx)
        return m0, m1
    mp = ctx.mp
    sa = mp.sqrt(a)
    g = gamma_fn(beta, ctx)
    br = ctx.real(beta)
    m0 = g * mp.power(sa, 1 - br) * bessel_i(beta - 1, 2 * sa, ctx)
    m1 = g * mp.power(sa, 2 - br) * bessel_i(beta, 2 * sa, ctx)
    return m0, m1


def _shifted_moments(params: FamilyParams, ctx: PrecisionContext):
    mp = ctx.mp
    a = ctx.real(params.a)
    beta = params.beta
    br = ctx.real(beta)
    if params.is_meixner:
        gam = params.gamma
        pre = (gamma_fn(beta, ctx) * gamma_fn(gam - beta + 1, ctx) * rgamma(gam, ctx)
               * mp.power(a, 1 - br))
        m0 = pre * rgamma(2 - beta, ctx) * kummer_m(gam - beta + 1, 2 - beta, a, ctx)
        # M(., 1-beta, a)/Gamma(1-beta) stays finite at beta = 1
        m1 = pre * kummer_m_regularized(gam - beta + 1, 1 - beta, a, ctx)
        return m0, m1
    sa = mp.sqrt(a)
    g = gamma_fn(beta, ctx)
    m0 = g * mp.power(sa, 1 - br) * bessel_i(1 - beta, 2 * sa, ctx)
    m1 = g * mp.power(sa, 2 - br) * bessel_i(-beta, 2 * sa, ctx)
    return m0, m1


def closed_moments(params: FamilyParams, lattice: LatticeSpec, ctx: PrecisionContext):
    """(m0, m1) from the Bessel / Kummer closed forms; bi-lattice mixes as m + t*m_hat."""
    params.validate(lattice)
    if lattice.kind is LatticeKind.PLAIN:
        return _plain_moments(params, ctx)
    if lattice.kind is LatticeKind.SHIFTED:
        return _shifted_moments(params, ctx)
    t = lattice.t
    if t == INF:
        return _shifted_moments(params, ctx)
    m0, m1 = _plain_moments(params, ctx)
    if t == 0:
        return m0, m1
    h0, h1 = _shifted_moments(params, ctx)
    tr = ctx.real(t)
    return m0 + tr * h0, m1 + tr * h1


def _ratio(num, den, what):
    if den == 0:
        raise DegenerateError(f"denominator of {what} vanishes at working precision")
    return num / den


def b0_initial(params: FamilyParams, lattice: LatticeSpec, ctx: PrecisionContext) -> Real:
    """Closed-form initial value b_0 of the recurrence on the given lattice."""
    params.validate(lattice)
    mp = ctx.mp
    a = ctx.real(params.a)
    beta = params.beta
    kind, t = lattice.kind, lattice.t
    if kind is LatticeKind.BI and t == 0:
        kind = LatticeKind.PLAIN
    elif kind is LatticeKind.BI and t == INF:
        kind = LatticeKind.SHIFTED

    if params.is_meixner:
        gam = params.gamma
        if kind is LatticeKind.PLAIN:
            return ctx.real(gam) * a / ctx.real(beta) * _ratio(
                kummer_m(gam + 1, beta + 1, a, ctx), kummer_m(gam, beta, a, ctx), "b0")
        if kind is LatticeKind.SHIFTED:
            # (1-beta) M(g-b+1, 1-b, a) = Gamma(2-b) * M(g-b+1, 1-b, a)/Gamma(1-b)
            num = gamma_fn(2 - beta, ctx) * kummer_m_regularized(gam - beta + 1, 1 - beta, a, ctx)
            return _ratio(num, kummer_m(gam - beta + 1, 2 - beta, a, ctx), "b0_hat")
        m0, m1 = closed_moments(params, lattice, ctx)
        return _ratio(m1, m0, "b0_tilde")

    z = 2 * mp.sqrt(a)
    sa = mp.sqrt(a)
    if kind is LatticeKind.PLAIN:
        return sa * _ratio(bessel_i(beta, z, ctx), bessel_i(beta - 1, z, ctx), "b0")
    if kind is LatticeKind.SHIFTED:
        return sa * _ratio(bessel_i(-beta, z, ctx), bessel_i(1 - beta, z, ctx), "b0_hat")
    tr = ctx.real(t)
    num = bessel_i(beta, z, ctx) + tr * bessel_i(-beta, z, ctx)
    den = bessel_i(beta - 1, z, ctx) + tr * bessel_i(1 - beta, z, ctx)
    return sa * _ratio(num, den, "b0_tilde")


# -- functional identities -----------------------------------------------------

def pearson_residual(params: FamilyParams, x, ctx: PrecisionContext) -> Real:
    """w(x) - w(x-1) - (a - x(beta-1) - x^2)/a * w(x) for the Charlier weight."""
    if params.is_meixner:
        raise ValueError("the Pearson residual is defined for the Charlier weight")
    xq = parse_rational(x) if isinstance(x, (int, Fraction, str)) else x
    a = ctx.real(params.a)
    beta = ctx.real(params.beta)
    xr = ctx.real(xq)
    w = weight_at(params, xq, ctx)
    wm = weight_at(params, xq - 1, ctx)
    return w - wm - (a - xr * (beta - 1) - xr * xr) / a * w


def ladder_potential(params: FamilyParams, x, ctx: PrecisionContext) -> Real:
    """u(x) = -1 + w(x-1)/w(x) = -1 + x(x+beta-1) / (a(x+gamma-1))."""
    if not params.is_meixner:
        raise ValueError("the ladder potential is defined for the Meixner weight")
    xr = ctx.real(x)
    gam = ctx.real(params.gamma)
    if xr + gam - 1 == 0:
        raise PoleError(f"u has a pole at x = 1 - gamma = {x}")
    a = ctx.real(params.a)
    beta = ctx.real(params.beta)
    return -1 + xr * (xr + beta - 1) / (a * (xr + gam - 1))


def ladder_quotient(params: FamilyParams, x, ell, ctx: PrecisionContext) -> Real:
    """Closed form of (u(x+1) - u(ell)) / (x + 1 - ell)."""
    xr, lr = ctx.real(x), ctx.real(ell)
    a = ctx.real(params.a)
    beta = ctx.real(params.beta)
    gam = ctx.real(params.gamma)
    return (lr + (gam - 1) * (xr + beta) / (gam + xr)) / (a * (gam + lr - 1))
