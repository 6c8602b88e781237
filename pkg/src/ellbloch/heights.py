"""Local Neron heights and the canonical height.

Normalization: ``h(2P) = 4 h(P)`` and ``h(P) - (1/2) log H(x(P))`` bounded,
where ``H(a/b) = max(|a|, |b|)``.  With this choice a point with
``v_p(x) = -2m`` at a prime of good reduction contributes ``m log p``.

The archimedean function is the weight-0 Neron function (model independent)
shifted by ``log|Delta_min| / 12``, so that the non-archimedean terms need no
discriminant correction and are plain rationals times ``log p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

from .analytic import PeriodLattice, PrecisionCtx, _center, elliptic_log, periods
from .curve import (
    CurvePoint,
    RationalCurve,
    add_points,
    bad_primes,
    local_data,
    minimal_discriminant_log_factors,
    scalar_mul,
    sub_points,
    valuation,
)
from .errors import NonMinimalModelError, PointNotOnCurveError
from .numfmt import mp_to_str


@dataclass
class LocalHeightTable:
    archimedean: mpf
    nonarch: dict = field(default_factory=dict)  # p -> Fraction, value r_p log p
    prec_bits: int = 192

    def total(self) -> mpf:
        with mp.workprec(self.prec_bits + 32):
            s = self.archimedean
            for p in sorted(self.nonarch):
                r = self.nonarch[p]
                s += mpf(r.numerator) / r.denominator * mpmath.log(p)
            return s

    def value(self, place):
        """h_v at ``place`` ("inf" or a prime)."""
        if place in ("inf", "oo", None, 0):
            return self.archimedean
        r = self.nonarch.get(int(place), Fraction(0))
        with mp.workprec(self.prec_bits + 32):
            return mpf(r.numerator) / r.denominator * mpmath.log(int(place))

    def to_json(self):
        return {
            "arch": mp_to_str(self.archimedean, self.prec_bits),
            "nonarch": [{"p": p, "r": str(r)} for p, r in sorted(self.nonarch.items()) if r != 0],
        }

    @classmethod
    def from_json(cls, obj, prec_bits: int = 192):
        with mp.workprec(prec_bits + 8):
            arch = mpf(obj["arch"])
        return cls(arch, {int(e["p"]): Fraction(e["r"]) for e in obj["nonarch"]}, prec_bits)


def _b2poly(t):
    return t * t - t + mpf(1) / 6


def _discriminant_abs_log(C: RationalCurve):
    # log|Delta_min|
    s = mpf(0)
    for p, v in sorted(minimal_discriminant_log_factors(C).items()):
        s += v * mpmath.log(p)
    return s


def arch_height(C: RationalCurve, L: PeriodLattice, P: CurvePoint, ctx: PrecisionCtx):
    """lambda_inf(P) in the normalization described in the module docstring."""
    if P.is_infinity:
        raise PointNotOnCurveError("archimedean height needs an affine point")
    z = elliptic_log(C, L, P, ctx).z
    with mp.workprec(ctx.work_bits):
        w1, w2 = L.reduced
        tau = w1 / w2
        u = _center(z, L) / w2
        q = mpmath.expjpi(2 * tau)
        w = mpmath.expjpi(2 * u)
        lq = mpmath.log(abs(q))  # = -2 pi Im tau
        val = -_b2poly(u.imag / tau.imag) * lq / 2 - mpmath.log(abs(1 - w))
        # geometric tail: each factor is 1 + O(|q|^n |w|^{+-1}), |w|^{+-1} <= |q|^{-1/2}
        aq = abs(q)
        n = 1
        qn = mpf(1)
        eps = ctx.tol / 16
        while True:
            qn *= q
            a, b = qn * w, qn / w
            val -= mpmath.log(abs(1 - a)) + mpmath.log(abs(1 - b))
            tail = 4 * aq ** (n + mpf(0.5)) / (1 - aq)
            if tail < eps:
                break
            n += 1
        val += _discriminant_abs_log(C) / 12
    with mp.workprec(ctx.prec_bits):
        return +val


def nonarch_height(C: RationalCurve, p: int, P: CurvePoint) -> Fraction:
    """Exact ``r_p`` with ``lambda_p(P) = r_p log p``; ``C`` must be p-minimal."""
    d = local_data(C, p)
    integral = all(valuation(a, p) >= 0 for a in C.ainvs)
    if not integral or valuation(C.discriminant, p) != d.v_disc:
        raise NonMinimalModelError(f"model is not minimal at {p}")
    return _nonarch_minimal(C, p, P, d.v_disc, d.v_c4)


def _nonarch_minimal(C: RationalCurve, p: int, P: CurvePoint, N: int, vc4) -> Fraction:
    if not C.contains(P):
        raise PointNotOnCurveError(f"{P} not on curve")
    if P.is_infinity:
        return Fraction(0)
    a1, a2, a3, a4, a6 = C.ainvs
    b2, b4, b6, b8 = C.b_invariants
    x, y = P.x, P.y
    A = valuation(3 * x * x + 2 * a2 * x + a4 - a1 * y, p)
    B = valuation(2 * y + a1 * x + a3, p)
    if A <= 0 or B <= 0:
        vx = valuation(x, p)
        return max(Fraction(0), Fraction(-vx, 2)) if vx != math.inf else Fraction(0)
    Cv = valuation(3 * x ** 4 + b2 * x ** 3 + 3 * b4 * x * x + 3 * b6 * x + b8, p)
    if vc4 == 0:
        M = min(Fraction(B), Fraction(N, 2))
        return -M * (N - M) / (2 * N)
    if Cv >= 3 * B:
        return Fraction(-B, 3)
    return Fraction(-Cv, 8)


def place_set(C: RationalCurve, points) -> list[int]:
    """Primes where some h_p may be non-zero: bad primes and x-denominators."""
    ps = set(bad_primes(C))
    import sympy

    for P in points:
        if not P.is_infinity and P.x.denominator > 1:
            ps |= set(int(q) for q in sympy.factorint(P.x.denominator))
    return sorted(ps)


def local_heights(C: RationalCurve, P: CurvePoint, ctx: PrecisionCtx, L: PeriodLattice | None = None) -> LocalHeightTable:
    if not C.contains(P):
        raise PointNotOnCurveError(f"{P} not on {C.key()}")
    if P.is_infinity:
        return LocalHeightTable(mpf(0), {}, ctx.prec_bits)
    L = L or periods(C, ctx)
    arch = arch_height(C, L, P, ctx)
    nonarch = {}
    for p in place_set(C, [P]):
        d = local_data(C, p)
        r = _nonarch_minimal(d.curve, p, d.map_point(P), d.v_disc, d.v_c4)
        if r:
            nonarch[p] = r
    return LocalHeightTable(arch, nonarch, ctx.prec_bits)


def global_height(C: RationalCurve, P: CurvePoint, ctx: PrecisionCtx, L: PeriodLattice | None = None):
    """Canonical height as the sum of the local terms."""
    return local_heights(C, P, ctx, L).total()


def height_pairing(C, P, Q_, ctx, L=None):
    L = L or periods(C, ctx)
    with mp.workprec(ctx.work_bits):
        return (global_height(C, add_points(C, P, Q_), ctx, L) - global_height(C, P, ctx, L) - global_height(C, Q_, ctx, L)) / 2


# -- oracle -------------------------------------------------------------


def naive_height(x: Fraction, prec_bits: int = 192):
    """``(1/2) log max(|num|, |den|)``."""
    x = Fraction(x)
    H = max(abs(x.numerator), x.denominator)
    with mp.workprec(prec_bits + 32):
        return mpmath.log(H) / 2


def limit_height(C: RationalCurve, P: CurvePoint, n: int = 8, prec_bits: int = 192):
    """``4^-n h_naive(x(2^n P))``; exact arithmetic for the point, mp for the log."""
    Q_ = P
    for _ in range(n):
        Q_ = add_points(C, Q_, Q_)
        if Q_.is_infinity:
            return mpf(0)
    with mp.workprec(prec_bits + 32):
        return naive_height(Q_.x, prec_bits) / mpf(4) ** n
