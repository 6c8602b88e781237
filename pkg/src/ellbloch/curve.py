"""Exact arithmetic on elliptic curves over Q in long Weierstrass form.

Everything here uses :class:`fractions.Fraction`; no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Optional

import sympy

from .errors import NotPrimeError, PointNotOnCurveError

MAZUR_BOUND = 16  # largest possible torsion order over Q is 12; 16 leaves headroom


def Q(v) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot interpret {v!r} as a rational")


def valuation(v, p: int) -> int | float:
    """p-adic valuation of a rational; ``inf`` for zero."""
    v = Q(v)
    if v == 0:
        return float("inf")
    n, d, k = v.numerator, v.denominator, 0
    while n % p == 0:
        n //= p
        k += 1
    while d % p == 0:
        d //= p
        k -= 1
    return k


def frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


@dataclass(frozen=True)
class CurvePoint:
    """A point of E(Q); ``x is None`` encodes the zero section."""

    x: Optional[Fraction] = None
    y: Optional[Fraction] = None

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls()

    @classmethod
    def affine(cls, x, y) -> "CurvePoint":
        return cls(Q(x), Q(y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def to_json(self):
        if self.is_infinity:
            return "O"
        return {"x": frac_str(self.x), "y": frac_str(self.y)}

    @classmethod
    def from_json(cls, obj) -> "CurvePoint":
        if obj == "O" or obj is None:
            return cls()
        if isinstance(obj, (list, tuple)):
            return cls.affine(obj[0], obj[1])
        return cls.affine(obj["x"], obj["y"])

    def __repr__(self):
        if self.is_infinity:
            return "O"
        return f"({frac_str(self.x)}, {frac_str(self.y)})"


O = CurvePoint()


@dataclass(frozen=True)
class RationalCurve:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction
    label: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, Q(getattr(self, name)))
        if self.discriminant == 0:
            raise ValueError("singular Weierstrass equation (discriminant 0)")

    @classmethod
    def from_ainvs(cls, ainvs: Iterable, label: Optional[str] = None) -> "RationalCurve":
        a = list(ainvs)
        if len(a) != 5:
            raise ValueError("need exactly five Weierstrass coefficients")
        return cls(*a, label=label)

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def b_invariants(self) -> tuple:
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @cached_property
    def c_invariants(self) -> tuple:
        b2, b4, b6, _ = self.b_invariants
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    @cached_property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def to_json(self):
        out = {"a": [frac_str(a) for a in self.ainvs]}
        if self.label:
            out["label"] = self.label
        return out

    @classmethod
    def from_json(cls, obj) -> "RationalCurve":
        if isinstance(obj, str):
            return curve_by_label(obj)
        if "a" not in obj:
            if "label" in obj:
                return curve_by_label(obj["label"])
            raise ValueError("curve record needs an 'a' array")
        return cls.from_ainvs(obj["a"], obj.get("label"))

    def key(self) -> str:
        return "[" + ",".join(frac_str(a) for a in self.ainvs) + "]"

    # -- points -------------------------------------------------------

    def contains(self, P: CurvePoint) -> bool:
        if P.is_infinity:
            return True
        a1, a2, a3, a4, a6 = self.ainvs
        x, y = P.x, P.y
        return y * y + a1 * x * y + a3 * y == x ** 3 + a2 * x * x + a4 * x + a6

    def point(self, x, y) -> CurvePoint:
        P = CurvePoint.affine(x, y)
        if not self.contains(P):
            raise PointNotOnCurveError(f"{P} is not on {self.key()}")
        return P

    def lift_x(self, x) -> list[CurvePoint]:
        """Rational points with the given x-coordinate (0, 1 or 2 of them)."""
        a1, a2, a3, a4, a6 = self.ainvs
        x = Q(x)
        b = a1 * x + a3
        c = -(x ** 3 + a2 * x * x + a4 * x + a6)
        disc = b * b - 4 * c
        r = _rational_sqrt(disc)
        if r is None:
            return []
        ys = {(-b + r) / 2, (-b - r) / 2}
        return [CurvePoint(x, y) for y in sorted(ys)]

    def __str__(self):
        return self.label or self.key()


def _rational_sqrt(v: Fraction) -> Optional[Fraction]:
    if v < 0:
        return None
    from math import isqrt

    n, d = v.numerator, v.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _check(C: RationalCurve, *pts: CurvePoint):
    for P in pts:
        if not C.contains(P):
            raise PointNotOnCurveError(f"{P} is not on {C.key()}")


def negate(C: RationalCurve, P: CurvePoint) -> CurvePoint:
    _check(C, P)
    if P.is_infinity:
        return P
    return CurvePoint(P.x, -P.y - C.a1 * P.x - C.a3)


def _add(C: RationalCurve, P: CurvePoint, Q_: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return Q_
    if Q_.is_infinity:
        return P
    a1, a2, a3, a4, a6 = C.ainvs
    x1, y1, x2, y2 = P.x, P.y, Q_.x, Q_.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return O
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        nu = (-x1 ** 3 + a4 * x1 + 2 * a6 - a3 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
        nu = (y1 * x2 - y2 * x1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def add_points(C: RationalCurve, P: CurvePoint, Q_: CurvePoint) -> CurvePoint:
    """Chord-tangent sum ``P + Q`` on the long Weierstrass model."""
    _check(C, P, Q_)
    return _add(C, P, Q_)


def sub_points(C: RationalCurve, P: CurvePoint, Q_: CurvePoint) -> CurvePoint:
    return add_points(C, P, negate(C, Q_))


def scalar_mul(C: RationalCurve, n: int, P: CurvePoint) -> CurvePoint:
    _check(C, P)
    if n < 0:
        return scalar_mul(C, -n, negate(C, P))
    result, base = O, P
    while n:
        if n & 1:
            result = _add(C, result, base)
        base = _add(C, base, base)
        n >>= 1
    return result


def torsion_order(C: RationalCurve, P: CurvePoint, bound: int = MAZUR_BOUND) -> Optional[int]:
    """Least ``n <= bound`` with ``nP = O``; ``None`` means non-torsion.

    Over Q the default bound is complete by Mazur's theorem (orders are at
    most 12), so ``None`` is a proof of infinite order there.
    """
    _check(C, P)
    Qp = P
    for n in range(1, bound + 1):
        if Qp.is_infinity:
            return n
        Qp = _add(C, Qp, P)
    return None


def is_torsion(C: RationalCurve, P: CurvePoint) -> bool:
    return torsion_order(C, P) is not None


# -- disjointness -----------------------------------------------------


@dataclass(frozen=True)
class DPReport:
    meeting: dict  # (i, j) -> tuple of primes where s_i and s_j meet
    primes: tuple

    @property
    def holds(self) -> bool:
        return all(not v for v in self.meeting.values())

    def to_json(self):
        return {
            "holds": self.holds,
            "primes": list(self.primes),
            "pairs": [{"i": i, "j": j, "primes": list(ps)} for (i, j), ps in sorted(self.meeting.items())],
        }


def check_dp(C: RationalCurve, points: list[CurvePoint], primes: Iterable[int]) -> DPReport:
    """For each pair, the listed primes at which ``s - s'`` reduces to ``O``.

    ``s - s'`` meets the zero section mod p exactly when x(s - s') has a pole
    at p.  With an empty prime list (base = Spec Q) the report always holds.
    """
    _check(C, *points)
    primes = tuple(sorted(set(int(p) for p in primes)))
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i] == points[j]:
                raise ValueError("check_dp expects pairwise distinct points")
    meeting = {}
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            D = sub_points(C, points[i], points[j])
            meeting[(i, j)] = tuple(p for p in primes if valuation(D.x, p) < 0)
    return DPReport(meeting, primes)


# -- local data -------------------------------------------------------


@dataclass(frozen=True)
class LocalData:
    """p-minimal model at one prime and the change of coordinates to it.

    The model is ``x = u^2 x' + r``, ``y = u^3 y' + s u^2 x' + t``.
    """

    p: int
    curve: RationalCurve
    u: Fraction
    r: Fraction
    s: Fraction
    t: Fraction
    v_disc: int
    v_c4: int | float
    v_c6: int | float

    def map_point(self, P: CurvePoint) -> CurvePoint:
        if P.is_infinity:
            return P
        xp = (P.x - self.r) / self.u ** 2
        yp = (P.y - self.s * self.u ** 2 * xp - self.t) / self.u ** 3
        return CurvePoint(xp, yp)


def transform(C: RationalCurve, u, r, s, t) -> RationalCurve:
    """Model obtained by ``x = u^2 x' + r``, ``y = u^3 y' + s u^2 x' + t``."""
    u, r, s, t = Q(u), Q(r), Q(s), Q(t)
    a1, a2, a3, a4, a6 = C.ainvs
    a1p = (a1 + 2 * s) / u
    a2p = (a2 - s * a1 + 3 * r - s * s) / u ** 2
    a3p = (a3 + r * a1 + 2 * t) / u ** 3
    a4p = (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u ** 4
    a6p = (a6 + r * a4 + r * r * a2 + r ** 3 - t * a3 - t * t - r * t * a1) / u ** 6
    return RationalCurve(a1p, a2p, a3p, a4p, a6p, label=C.label)


def _compose(outer, inner):
    # inner: C -> C1 by (u1,r1,s1,t1), outer: C1 -> C2 by (u2,r2,s2,t2); returns C -> C2
    u1, r1, s1, t1 = inner
    u2, r2, s2, t2 = outer
    return (
        u1 * u2,
        r1 + u1 * u1 * r2,
        s1 + u1 * s2,
        t1 + u1 * u1 * s1 * r2 + u1 ** 3 * t2,
    )


def _is_p_integral(C: RationalCurve, p: int) -> bool:
    return all(valuation(a, p) >= 0 for a in C.ainvs)


def _reduction_step(C: RationalCurve, p: int):
    """(r, s, t) with the u = p transform integral, or None if C is p-minimal."""
    a1, a2, a3, a4, a6 = (int(a) for a in C.ainvs)  # C is p-integral here; denominators are p-units
    if p in (2, 3):
        for s in range(p):
            for r in range(p * p):
                for t in range(p ** 3):
                    cand = transform(C, p, r, s, t)
                    if _is_p_integral(cand, p):
                        return r, s, t
        return None
    c4, c6 = C.c_invariants
    if valuation(c4, p) < 4 or valuation(c6, p) < 6:
        return None
    m = p ** 6
    inv2, inv3 = pow(2, -1, m), pow(3, -1, m)
    s = (-a1 * inv2) % m
    r = (-(a2 - s * a1 - s * s) * inv3) % m
    t = (-(a3 + r * a1) * inv2) % m
    if _is_p_integral(transform(C, p, r, s, t), p):
        return r, s, t
    return None


def _integral_denominators(C: RationalCurve):
    out = []
    for a in C.ainvs:
        out.append(Q(a).denominator)
    return out


def local_data(C: RationalCurve, p: int) -> LocalData:
    """p-minimal model by a deterministic sequence of admissible changes."""
    p = int(p)
    if p < 2 or not sympy.isprime(p):
        raise NotPrimeError(f"{p} is not prime")
    total = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    cur = C
    # make p-integral: u = p^-k
    k = 0
    for i, a in zip((1, 2, 3, 4, 6), cur.ainvs):
        v = valuation(a, p)
        if v != float("inf") and v < 0:
            k = max(k, -(-(-v) // i))
    if k:
        step = (Fraction(1, p ** k), Fraction(0), Fraction(0), Fraction(0))
        cur = transform(cur, *step)
        total = _compose(step, total)
    D = _prime_to_p_denominator(cur, p)
    if D != 1:
        step = (Fraction(1, D), Fraction(0), Fraction(0), Fraction(0))
        cur = transform(cur, *step)
        total = _compose(step, total)
    while valuation(cur.discriminant, p) >= 12:
        rst = _reduction_step(cur, p)
        if rst is None:
            break
        step = (Fraction(p), Fraction(rst[0]), Fraction(rst[1]), Fraction(rst[2]))
        cur = transform(cur, *step)
        total = _compose(step, total)
    c4, c6 = cur.c_invariants
    return LocalData(
        p=p,
        curve=cur,
        u=total[0],
        r=total[1],
        s=total[2],
        t=total[3],
        v_disc=valuation(cur.discriminant, p),
        v_c4=valuation(c4, p),
        v_c6=valuation(c6, p),
    )


def _prime_to_p_denominator(C: RationalCurve, p: int) -> int:
    # u = 1/D clears the remaining denominators; D is a p-adic unit
    D = 1
    for d in _integral_denominators(C):
        D = D * d // gcd(D, d)
    while D % p == 0:
        D //= p
    return D


def bad_primes(C: RationalCurve) -> list[int]:
    d = C.discriminant
    ps = set(sympy.factorint(abs(d.numerator))) | set(sympy.factorint(d.denominator))
    return sorted(int(p) for p in ps)


def minimal_discriminant_log_factors(C: RationalCurve) -> dict[int, int]:
    """``{p: v_p(Delta_min)}`` over the primes of bad reduction."""
    out = {}
    for p in bad_primes(C):
        v = local_data(C, p).v_disc
        if v:
            out[p] = int(v)
    return out


# -- rational torsion -------------------------------------------------


def torsion_points(C: RationalCurve) -> list[CurvePoint]:
    """All rational torsion points (Nagell-Lutz on an integral short model)."""
    c4, c6 = C.c_invariants
    # y^2 = x^3 - 27 c4 x - 54 c6, scaled to integral coefficients
    A, B = -27 * c4, -54 * c6
    d = 1
    while (A * d ** 4).denominator != 1 or (B * d ** 6).denominator != 1:
        d += 1
    A, B = int(A * d ** 4), int(B * d ** 6)
    disc = abs(4 * A ** 3 + 27 * B ** 2)
    found = {O}
    ys = [0]
    fac = sympy.factorint(disc)
    # y^2 | disc
    sq = [1]
    for p, e in fac.items():
        sq = [s * p ** k for s in sq for k in range(e // 2 + 1)]
    ys += sq
    b2, b4, b6, _ = C.b_invariants
    a1, a3 = C.a1, C.a3
    for Y in ys:
        for X in _integer_roots_cubic(A, B - Y * Y):
            # back to (x, y): X = 36 x + 3 b2 scaled by d^2, Y = 108 (2y + a1 x + a3) scaled by d^3
            x = (Fraction(X, d * d) - 3 * b2) / 36
            for yy in (Y, -Y):
                y = (Fraction(yy, d ** 3) / 108 - a1 * x - a3) / 2
                P = CurvePoint(x, y)
                if C.contains(P) and torsion_order(C, P) is not None:
                    found.add(P)
    return sorted(found, key=_point_sort_key)


def _integer_roots_cubic(A: int, c: int) -> list[int]:
    """Integer roots of X^3 + A X + c."""
    if c == 0:
        roots = [0]
        # X^2 + A = 0
        from math import isqrt

        if A <= 0:
            r = isqrt(-A)
            if r * r == -A:
                roots += [r, -r]
        return sorted(set(roots))
    roots = []
    for dv in sympy.divisors(abs(c)):
        for X in (dv, -dv):
            if X ** 3 + A * X + c == 0:
                roots.append(X)
    return sorted(set(roots))


def _point_sort_key(P: CurvePoint):
    if P.is_infinity:
        return (0, Fraction(0), Fraction(0))
    return (1, P.x, P.y)


def n_torsion(C: RationalCurve, N: int) -> list[CurvePoint]:
    """Rational points of E[N]."""
    return [T for T in torsion_points(C) if scalar_mul(C, N, T).is_infinity]


# -- a few standard curves -------------------------------------------

KNOWN_CURVES = {
    "11a1": (0, -1, 1, -10, -20),
    "11a3": (0, -1, 1, 0, 0),
    "14a1": (1, 0, 1, 4, -6),
    "15a1": (1, 1, 1, -10, -10),
    "32a2": (0, 0, 0, -1, 0),
    "37a1": (0, 0, 1, -1, 0),
    "43a1": (0, 1, 1, 0, 0),
    "53a1": (1, -1, 1, 0, 0),
    "389a1": (0, 1, 1, -2, 0),
    "5077a1": (0, 0, 1, -7, 6),
}


def curve_by_label(label: str) -> RationalCurve:
    try:
        return RationalCurve.from_ainvs(KNOWN_CURVES[label], label=label)
    except KeyError:
        raise ValueError(f"unknown curve label {label!r}") from None
