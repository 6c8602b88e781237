"""Formal divisor calculus for elliptic symbols.

Everything here is exact except the archimedean height residuals in the
kernel checker, which carry a tolerance and are reported as numeric.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import mpmath
from mpmath import mp, mpf

from .analytic import PeriodLattice, PrecisionCtx, elliptic_log, periods
from .curve import (
    O,
    CurvePoint,
    RationalCurve,
    _point_sort_key,
    add_points,
    check_dp,
    n_torsion,
    negate,
    scalar_mul,
    sub_points,
    torsion_order,
)
from .ekseries import EKClass, eis_value, g_value
from .errors import (
    MissingRationalTorsionError,
    PointNotOnCurveError,
    PrecisionUnderflowError,
    UnsupportedLevelError,
    UnverifiableRelationError,
)
from .heights import LocalHeightTable, local_heights, place_set
from .numfmt import mp_to_str

DENOMINATOR_BOUND = 10 ** 6


# -- divisors -----------------------------------------------------------


@dataclass(frozen=True)
class Divisor:
    """``sum lambda (s)`` at level ``k``; zero weights are dropped."""

    curve: RationalCurve
    terms: tuple  # ((CurvePoint, Fraction), ...) sorted by point
    k: int = 1

    @classmethod
    def make(cls, curve: RationalCurve, terms, k: int = 1, base_primes: Iterable[int] = ()) -> "Divisor":
        if k < 1:
            raise ValueError("level must be at least 1")
        acc: dict = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for P, lam in items:
            if P.is_infinity:
                raise PointNotOnCurveError("the zero section is not allowed in a divisor")
            if not curve.contains(P):
                raise PointNotOnCurveError(f"{P} is not on {curve.key()}")
            acc[P] = acc.get(P, Fraction(0)) + Fraction(lam)
        acc = {P: v for P, v in acc.items() if v}
        D = cls(curve, tuple(sorted(acc.items(), key=lambda t: _point_sort_key(t[0]))), k)
        if base_primes:
            rep = check_dp(curve, D.support, base_primes)
            if not rep.holds:
                raise ValueError(f"support violates the disjointness property: {rep.to_json()}")
        return D

    @property
    def support(self) -> list:
        return [P for P, _ in self.terms]

    def items(self):
        return iter(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def scale(self, c) -> "Divisor":
        return Divisor.make(self.curve, [(P, Fraction(c) * v) for P, v in self.terms], self.k)

    def __add__(self, other: "Divisor") -> "Divisor":
        if other.curve != self.curve or other.k != self.k:
            raise ValueError("divisors on different curves or levels")
        return Divisor.make(self.curve, list(self.terms) + list(other.terms), self.k)

    def at_level(self, k: int) -> "Divisor":
        return Divisor(self.curve, self.terms, k)

    def to_json(self):
        return {
            "curve": self.curve.to_json(),
            "k": self.k,
            "terms": [{"lambda": str(v), "point": P.to_json()} for P, v in self.terms],
        }

    @classmethod
    def from_json(cls, obj) -> "Divisor":
        C = RationalCurve.from_json(obj["curve"])
        terms = [(CurvePoint.from_json(t["point"]), Fraction(t["lambda"])) for t in obj["terms"]]
        return cls.make(C, terms, int(obj.get("k", 1)))


# -- Mordell-Weil frame ---------------------------------------------------


@dataclass
class MordellWeilFrame:
    curve: RationalCurve
    basis: list
    rows: dict  # point -> tuple of Fractions (coordinates in the basis, mod torsion)
    certificates: dict  # point -> (d, order): d*s - sum(d*M_i b_i) has exact order `order`

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coords(self, P: CurvePoint) -> tuple:
        return self.rows[P]

    def matrix(self, points) -> list:
        return [list(self.rows[P]) for P in points]

    def to_json(self):
        return {
            "rank": self.rank,
            "basis": [b.to_json() for b in self.basis],
            "rows": [
                {"point": P.to_json(), "coords": [str(c) for c in row], "denominator": self.certificates[P][0], "torsion_order": self.certificates[P][1]}
                for P, row in sorted(self.rows.items(), key=lambda t: _point_sort_key(t[0]))
            ],
        }


def _combination(C, coeffs, pts):
    acc = O
    for c, P in zip(coeffs, pts):
        if c:
            acc = add_points(C, acc, scalar_mul(C, int(c), P))
    return acc


def _solve(G, rhs):
    """Solve ``G x = rhs`` (small dense system, mp)."""
    return list(mpmath.lu_solve(mpmath.matrix(G), mpmath.matrix(rhs)))


def mw_frame(points, C: RationalCurve, ctx: PrecisionCtx, heights=None) -> MordellWeilFrame:
    """Frame for the span of ``points`` in E(Q) tensor Q.

    Relations are proposed from the height pairing and then verified with the
    exact group law; a proposal that fails verification raises.
    """
    heights = heights or HeightsProvider(C, ctx)
    basis, rows, certs = [], {}, {}
    threshold = mpf(2) ** (-(ctx.prec_bits // 2))
    for P in points:
        if P.is_infinity or not C.contains(P):
            raise PointNotOnCurveError(f"{P} is not an affine point of {C.key()}")
        if P in rows:
            continue
        o = torsion_order(C, P)
        if o is not None:
            rows[P] = tuple(Fraction(0) for _ in basis)
            certs[P] = (1, o)
            continue
        with mp.workprec(ctx.work_bits):
            pair = heights.pairing
            G = [[pair(bi, bj) for bj in basis] for bi in basis]
            v = [pair(bi, P) for bi in basis]
            hP = pair(P, P)
            if basis:
                x = _solve(G, v)
                resid = hP - sum(xi * vi for xi, vi in zip(x, v))
            else:
                x, resid = [], hP
            independent = resid > threshold * hP
        if independent:
            basis.append(P)
            for Q in rows:
                rows[Q] = rows[Q] + (Fraction(0),)
            rows[P] = tuple(Fraction(int(i == len(basis) - 1)) for i in range(len(basis)))
            certs[P] = (1, 1)
            continue
        coeffs = [Fraction(mpmath.nstr(xi, 30)).limit_denominator(DENOMINATOR_BOUND) for xi in x]
        d = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
        residual = sub_points(C, scalar_mul(C, d, P), _combination(C, [c * d for c in coeffs], basis))
        o = torsion_order(C, residual)
        if o is None:
            raise UnverifiableRelationError(
                f"height pairing suggests {P} = {[str(c) for c in coeffs]} in the frame, but the group law refutes it"
            )
        rows[P] = tuple(coeffs)
        certs[P] = (d, o)
    # pad rows created before later basis growth
    r = len(basis)
    rows = {P: row + (Fraction(0),) * (r - len(row)) for P, row in rows.items()}
    return MordellWeilFrame(C, basis, rows, certs)


# -- heights provider -------------------------------------------------------


class HeightsProvider:
    """Caches local height tables and the period lattice for one curve."""

    def __init__(self, C: RationalCurve, ctx: PrecisionCtx, L: Optional[PeriodLattice] = None, store=None):
        self.C = C
        self.ctx = ctx
        self._L = L
        self._cache: dict = {}
        self.store = store  # optional persistent cache with get/put

    @property
    def lattice(self) -> PeriodLattice:
        if self._L is None:
            self._L = periods(self.C, self.ctx)
        return self._L

    def local(self, P: CurvePoint) -> LocalHeightTable:
        if P not in self._cache:
            tab = None
            if self.store is not None:
                tab = self.store.get_heights(self.C, P, self.ctx)
            if tab is None:
                tab = local_heights(self.C, P, self.ctx, self.lattice)
                if self.store is not None:
                    self.store.put_heights(self.C, P, self.ctx, tab)
            self._cache[P] = tab
        return self._cache[P]

    def height(self, P: CurvePoint):
        return self.local(P).total()

    def pairing(self, P: CurvePoint, Q_: CurvePoint):
        with mp.workprec(self.ctx.work_bits):
            if P == Q_:
                return self.height(P)
            return (self.height(add_points(self.C, P, Q_)) - self.height(P) - self.height(Q_)) / 2


# -- Goncharov differential -------------------------------------------------


@dataclass(frozen=True)
class WedgeElement:
    """Element of Q[P] tensor Lambda^w Q^r: ``{(point, (i1 < ... < iw)): coeff}``."""

    degree: int
    terms: tuple

    @classmethod
    def make(cls, degree: int, terms: dict) -> "WedgeElement":
        items = [(k, Fraction(v)) for k, v in terms.items() if v]
        items.sort(key=lambda t: (_point_sort_key(t[0][0]), t[0][1]))
        return cls(degree, tuple(items))

    @classmethod
    def from_divisor(cls, D: Divisor) -> "WedgeElement":
        return cls.make(0, {(P, ()): v for P, v in D.terms})

    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict:
        return dict(self.terms)

    def to_json(self):
        return {
            "degree": self.degree,
            "terms": [{"point": P.to_json(), "wedge": list(w), "coeff": str(c)} for (P, w), c in self.terms],
        }


def goncharov_delta(D, frame: MordellWeilFrame, wedge_context: Optional[int] = None) -> WedgeElement:
    """``(s) (x) t1^...^tw  ->  (s) (x) s^t1^...^tw`` in frame coordinates."""
    x = WedgeElement.from_divisor(D) if isinstance(D, Divisor) else D
    if wedge_context is not None and wedge_context != x.degree:
        raise ValueError(f"element has wedge degree {x.degree}, expected {wedge_context}")
    out: dict = {}
    for (P, wedge), c in x.terms:
        row = frame.coords(P)
        for i, m in enumerate(row):
            if not m or i in wedge:
                continue
            pos = sum(1 for j in wedge if j < i)
            key = (P, tuple(sorted(wedge + (i,))))
            out[key] = out.get(key, Fraction(0)) + (-1) ** pos * m * c
    return WedgeElement.make(x.degree + 1, out)


# -- symbol differential ------------------------------------------------


@dataclass(frozen=True)
class SymbolTensor:
    """Formal ``sum lambda {s}_a (x) {s}_b``."""

    left_level: int
    right_level: int
    terms: tuple  # ((point, Fraction), ...)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self):
        return {
            "left_level": self.left_level,
            "right_level": self.right_level,
            "terms": [{"lambda": str(v), "point": P.to_json()} for P, v in self.terms],
        }


def symbol_dk(D: Divisor) -> SymbolTensor:
    """``{s}_k -> {s}_{k-1} (x) {s}_1``; zero at level 1."""
    if D.k == 1:
        return SymbolTensor(0, 1, ())
    return SymbolTensor(D.k - 1, 1, D.terms)


# -- kernel conditions -----------------------------------------------------


def sym_power_coeffs(vectors_weights, k: int) -> dict:
    """Monomial coefficients of ``sum lambda (v . X)^k`` (exact)."""
    out: dict = {}
    for v, lam in vectors_weights:
        r = len(v)
        for mono in itertools.combinations_with_replacement(range(r), k):
            expo = [0] * r
            for i in mono:
                expo[i] += 1
            key = tuple(expo)
            if key in out and out[key] is None:
                continue
            multi = math.factorial(k)
            term = Fraction(lam)
            for i, e in enumerate(expo):
                multi //= math.factorial(e)
                term *= v[i] ** e
            out[key] = out.get(key, Fraction(0)) + multi * term
    return {m: c for m, c in out.items() if c}


def _witness(vectors_weights, k: int, r: int):
    """A functional X (integer vector) with ``sum lambda X(s)^k != 0``."""
    for bound in range(1, 4):
        for X in itertools.product(range(-bound, bound + 1), repeat=r):
            if not any(X):
                continue
            val = sum(lam * sum(a * b for a, b in zip(X, v)) ** k for v, lam in vectors_weights)
            if val:
                return list(X)
    return None


@dataclass
class PlaceResidual:
    functional: int
    place: str
    residual: object  # Fraction at primes, mpf at infinity
    exact: bool
    passed: bool

    def to_json(self):
        if isinstance(self.residual, Fraction):
            res = str(self.residual)
        else:
            res = mp_to_str(self.residual, 64)
        return {"functional": self.functional, "place": self.place, "residual": res, "exact": self.exact, "pass": self.passed}


@dataclass
class KernelVerdict:
    k: int
    condition_i: str  # "pass_exact" | "fail"
    witness: Optional[list]
    condition_ii: list  # [PlaceResidual]
    overall: str  # "exact_pass" | "numeric_pass" | "fail"
    tolerance: object
    extrapolated: bool = False
    rank: int = 0

    @property
    def passed(self) -> bool:
        return self.overall != "fail"

    def to_json(self):
        out = {
            "k": self.k,
            "rank": self.rank,
            "condition_i": {"status": self.condition_i, "witness": self.witness},
            "condition_ii": [r.to_json() for r in self.condition_ii],
            "overall": self.overall,
            "tolerance": mp_to_str(self.tolerance, 53),
        }
        if self.extrapolated:
            out["note"] = "extrapolated: the conditions are only established for k <= 3"
        return out


def check_kernel(
    D: Divisor,
    heights: Optional[HeightsProvider] = None,
    ctx: Optional[PrecisionCtx] = None,
    frame: Optional[MordellWeilFrame] = None,
    tol=None,
    places: Optional[list] = None,
) -> KernelVerdict:
    if D.k < 2:
        raise UnsupportedLevelError("kernel conditions start at level 2")
    ctx = ctx or PrecisionCtx()
    C = D.curve
    if tol is None:
        tol = mpf(2) ** (-(ctx.prec_bits // 2))
    heights = heights or HeightsProvider(C, ctx)
    frame = frame or mw_frame(D.support, C, ctx, heights)
    r = frame.rank
    vw = [(frame.coords(P), lam) for P, lam in D.terms]
    k = D.k

    poly = sym_power_coeffs(vw, k)
    cond_i = "pass_exact" if not poly else "fail"
    witness = None if not poly else _witness(vw, k, r)

    residuals = []
    if k >= 3:
        if places is None:
            places = place_set(C, D.support) + ["inf"]
        for i in range(r):
            # group s and -s: all local heights are even
            coeff: dict = {}
            for P, lam in D.terms:
                key = min(P, negate(C, P), key=_point_sort_key)
                coeff[key] = coeff.get(key, Fraction(0)) + lam * frame.coords(P)[i] ** (k - 2)
            coeff = {P: c for P, c in coeff.items() if c}
            for v in places:
                if v == "inf":
                    if not coeff:
                        residuals.append(PlaceResidual(i, "inf", Fraction(0), True, True))
                        continue
                    with mp.workprec(ctx.work_bits):
                        res = mpf(0)
                        for P, c in sorted(coeff.items(), key=lambda t: _point_sort_key(t[0])):
                            res += mpf(c.numerator) / c.denominator * heights.local(P).archimedean
                    residuals.append(PlaceResidual(i, "inf", res, False, abs(res) <= tol))
                else:
                    p = int(v)
                    res = sum((c * heights.local(P).nonarch.get(p, Fraction(0)) for P, c in coeff.items()), Fraction(0))
                    residuals.append(PlaceResidual(i, str(p), res, True, res == 0))

    if cond_i == "fail" or not all(x.passed for x in residuals):
        overall = "fail"
    elif all(x.exact for x in residuals):
        overall = "exact_pass"
    else:
        overall = "numeric_pass"
    return KernelVerdict(k, cond_i, witness, residuals, overall, tol, extrapolated=k >= 4, rank=r)


# -- regulator ---------------------------------------------------------------


@dataclass
class RegulatorResult:
    value: EKClass
    verdict: Optional[KernelVerdict]
    note: str = ""

    def to_json(self):
        return {
            "value": self.value.to_json(),
            "verdict": self.verdict.to_json() if self.verdict else None,
            "note": self.note,
        }


def regulator(D: Divisor, L: Optional[PeriodLattice] = None, ctx: Optional[PrecisionCtx] = None, verdict=None, with_verdict: bool = True) -> RegulatorResult:
    """``k!/(k-1) * sum lambda G_{E,k}(s)`` with the kernel verdict attached."""
    ctx = ctx or PrecisionCtx()
    C = D.curve
    L = L or periods(C, ctx)
    k = D.k
    if k < 2:
        raise UnsupportedLevelError("the regulator is defined from level 2")
    note = ""
    if verdict is None and with_verdict:
        try:
            verdict = check_kernel(D, HeightsProvider(C, ctx, L), ctx)
        except UnverifiableRelationError as exc:
            note = f"no verdict: {exc}"
    contribs = [(lam, elliptic_log(C, L, P, ctx)) for P, lam in D.terms]
    val = eis_value(contribs, k, L, ctx)
    if D.terms:
        with mp.workprec(ctx.work_bits):
            if val.reality_defect() > 10 * (val.err_bound + ctx.tol) * (1 + max(abs(c) for c in val.coeffs)):
                raise PrecisionUnderflowError("reality symmetry violated beyond the error bound")
    return RegulatorResult(val, verdict, note)


# -- norm maps -------------------------------------------------------------


@dataclass
class NormPush:
    N: int
    kernel: list
    deg: int
    expanded: Divisor
    contracted: Divisor

    @property
    def full_kernel(self) -> bool:
        return self.deg == self.N ** 2

    def to_json(self):
        return {
            "N": self.N,
            "deg": self.deg,
            "kernel": [t.to_json() for t in self.kernel],
            "expanded": self.expanded.to_json(),
            "contracted": self.contracted.to_json(),
        }


def norm_push(D: Divisor, N: int) -> NormPush:
    """Expansion over E[N](Q) and contraction along [N]."""
    if N < 2:
        raise ValueError("N must be at least 2")
    C = D.curve
    T = n_torsion(C, N)
    if len(T) == N * N:
        deg = N * N
    elif len(T) == 1:
        deg = 1
    else:
        raise MissingRationalTorsionError(f"E[{N}](Q) has {len(T)} of {N * N} points", available=T)
    exp_terms, con_terms = [], []
    for P, lam in D.terms:
        for t in T:
            Q_ = add_points(C, P, t)
            if Q_.is_infinity:
                raise ValueError(f"{P} + {t} is the zero section")
            exp_terms.append((Q_, lam))
        NP = scalar_mul(C, N, P)
        if NP.is_infinity:
            raise ValueError(f"{N}*{P} is the zero section")
        con_terms.append((NP, deg * lam))
    return NormPush(N, T, deg, Divisor.make(C, exp_terms, D.k), Divisor.make(C, con_terms, D.k))
