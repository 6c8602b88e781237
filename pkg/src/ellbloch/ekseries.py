"""Eisenstein-Kronecker lattice sums and the classes G_{E,k}.

For ``a, b >= 0`` and ``k = a + b + 2`` the sum

    K_{a,b}(z) = sum_{g in L - 0} <z, g> / (g^(a+1) conj(g)^(b+1))

is evaluated by splitting ``|g|^(-2s)`` at ``t = 1`` in its Mellin integral
and Poisson-summing the small-``t`` half.  Writing ``m = |a - b|``,
``s = max(a, b) + 1``, ``n = s - m = min(a, b) + 1``, ``A = covol(L)`` and
``P(w) = conj(w)^m`` (``a >= b``) or ``(-w)^m`` (``a < b``)::

    K = (pi/A)^s * sum_{g != 0} <z,g> P*(g) e^{-Y} sum_{j<s} Y^(j-s)/j!     (Y = pi|g|^2/A)
      + (pi/A)^s/Gamma(s) * sum_{l in L} P(l - z) E_n(pi|l - z|^2/A)
      - [m = 0] (pi/A)^s / (s Gamma(s))

where ``P*(g)`` is ``conj(g)^m`` or ``g^m``.  Both sums converge like
Gaussians.  For k = 2 this is the value of the series summed over expanding
discs (the Eisenstein convention); the representation agrees with the disc
limit because the continuation in s of the isotropic sum is regular at s = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
from mpmath import mp, mpc, mpf

from .analytic import EllipticLog, PeriodLattice, PrecisionCtx
from .errors import PointOnLatticeError

SQRT3_2 = math.sqrt(3) / 2


def tree_sum(values: Sequence):
    """Pairwise summation in a fixed order (bit-reproducible)."""
    vals = list(values)
    if not vals:
        return mpc(0)
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def _shell(M: int):
    """Integer pairs with max(|m|, |n|) = M, in a fixed order."""
    if M == 0:
        return [(0, 0)]
    out = []
    for m in range(-M, M + 1):
        out.append((m, -M))
        out.append((m, M))
    for n in range(-M + 1, M):
        out.append((-M, n))
        out.append((M, n))
    return out


@dataclass
class SummationStats:
    shells_direct: int = 0
    shells_dual: int = 0
    terms: int = 0

    def to_json(self):
        return {"shells_direct": self.shells_direct, "shells_dual": self.shells_dual, "terms": self.terms}


PREPARE_KMAX = 6


class KroneckerEvaluator:
    """Caches lattice data for one ``(L, z)`` so many ``(a, b)`` are cheap."""

    def __init__(self, L: PeriodLattice, z, ctx: PrecisionCtx, split: float = 1.0):
        self.L = L
        self.ctx = ctx
        self.split = split  # Mellin split point; the value is independent of it
        self.prec = ctx.work_bits + 16
        with mp.workprec(self.prec):
            if isinstance(z, EllipticLog):
                z = z.z
            self.w1, self.w2 = L.reduced
            self.A = L.covol
            self.z = self._center(mpc(z))
            if abs(self.z) < ctx.tol * (abs(self.w1) + 1):
                raise PointOnLatticeError("z lies on the period lattice")
            self._direct = None
            self._dual = None
            self.stats = SummationStats()

    def _center(self, z):
        w1, w2 = self.w1, self.w2
        det = (w1 * mpmath.conj(w2)).imag
        a = (z * mpmath.conj(w2)).imag / det
        b = (w1 * mpmath.conj(z)).imag / det
        return z - mpmath.floor(a + mpf(0.5)) * w1 - mpmath.floor(b + mpf(0.5)) * w2

    # -- truncation ---------------------------------------------------

    def _radius_needed(self, kmax: int) -> tuple[int, int]:
        """Shell counts for the direct and dual sums and the resulting tail bound."""
        A = float(self.A)
        c = SQRT3_2 * float(abs(self.w1))
        zr = float(abs(self.z))
        split = self.split
        logtol = -self.ctx.prec_bits * math.log(2) - math.log(1e3)
        smax, mmax = kmax - 1, kmax - 2
        lpref = max(0.0, smax * math.log(math.pi / A))

        def log_direct(r):
            Y = split * math.pi * r * r / A
            return mmax * math.log(max(r, 1.0)) + lpref + 1 - Y - math.log(Y)

        def log_dual(r):
            X = math.pi * r * r / (A * split)
            return mmax * math.log(max(r + 2 * zr, 1.0)) + lpref - X - math.log(X) + mmax * math.log(max(A, 1.0))

        def shells(logterm, offset):
            M = 1
            while True:
                r = c * M - offset
                if r > 0 and math.pi * r * r / A > 2 * kmax:
                    tail = sum(math.exp(logterm(c * (M + i) - offset) + math.log(8 * (M + i)) - logtol) for i in range(1, 40))
                    if tail < 1.0:
                        return M
                M += 1

        return shells(log_direct, 0.0), shells(log_dual, zr)

    def _tail_bound(self, kmax: int, Md: int, Mu: int) -> mpf:
        A = float(self.A)
        c = SQRT3_2 * float(abs(self.w1))
        zr = float(abs(self.z))
        smax, mmax = kmax - 1, kmax - 2
        lpref = max(0.0, smax * math.log(math.pi / A))
        tot = 0.0
        for i in range(1, 60):
            r = c * (Md + i)
            Y = self.split * math.pi * r * r / A
            tot += 8 * (Md + i) * math.exp(mmax * math.log(max(r, 1.0)) + lpref + 1 - Y - math.log(Y))
            r = c * (Mu + i) - zr
            X = math.pi * r * r / (A * self.split)
            tot += 8 * (Mu + i) * math.exp(mmax * math.log(max(r + 2 * zr, 1.0)) + lpref - X - math.log(X) + mmax * math.log(max(A, 1.0)))
        return mpf(tot)

    # -- cached lattice data -----------------------------------------

    def prepare(self, kmax: int):
        """Build shell data good for every ``a + b + 2 <= kmax``."""
        self._prepare(kmax)

    def _prepare(self, kmax: int):
        if self._direct is not None and self._direct[0] >= kmax:
            return
        # levels up to 6 are the common case; one pass covers them all
        kmax = max(kmax, PREPARE_KMAX)
        Md, Mu = self._radius_needed(kmax)
        nmax = kmax  # E_n needs n <= min(a, b) + 1
        with mp.workprec(self.prec):
            A, z = self.A, self.z
            pi_A = mpmath.pi / A
            direct = []
            for M in range(1, Md + 1):
                for (m, n) in _shell(M):
                    g = m * self.w1 + n * self.w2
                    Y = self.split * pi_A * (g.real ** 2 + g.imag ** 2)
                    chi = mpmath.expjpi(2 * (z * mpmath.conj(g)).imag / A)
                    direct.append((g, Y, chi, mpmath.exp(-Y)))
            dual = []
            for M in range(0, Mu + 1):
                for (m, n) in _shell(M):
                    d = m * self.w1 + n * self.w2 - z
                    X = pi_A * (d.real ** 2 + d.imag ** 2) / self.split
                    eX = mpmath.exp(-X)
                    with mp.workprec(self.prec + 8 * nmax):
                        En = [None, mpmath.e1(X)]
                        for k in range(1, nmax):
                            En.append((eX - X * En[k]) / k)
                    dual.append((d, X, En))
            self._direct = (kmax, direct, Md)
            self._dual = (kmax, dual, Mu)
            self._base1 = {}
            self._pows = {}
            self._peaks = {}
            self.stats = SummationStats(Md, Mu, len(direct) + len(dual))

    def _direct_base(self, s: int) -> list:
        """``chi(g) e^{-Y} sum_{j<s} Y^{j-s}/j!`` per direct term."""
        if s not in self._base1:
            fact = [mpf(math.factorial(j)) for j in range(s)]
            out = []
            for g, Y, chi, eY in self._direct[1]:
                inc = sum(Y ** (j - s) / fact[j] for j in range(s))
                out.append(chi * eY * inc)
            self._base1[s] = out
        return self._base1[s]

    def _powers(self, which: str, m: int, conj: bool) -> list:
        key = (which, m, conj)
        if key not in self._pows:
            if which == "g":
                pts = [g for g, _, _, _ in self._direct[1]]
                self._pows[key] = [(mpmath.conj(g) if conj else g) ** m for g in pts]
            else:
                pts = [d for d, _, _ in self._dual[1]]
                self._pows[key] = [(mpmath.conj(d) if conj else -d) ** m for d in pts]
        return self._pows[key]

    def _maxabs(self, key) -> mpf:
        if key not in self._peaks:
            if key[0] == "b1":
                vals = self._direct_base(key[1])
            elif key[0] == "En":
                vals = [En[key[1]] for _, _, En in self._dual[1]]
            else:
                vals = self._powers(*key)
            self._peaks[key] = max((abs(v) for v in vals), default=mpf(0))
        return self._peaks[key]

    def kronecker(self, a: int, b: int):
        """``(K_{a,b}(z), error bound)``."""
        if a < 0 or b < 0:
            raise ValueError("a, b must be non-negative")
        k = a + b + 2
        self._prepare(max(k, 2))
        with mp.workprec(self.prec):
            A = self.A
            s = max(a, b) + 1
            m = abs(a - b)
            n = min(a, b) + 1
            split = mpf(self.split)
            pi_A = mpmath.pi / A
            pref = pi_A ** s
            terms1 = [c * p for c, p in zip(self._direct_base(s), self._powers("g", m, a >= b))]
            # direct part used Y = split*pi|g|^2/A; rescale the prefactor accordingly
            part1 = pref * split ** s * tree_sum(terms1)
            terms2 = [p * En[n] for p, (_, _, En) in zip(self._powers("d", m, a >= b), self._dual[1])]
            gam = mpmath.gamma(s)
            part2 = pref / gam * split ** (s - m - 1) * tree_sum(terms2)
            if m == 0:
                part2 -= pref * split ** s / (s * gam)
            val = part1 + part2
            big = max(self._maxabs(("b1", s)) * self._maxabs(("g", m, a >= b)), self._maxabs(("En", n)) * self._maxabs(("d", m, a >= b)))
            rounding = (len(terms1) + len(terms2) + 10) * big * (pref + 1) * mpf(2) ** (-self.prec + 8)
            err = self._tail_bound(k, self._direct[2], self._dual[2]) + rounding
        with mp.workprec(self.ctx.work_bits):
            return +val, +err


def kronecker_sum(a: int, b: int, z, L: PeriodLattice, ctx: PrecisionCtx):
    """``(value, certified error)`` of the Eisenstein-Kronecker sum K_{a,b}(z)."""
    return KroneckerEvaluator(L, z, ctx).kronecker(a, b)


# -- classes ----------------------------------------------------------


@dataclass
class EKClass:
    """Coefficients of ``(dz)^alpha (d conj z)^beta``, alpha ascending."""

    k: int
    coeffs: list  # [mpc] of length k-1, index = alpha
    err_bound: mpf = field(default_factory=lambda: mpf(0))
    prec_bits: int = 192
    stats: dict = field(default_factory=dict)

    @classmethod
    def zero(cls, k: int, prec_bits: int = 192) -> "EKClass":
        return cls(k, [mpc(0)] * (k - 1), mpf(0), prec_bits)

    def coeff(self, alpha: int, beta: int):
        if alpha + beta != self.k - 2:
            raise KeyError((alpha, beta))
        return self.coeffs[alpha]

    def items(self):
        for alpha, c in enumerate(self.coeffs):
            yield alpha, self.k - 2 - alpha, c

    def reality_defect(self) -> mpf:
        """``max |conj(c_{a,b}) - (-1)^k c_{b,a}|``."""
        sign = -1 if self.k % 2 else 1
        n = len(self.coeffs)
        return max(abs(mpmath.conj(self.coeffs[i]) - sign * self.coeffs[n - 1 - i]) for i in range(n))

    def max_abs_diff(self, other: "EKClass") -> mpf:
        return max(abs(x - y) for x, y in zip(self.coeffs, other.coeffs))

    def to_json(self, exact: bool = False):
        from .numfmt import mp_to_str, mpc_exact

        coeffs = []
        for a, b, c in self.items():
            rec = {"alpha": a, "beta": b, "re": mp_to_str(c.real, self.prec_bits + 32), "im": mp_to_str(c.imag, self.prec_bits + 32)}
            if exact:
                rec["exact"] = mpc_exact(c)
            coeffs.append(rec)
        return {"k": self.k, "prec_bits": self.prec_bits, "coeffs": coeffs, "err_bound": mp_to_str(self.err_bound, 53)}

    @classmethod
    def from_json(cls, obj) -> "EKClass":
        from .numfmt import mpc_from_exact

        prec = int(obj["prec_bits"])
        coeffs = []
        with mp.workprec(prec + 32):
            for c in sorted(obj["coeffs"], key=lambda c: c["alpha"]):
                coeffs.append(mpc_from_exact(c["exact"]) if "exact" in c else mpc(mpf(c["re"]), mpf(c["im"])))
            err = mpf(obj["err_bound"])
        return cls(int(obj["k"]), coeffs, err, prec)


def g_value(L: PeriodLattice, z, k: int, ctx: PrecisionCtx, evaluator: KroneckerEvaluator | None = None) -> EKClass:
    """G_{E,k}(s) with ``c_{a,b} = covol/(2 pi) * K_{a,b}(theta(s))``."""
    if k < 2:
        raise ValueError("k must be at least 2")
    ev = evaluator or KroneckerEvaluator(L, z, ctx)
    coeffs, err = [], mpf(0)
    with mp.workprec(ctx.work_bits):
        scale = L.covol / (2 * mpmath.pi)
        for alpha in range(k - 1):
            v, e = ev.kronecker(alpha, k - 2 - alpha)
            coeffs.append(scale * v)
            err = max(err, scale * e)
    return EKClass(k, coeffs, err, ctx.prec_bits, ev.stats.to_json())


def eis_factor(k: int) -> int:
    """``k!/(k-1)``; always an integer (``k (k-2)!``)."""
    return math.factorial(k) // (k - 1)


def eis_value(contributions: Iterable, k: int, L: PeriodLattice, ctx: PrecisionCtx) -> EKClass:
    """``k!/(k-1) * sum lambda * G_{E,k}(z)`` over ``(lambda, z)`` pairs.

    The rational weights are applied as ``(g * num) / den`` and the integer
    factor ``k!/(k-1)`` is applied once after summation.
    """
    contributions = list(contributions)
    total = EKClass.zero(k, ctx.prec_bits)
    if not contributions:
        return total
    with mp.workprec(ctx.work_bits):
        acc = [mpc(0)] * (k - 1)
        err = mpf(0)
        for lam, z in contributions:
            lam = Fraction(lam)
            g = z if isinstance(z, EKClass) else g_value(L, z, k, ctx)
            acc = [a + (c * lam.numerator) / lam.denominator for a, c in zip(acc, g.coeffs)]
            err += g.err_bound * abs(lam)
        f = eis_factor(k)
        return EKClass(k, [c * f for c in acc], err * f, ctx.prec_bits)
