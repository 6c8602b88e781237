"""Period lattice, elliptic logarithm and the Pontryagin pairing.

All numerics run through mpmath at a working precision fixed by a
:class:`PrecisionCtx`.  Conventions:

* ``Y = 2y + a1 x + a3`` and ``X = x + b2/12`` put the curve in the form
  ``Y^2 = 4X^3 - g2 X - g3`` with ``g2 = c4/12``, ``g3 = c6/216``; the
  invariant differential is ``dx/Y = dz`` and ``(wp(z), wp'(z)) = (X, Y)``.
* The lattice basis has ``omega2`` real and positive and
  ``Im(omega1/omega2) > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mp, mpc, mpf

from .curve import CurvePoint, RationalCurve
from .errors import PointNotOnCurveError, PrecisionUnderflowError


@dataclass(frozen=True)
class PrecisionCtx:
    prec_bits: int = 192
    guard_bits: int = 16
    deterministic: bool = True

    def __post_init__(self):
        if self.prec_bits < 64:
            raise PrecisionUnderflowError("working precision must be at least 64 bits")

    @property
    def tol(self) -> mpf:
        """Target tolerance ``2^(-p+g)``."""
        with mp.workprec(self.prec_bits):
            return mpf(2) ** (-(self.prec_bits - self.guard_bits))

    @property
    def work_bits(self) -> int:
        # extra room for cancellation inside series; results are rounded back
        return self.prec_bits + 32

    def doubled(self) -> "PrecisionCtx":
        return PrecisionCtx(2 * self.prec_bits, self.guard_bits, self.deterministic)


def _to_mpf(q: Fraction) -> mpf:
    return mpf(q.numerator) / q.denominator


@dataclass(frozen=True)
class PeriodLattice:
    omega1: mpc
    omega2: mpc
    prec_bits: int
    red1: mpc = field(repr=False, default=None)
    red2: mpc = field(repr=False, default=None)

    @property
    def tau(self) -> mpc:
        return self.omega1 / self.omega2

    @property
    def covol(self) -> mpf:
        return abs((self.omega1 * mpmath.conj(self.omega2)).imag)

    @property
    def reduced(self) -> tuple:
        """Gauss-reduced basis ``(w1, w2)``: ``|w1| <= |w2|``, ``Im(w1/w2) > 0`` after swap."""
        return self.red1, self.red2

    def element(self, m: int, n: int) -> mpc:
        return m * self.omega1 + n * self.omega2

    def coords(self, z) -> tuple:
        """Real coordinates ``(a, b)`` with ``z = a omega1 + b omega2``."""
        w1, w2 = self.omega1, self.omega2
        det = (w1 * mpmath.conj(w2)).imag
        a = (z * mpmath.conj(w2)).imag / det
        b = (w1 * mpmath.conj(z)).imag / det
        return a, b


def gauss_reduce(w1, w2):
    """Lagrange-Gauss reduction of a 2-d lattice basis (complex numbers).

    Returns ``(u, v)`` with ``|u| <= |v|``, ``|Re(u conj v)| <= |u|^2/2`` and
    ``Im(u / v) > 0`` reoriented as needed so that the pair is positively
    oriented in the order ``(u, v)``.
    """
    u, v = w1, w2
    if abs(u) > abs(v):
        u, v = v, u
    while True:
        mu = (v * mpmath.conj(u)).real / abs(u) ** 2
        n = int(mpmath.nint(mu))
        v = v - n * u
        if abs(v) < abs(u):
            u, v = v, u
        else:
            break
    if (u / v).imag < 0:
        u = -u
    return u, v


def _make_lattice(w1, w2, prec_bits) -> PeriodLattice:
    if (w1 / w2).imag < 0:
        w1 = -w1
    r1, r2 = gauss_reduce(w1, w2)
    return PeriodLattice(w1, w2, prec_bits, r1, r2)


def _cubic_roots(C: RationalCurve):
    """Roots of ``4x^3 + b2 x^2 + 2 b4 x + b6``; real ones first, descending."""
    b2, b4, b6, _ = C.b_invariants
    coeffs = [4, _to_mpf(b2), 2 * _to_mpf(b4), _to_mpf(b6)]
    roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=2 * mp.prec)
    if C.discriminant > 0:
        rs = sorted((mpmath.re(r) for r in roots), reverse=True)
        return rs
    real = [r for r in roots if abs(mpmath.im(r)) <= abs(r) * mpf(2) ** (-mp.prec // 2) + mpf(2) ** (-mp.prec // 2)]
    real.sort(key=lambda r: abs(mpmath.im(r)))
    e1 = mpmath.re(real[0])
    others = [r for r in roots if r is not real[0]]
    others.sort(key=lambda r: mpmath.im(r), reverse=True)
    return [e1, others[0], others[1]]


def periods(C: RationalCurve, ctx: PrecisionCtx) -> PeriodLattice:
    """AGM periods of the invariant differential ``dx/(2y + a1 x + a3)``."""
    with mp.workprec(ctx.work_bits):
        e = _cubic_roots(C)
        if C.discriminant > 0:
            e1, e2, e3 = e
            real = mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e1 - e2))
            imag = mpc(0, 1) * mpmath.pi / mpmath.agm(mpmath.sqrt(e1 - e3), mpmath.sqrt(e2 - e3))
            w2, w1 = mpc(real), imag
        else:
            b2, b4, _, _ = (_to_mpf(b) for b in C.b_invariants)
            e1 = e[0]
            a = 3 * e1 + b2 / 4
            b = mpmath.sqrt(3 * e1 * e1 + b2 * e1 / 2 + b4 / 2)
            real = 2 * mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b + a))
            w2 = mpc(real)
            w1 = -real / 2 + mpc(0, 1) * mpmath.pi / mpmath.agm(2 * mpmath.sqrt(b), mpmath.sqrt(2 * b - a))
        L = _make_lattice(w1, w2, ctx.prec_bits)
    if not L.covol > 0:
        raise PrecisionUnderflowError("degenerate period lattice at this precision")
    return L


# -- Weierstrass functions ------------------------------------------


def _center(z, L: PeriodLattice):
    """Representative of z mod L with reduced-basis coordinates in [-1/2, 1/2)."""
    w1, w2 = L.reduced
    det = (w1 * mpmath.conj(w2)).imag
    a = (z * mpmath.conj(w2)).imag / det
    b = (w1 * mpmath.conj(z)).imag / det
    return z - mpmath.floor(a + mpf(0.5)) * w1 - mpmath.floor(b + mpf(0.5)) * w2


def _q_data(L: PeriodLattice, z):
    w1, w2 = L.reduced
    tau = w1 / w2
    u = _center(z, L) / w2
    q = mpmath.expjpi(2 * tau)
    w = mpmath.expjpi(2 * u)
    return w2, tau, u, q, w


def _nterms(q) -> int:
    aq = abs(q)
    # |q|^(n - 1/2) below 2^-prec
    return int(mp.prec * mpmath.log(2) / -mpmath.log(aq)) + 3


def wp(z, L: PeriodLattice):
    """Weierstrass wp via the q-expansion on the reduced basis."""
    with mp.workprec(L.prec_bits + 32):
        return _wp(z, L)


def wp_prime(z, L: PeriodLattice):
    with mp.workprec(L.prec_bits + 32):
        return _wp_prime(z, L)


def _wp(z, L):
    w2, tau, u, q, w = _q_data(L, z)
    s = w / (1 - w) ** 2
    qn = mpf(1)
    const = mpf(0)
    for _ in range(_nterms(q)):
        qn *= q
        a, b = qn * w, qn / w
        s += a / (1 - a) ** 2 + b / (1 - b) ** 2
        const += qn / (1 - qn) ** 2
    twopii = 2j * mpmath.pi
    return twopii ** 2 / w2 ** 2 * (mpf(1) / 12 + s - 2 * const)


def _wp_prime(z, L):
    w2, tau, u, q, w = _q_data(L, z)
    s = w * (1 + w) / (1 - w) ** 3
    qn = mpf(1)
    for _ in range(_nterms(q)):
        qn *= q
        a, b = qn * w, qn / w
        s += a * (1 + a) / (1 - a) ** 3 - b * (1 + b) / (1 - b) ** 3
    twopii = 2j * mpmath.pi
    return twopii ** 3 / w2 ** 3 * s


# -- elliptic logarithm ---------------------------------------------


@dataclass(frozen=True)
class EllipticLog:
    z: mpc
    prec_bits: int

    def __neg__(self):
        return EllipticLog(-self.z, self.prec_bits)


def reduce_mod_lattice(z, L: PeriodLattice, tol=None) -> EllipticLog:
    """Representative in ``{a omega1 + b omega2 : a, b in [0, 1)}``.

    Coefficients within ``tol`` of 1 are sent to 0, so reduction is idempotent.
    """
    z = mpc(z)
    if tol is None:
        tol = mpf(2) ** (-(L.prec_bits - 16))
    a, b = L.coords(z)
    fa, fb = a - mpmath.floor(a), b - mpmath.floor(b)
    if fa > 1 - tol or fa < tol:
        fa = mpf(0)
    if fb > 1 - tol or fb < tol:
        fb = mpf(0)
    return EllipticLog(fa * L.omega1 + fb * L.omega2, L.prec_bits)


def _numeric_add(C: RationalCurve, P, Q):
    """Group law on real approximations (used only to move off the egg)."""
    a1, a2, a3, a4, a6 = (_to_mpf(a) for a in C.ainvs)
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - (y1 - lam * x1) - a3
    return x3, y3


def _log_identity_component(C: RationalCurve, x, Y):
    """z with wp(z) = X and wp'(z) = Y for x >= e1 (real component)."""
    e = _cubic_roots(C)
    z = mpmath.elliprf(x - e[0], x - e[1], x - e[2])
    z = mpmath.re(z)
    # wp decreases on (0, omega_real/2), so wp' < 0 there
    return -z if Y > 0 else z


def elliptic_log(C: RationalCurve, L: PeriodLattice, P: CurvePoint, ctx: PrecisionCtx) -> EllipticLog:
    """theta(P) in C/L, reduced to the fundamental parallelogram."""
    if not C.contains(P):
        raise PointNotOnCurveError(f"{P} is not on {C.key()}")
    if P.is_infinity:
        return EllipticLog(mpc(0), ctx.prec_bits)
    with mp.workprec(ctx.work_bits):
        a1, a3 = _to_mpf(C.a1), _to_mpf(C.a3)
        x, y = _to_mpf(P.x), _to_mpf(P.y)
        b2 = _to_mpf(C.b_invariants[0])
        halves = [L.omega1 / 2, L.omega2 / 2, (L.omega1 + L.omega2) / 2]
        if 2 * P.y + C.a1 * P.x + C.a3 == 0:
            # rational 2-torsion: a half period
            z = min(halves, key=lambda h: abs(_wp(h, L) - (x + b2 / 12)))
            return reduce_mod_lattice(z, L)
        Y = 2 * y + a1 * x + a3
        e = _cubic_roots(C)
        if C.discriminant < 0 or x >= e[0]:
            z = mpc(_log_identity_component(C, x, Y))
        else:
            # egg: translate by the 2-torsion point T = (e3, *) onto the identity component
            xT = e[2]
            yT = -(a1 * xT + a3) / 2
            x2, y2 = _numeric_add(C, (x, y), (xT, yT))
            z2 = _log_identity_component(C, x2, 2 * y2 + a1 * x2 + a3)
            zT = min(halves, key=lambda h: abs(_wp(h, L) - (xT + b2 / 12)))
            z = z2 - zT
        out = reduce_mod_lattice(z, L)
    return out


def point_from_log(C: RationalCurve, L: PeriodLattice, z):
    """Complex approximations ``(x, y)`` of the point with elliptic log ``z``."""
    with mp.workprec(L.prec_bits + 32):
        b2 = _to_mpf(C.b_invariants[0])
        a1, a3 = _to_mpf(C.a1), _to_mpf(C.a3)
        X = _wp(z, L)
        Y = _wp_prime(z, L)
        x = X - b2 / 12
        return x, (Y - a1 * x - a3) / 2


def pontryagin(z, gamma: tuple, L: PeriodLattice, ctx: PrecisionCtx | None = None):
    """``exp(2 pi i Im(z conj(g)) / covol)`` for ``g = m omega1 + n omega2``."""
    prec = ctx.work_bits if ctx else L.prec_bits + 32
    with mp.workprec(prec):
        if isinstance(z, EllipticLog):
            z = z.z
        m, n = gamma
        g = L.element(m, n)
        return mpmath.expjpi(2 * (mpc(z) * mpmath.conj(g)).imag / L.covol)
