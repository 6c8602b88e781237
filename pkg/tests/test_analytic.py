from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpc, mpf

from conftest import GENERATORS, pt
from ellbloch.analytic import (
    PrecisionCtx,
    elliptic_log,
    gauss_reduce,
    periods,
    point_from_log,
    pontryagin,
    reduce_mod_lattice,
    wp,
)
from ellbloch.curve import curve_by_label, scalar_mul
from ellbloch.errors import PointNotOnCurveError, PrecisionUnderflowError

LABELS = ["11a1", "14a1", "15a1", "37a1", "43a1", "53a1", "389a1", "5077a1"]


def _eisenstein_g2_g3(L):
    """g2, g3 from the q-expansions in tau = omega1/omega2."""
    tau = L.tau
    q = mpmath.expjpi(2 * tau)
    s3 = s5 = mpc(0)
    qn = mpc(1)
    for n in range(1, 400):
        qn *= q
        if abs(qn) < mpf(2) ** (-mp.prec - 10):
            break
        s3 += mpmath.fsum(d ** 3 for d in range(1, n + 1) if n % d == 0) * qn
        s5 += mpmath.fsum(d ** 5 for d in range(1, n + 1) if n % d == 0) * qn
    w = 2 * mpmath.pi / L.omega2
    g2 = w ** 4 / 12 * (1 + 240 * s3)
    g3 = w ** 6 / 216 * (1 - 504 * s5)
    return g2, g3


@pytest.mark.parametrize("label", LABELS)
def test_lattice_invariants_match_c4_c6(label, lattices):
    C = curve_by_label(label)
    L = lattices(label, 128)
    c4, c6 = C.c_invariants
    with mp.workprec(160):
        g2, g3 = _eisenstein_g2_g3(L)
        assert abs(g2 - mpf(c4.numerator) / c4.denominator / 12) < mpf(2) ** -100 * (1 + abs(g2))
        assert abs(g3 - mpf(c6.numerator) / c6.denominator / 216) < mpf(2) ** -100 * (1 + abs(g3))


def test_37a1_real_period(lattices):
    # real period of 37a1, independent value
    L = lattices("37a1", 192)
    with mp.workprec(192):
        ref = mpf("2.9934586462319596298320099794525081777975837913701")
        assert abs(L.omega2 - ref) < mpf(10) ** -48
        assert L.omega1.real == 0


def test_lattice_orientation(lattices):
    for label in LABELS:
        L = lattices(label, 128)
        assert L.tau.imag > 0
        assert L.covol > 0
        u, v = L.reduced
        assert abs(u) <= abs(v) * (1 + mpf(2) ** -100)


@pytest.mark.parametrize("label", ["37a1", "389a1", "5077a1", "11a1", "15a1"])
def test_elliptic_log_inverts_wp(label, lattices):
    C = curve_by_label(label)
    ctx = PrecisionCtx(128)
    L = lattices(label, 128)
    gens = GENERATORS.get(label)
    if gens is None:
        from ellbloch.curve import torsion_points

        pts = [P for P in torsion_points(C) if not P.is_infinity]
    else:
        pts = [scalar_mul(C, n, pt(*gens[0])) for n in (1, -1, 2, 3, -4)]
    for P in pts:
        z = elliptic_log(C, L, P, ctx)
        with mp.workprec(ctx.work_bits):
            x, y = point_from_log(C, L, z.z)
            X, Y = mpf(P.x.numerator) / P.x.denominator, mpf(P.y.numerator) / P.y.denominator
            assert abs(x - X) < mpf(2) ** -100 * (1 + abs(X))
            assert abs(y - Y) < mpf(2) ** -100 * (1 + abs(Y))


def test_elliptic_log_is_additive(lattices):
    C = curve_by_label("37a1")
    ctx = PrecisionCtx(128)
    L = lattices("37a1", 128)
    P = pt(0, 0)
    z1 = elliptic_log(C, L, P, ctx).z
    z3 = elliptic_log(C, L, scalar_mul(C, 3, P), ctx).z
    with mp.workprec(ctx.work_bits):
        d = reduce_mod_lattice(3 * z1 - z3, L).z
        a, b = L.coords(d)
        assert min(abs(a), abs(1 - a)) < mpf(2) ** -100
        assert min(abs(b), abs(1 - b)) < mpf(2) ** -100


def test_torsion_log_is_rational_combination(lattices):
    C = curve_by_label("11a1")
    ctx = PrecisionCtx(128)
    L = lattices("11a1", 128)
    z = elliptic_log(C, L, pt(5, 5), ctx).z
    with mp.workprec(ctx.work_bits):
        a, b = L.coords(z)
        for c in (a, b):
            assert abs(5 * c - mpmath.nint(5 * c)) < mpf(2) ** -100


def test_reduce_mod_lattice_idempotent(lattices):
    L = lattices("389a1", 128)
    with mp.workprec(160):
        z = mpc("3.7", "-11.2")
        r1 = reduce_mod_lattice(z, L).z
        r2 = reduce_mod_lattice(r1, L).z
        assert r1 == r2
        a, b = L.coords(r1)
        assert 0 <= a < 1 and 0 <= b < 1


def test_wp_periodic_and_even(lattices):
    L = lattices("43a1", 128)
    with mp.workprec(160):
        z = mpc("0.123", "0.456")
        v = wp(z, L)
        assert abs(wp(z + L.omega1, L) - v) < mpf(2) ** -120 * abs(v)
        assert abs(wp(-z, L) - v) < mpf(2) ** -120 * abs(v)


def test_pontryagin_character(lattices):
    L = lattices("37a1", 128)
    with mp.workprec(160):
        z = mpc("0.31", "0.77")
        a = pontryagin(z, (1, 2), L)
        b = pontryagin(z, (-3, 1), L)
        assert abs(pontryagin(z, (-2, 3), L) - a * b) < mpf(2) ** -120
        assert abs(abs(a) - 1) < mpf(2) ** -120
        # trivial on lattice translates of z
        assert abs(pontryagin(z + L.omega2, (1, 2), L) - a) < mpf(2) ** -110


def test_gauss_reduce_preserves_lattice():
    with mp.workprec(100):
        u, v = gauss_reduce(mpc(7, 3), mpc(10, 4.5))
        det0 = (mpc(7, 3) * mpmath.conj(mpc(10, 4.5))).imag
        assert abs(abs((u * mpmath.conj(v)).imag) - abs(det0)) < mpf(2) ** -80
        assert abs((v * mpmath.conj(u)).real) <= abs(u) ** 2 / 2 + mpf(2) ** -80


def test_precision_floor():
    with pytest.raises(PrecisionUnderflowError):
        PrecisionCtx(32)


def test_log_rejects_off_curve(lattices):
    C = curve_by_label("37a1")
    with pytest.raises(PointNotOnCurveError):
        elliptic_log(C, lattices("37a1", 128), pt(1, 1), PrecisionCtx(128))


def test_periods_scale_with_precision():
    C = curve_by_label("53a1")
    L1 = periods(C, PrecisionCtx(128))
    L2 = periods(C, PrecisionCtx(256))
    with mp.workprec(256):
        assert abs(L1.omega2 - L2.omega2) < mpf(2) ** -120
        assert abs(L1.omega1 - L2.omega1) < mpf(2) ** -120
