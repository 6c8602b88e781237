import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from conftest import pt
from ellbloch.analytic import PrecisionCtx, elliptic_log
from ellbloch.bloch import (
    Divisor,
    HeightsProvider,
    WedgeElement,
    check_kernel,
    goncharov_delta,
    mw_frame,
    norm_push,
    regulator,
    sym_power_coeffs,
    symbol_dk,
)
from ellbloch.curve import O, add_points, curve_by_label, negate, scalar_mul
from ellbloch.ekseries import eis_value, g_value
from ellbloch.errors import (
    MissingRationalTorsionError,
    PointNotOnCurveError,
    UnsupportedLevelError,
    UnverifiableRelationError,
)

CTX = PrecisionCtx(128)
C37 = curve_by_label("37a1")
P = pt(0, 0)
C389 = curve_by_label("389a1")
P1, P2 = pt(-1, 1), pt(0, 0)
C11 = curve_by_label("11a1")
T5 = pt(5, 5)


@pytest.fixture(scope="module")
def hp37():
    return HeightsProvider(C37, CTX)


@pytest.fixture(scope="module")
def hp389():
    return HeightsProvider(C389, CTX)


def mult(n, Q=P, C=C37):
    return scalar_mul(C, n, Q)


# -- divisors ---------------------------------------------------------------


def test_divisor_merges_and_drops_zero_terms():
    D = Divisor.make(C37, [(P, 1), (mult(2), 2), (P, -1)], 2)
    assert D.terms == ((mult(2), Fraction(2)),)
    assert not Divisor.make(C37, [(P, 1), (P, -1)], 2)


def test_divisor_rejects_bad_points():
    with pytest.raises(PointNotOnCurveError):
        Divisor.make(C37, [(O, 1)], 2)
    with pytest.raises(PointNotOnCurveError):
        Divisor.make(C37, [(pt(1, 1), 1)], 2)
    with pytest.raises(ValueError):
        Divisor.make(C37, [(P, 1)], 0)


def test_divisor_dp_over_a_base():
    Divisor.make(C37, [(P, 1), (mult(2), 1)], 2, base_primes=[2, 3])
    with pytest.raises(ValueError):
        Divisor.make(C37, [(P, 1), (mult(6), 1)], 2, base_primes=[2])


def test_divisor_arithmetic_and_json():
    D = Divisor.make(C37, [(P, 1), (mult(3), "1/2")], 3)
    E = D + D.scale(-2)
    assert E == D.scale(-1)
    assert Divisor.from_json(D.to_json()) == D
    with pytest.raises(ValueError):
        D + D.at_level(2)


# -- Mordell-Weil frames -------------------------------------------------


def test_frame_rank_one(hp37):
    fr = mw_frame([P, mult(2), mult(3), mult(-5)], C37, CTX, hp37)
    assert fr.rank == 1
    assert [fr.coords(Q)[0] for Q in (P, mult(2), mult(3), mult(-5))] == [1, 2, 3, -5]


def test_frame_fractional_coordinates(hp37):
    fr = mw_frame([mult(2), P, mult(3)], C37, CTX, hp37)
    assert fr.basis == [mult(2)]
    assert fr.coords(P) == (Fraction(1, 2),)
    assert fr.coords(mult(3)) == (Fraction(3, 2),)
    assert fr.certificates[P][0] == 2


def test_frame_rank_two(hp389):
    S = add_points(C389, P1, P2)
    fr = mw_frame([P1, P2, S, negate(C389, P2)], C389, CTX, hp389)
    assert fr.rank == 2
    assert fr.coords(S) == (1, 1)
    assert fr.coords(negate(C389, P2)) == (0, -1)


def test_frame_torsion_rows():
    fr = mw_frame([T5, pt(16, 60)], C11, CTX)
    assert fr.rank == 0
    assert fr.coords(T5) == ()
    assert fr.certificates[T5] == (1, 5)


class _LyingHeights:
    """Claims every pair of points is proportional."""

    def pairing(self, A, B):
        return mpf(1)


def test_frame_refuses_unverified_relation():
    with pytest.raises(UnverifiableRelationError):
        mw_frame([P1, P2], C389, CTX, _LyingHeights())


# -- Goncharov differential and symbols ------------------------------------


def test_delta_example(hp389):
    fr = mw_frame([P1, P2, add_points(C389, P1, P2)], C389, CTX, hp389)
    D = Divisor.make(C389, [(add_points(C389, P1, P2), 1)], 1)
    x = goncharov_delta(D, fr)
    S = add_points(C389, P1, P2)
    assert x.as_dict() == {(S, (0,)): 1, (S, (1,)): 1}
    y = goncharov_delta(x, fr)
    # s ^ s = 0: the two cross terms cancel
    assert y.is_zero()
    assert y.degree == 2


def test_delta_squared_zero_random(hp389):
    rng = random.Random(7)
    pts = [add_points(C389, scalar_mul(C389, a, P1), scalar_mul(C389, b, P2)) for a in range(-2, 3) for b in range(-2, 3) if a or b]
    fr = mw_frame(pts, C389, CTX, hp389)
    for _ in range(25):
        terms = [(rng.choice(pts), rng.randint(-5, 5)) for _ in range(rng.randint(1, 5))]
        D = Divisor.make(C389, terms, 1)
        assert goncharov_delta(goncharov_delta(D, fr), fr).is_zero()


def test_wedge_context_checked(hp37):
    fr = mw_frame([P], C37, CTX, hp37)
    with pytest.raises(ValueError):
        goncharov_delta(Divisor.make(C37, [(P, 1)], 1), fr, wedge_context=1)
    assert WedgeElement.make(0, {}).is_zero()


@pytest.mark.parametrize("k", range(1, 7))
def test_symbol_dk(k):
    D = Divisor.make(C37, [(P, 2), (mult(3), -1)], k)
    t = symbol_dk(D)
    if k == 1:
        assert t.is_zero()
    else:
        assert (t.left_level, t.right_level) == (k - 1, 1)
        assert t.terms == D.terms


def test_sym_power_coeffs_matches_expansion():
    vw = [((Fraction(1), Fraction(2)), Fraction(3)), ((Fraction(-1), Fraction(1)), Fraction(1, 2))]
    c = sym_power_coeffs(vw, 3)
    # sum lam (v1 x + v2 y)^3 expanded by hand
    exp = {}
    for (v1, v2), lam in vw:
        for i, binom in enumerate((1, 3, 3, 1)):
            key = (3 - i, i)
            exp[key] = exp.get(key, 0) + lam * binom * v1 ** (3 - i) * v2 ** i
    assert c == {k: v for k, v in exp.items() if v}


# -- kernel conditions ---------------------------------------------------


def test_kernel_rejects_level_one():
    with pytest.raises(UnsupportedLevelError):
        check_kernel(Divisor.make(C37, [(P, 1)], 1), ctx=CTX)


@pytest.mark.parametrize("k", [2, 3])
def test_torsion_divisors_exact_pass(k):
    D = Divisor.make(C11, [(T5, 1), (pt(16, -61), "-3/2")], k)
    v = check_kernel(D, ctx=CTX)
    assert v.overall == "exact_pass"
    assert v.rank == 0


def test_kernel_level_two(hp37):
    assert check_kernel(Divisor.make(C37, [(mult(2), 1), (P, -4)], 2), hp37, CTX).overall == "exact_pass"
    bad = check_kernel(Divisor.make(C37, [(mult(2), 1), (P, -2)], 2), hp37, CTX)
    assert bad.overall == "fail"
    assert bad.witness == [1] or bad.witness == [-1]


def test_kernel_level_three(hp37):
    v = check_kernel(Divisor.make(C37, [(mult(2), 1), (P, -8)], 3), hp37, CTX)
    assert v.condition_i == "pass_exact"
    assert v.overall == "numeric_pass"
    assert not any(r.exact for r in v.condition_ii if r.place == "inf")
    # a symmetric divisor is exactly in the kernel: grouping s with -s cancels
    w = check_kernel(Divisor.make(C37, [(P, 1), (negate(C37, P), 1)], 3), hp37, CTX)
    assert w.overall == "exact_pass"


def test_kernel_extrapolation_flag(hp37):
    v = check_kernel(Divisor.make(C37, [(P, 1), (negate(C37, P), -1)], 4), hp37, CTX)
    assert v.extrapolated
    assert "note" in v.to_json()


# -- regulator and norms -------------------------------------------------


def test_regulator_torsion_is_three_g(lattices):
    L = lattices("11a1", 128)
    D = Divisor.make(C11, [(T5, 1)], 3)
    res = regulator(D, L, CTX)
    assert res.verdict.overall == "exact_pass"
    z = elliptic_log(C11, L, T5, CTX)
    g = g_value(L, z.z, 3, CTX)
    with mp.workprec(CTX.work_bits):
        assert res.value.coeffs == [3 * c for c in g.coeffs]


def test_regulator_cancels_on_symmetric_divisor(lattices):
    L = lattices("37a1", 128)
    res = regulator(Divisor.make(C37, [(P, 1), (negate(C37, P), 1)], 3), L, CTX)
    assert max(abs(c) for c in res.value.coeffs) < mpf(2) ** -100


def test_norm_push_degrees():
    D = Divisor.make(curve_by_label("15a1"), [(pt(-2, 3), 1)], 3)
    push = norm_push(D, 2)
    assert push.full_kernel and push.deg == 4
    assert len(push.expanded.terms) == 4
    D37 = Divisor.make(C37, [(P, 1)], 3)
    push = norm_push(D37, 2)
    assert push.deg == 1 and push.contracted.terms == ((mult(2), Fraction(1)),)
    with pytest.raises(MissingRationalTorsionError) as ei:
        norm_push(Divisor.make(C11, [(T5, 1)], 3), 5)
    assert len(ei.value.available) == 5


def test_norm_push_distribution(lattices):
    C = curve_by_label("15a1")
    L = lattices("15a1", 128)
    D = Divisor.make(C, [(pt(-2, 3), 1), (pt(8, 18), -2)], 4)
    push = norm_push(D, 2)

    def eis(div):
        return eis_value([(lam, elliptic_log(C, L, Q, CTX)) for Q, lam in div.terms], div.k, L, CTX)

    lhs, rhs = eis(push.expanded), eis(push.contracted)
    with mp.workprec(CTX.work_bits):
        for a, b in zip(lhs.coeffs, rhs.coeffs):
            assert abs(a - b / 16) < mpf(2) ** -100 * (1 + abs(a))
