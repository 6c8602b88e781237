from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GENERATORS, pt
from ellbloch.curve import (
    KNOWN_CURVES,
    O,
    CurvePoint,
    RationalCurve,
    add_points,
    bad_primes,
    check_dp,
    curve_by_label,
    local_data,
    minimal_discriminant_log_factors,
    n_torsion,
    negate,
    scalar_mul,
    torsion_order,
    torsion_points,
    transform,
)
from ellbloch.errors import PointNotOnCurveError

C37 = curve_by_label("37a1")
P37 = pt(0, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6))
def test_group_law_associative_and_linear(a, b, c):
    A, B, Cc = (scalar_mul(C37, n, P37) for n in (a, b, c))
    lhs = add_points(C37, add_points(C37, A, B), Cc)
    rhs = add_points(C37, A, add_points(C37, B, Cc))
    assert lhs == rhs == scalar_mul(C37, a + b + c, P37)


def test_identity_and_inverse():
    assert add_points(C37, P37, O) == P37
    assert add_points(C37, P37, negate(C37, P37)).is_infinity
    assert negate(C37, P37) == pt(0, -1)


def test_multiples_stay_on_curve():
    for n in range(-8, 9):
        assert C37.contains(scalar_mul(C37, n, P37))


def test_off_curve_rejected():
    with pytest.raises(PointNotOnCurveError):
        add_points(C37, pt(1, 1), P37)
    with pytest.raises(PointNotOnCurveError):
        C37.point(1, 1)


@pytest.mark.parametrize(
    "label,orders",
    [("11a1", [1, 5, 5, 5, 5]), ("37a1", [1]), ("15a1", [1, 2, 2, 2, 4, 4, 4, 4]), ("14a1", [1, 2, 3, 3, 6, 6])],
)
def test_torsion_subgroups(label, orders):
    C = curve_by_label(label)
    T = torsion_points(C)
    assert sorted(torsion_order(C, P) for P in T) == orders


def test_full_two_torsion():
    assert len(n_torsion(curve_by_label("15a1"), 2)) == 4
    assert len(n_torsion(curve_by_label("32a2"), 2)) == 4
    assert len(n_torsion(curve_by_label("37a1"), 2)) == 1


def test_generators_are_on_curves_and_non_torsion():
    for label, gens in GENERATORS.items():
        C = curve_by_label(label)
        for g in gens:
            P = pt(*g)
            assert C.contains(P)
            assert torsion_order(C, P) is None


@pytest.mark.parametrize("label,primes,disc", [("37a1", [37], {37: 1}), ("11a1", [11], {11: 5}), ("389a1", [389], {389: 1}), ("5077a1", [5077], {5077: 1})])
def test_bad_primes_and_minimal_discriminant(label, primes, disc):
    C = curve_by_label(label)
    assert bad_primes(C) == primes
    assert minimal_discriminant_log_factors(C) == disc


def test_nonminimal_model_reduces_back():
    # u = 1/2 multiplies a_i by 2^i, a model that is not minimal at 2
    C = curve_by_label("37a1")
    big = transform(C, Fraction(1, 2), 0, 0, 0)
    assert big.discriminant == C.discriminant * 2 ** 12
    ld = local_data(big, 2)
    assert ld.curve.discriminant == C.discriminant
    assert ld.v_disc == 0
    Q = pt(4, 0)  # image of 2P = (1, 0)
    assert big.contains(Q)
    assert ld.curve.contains(ld.map_point(Q))


def test_dp_check():
    C = curve_by_label("37a1")
    # differences that are multiples of P with integral x: the sections never meet
    rep = check_dp(C, [P37, scalar_mul(C, 2, P37), scalar_mul(C, 3, P37)], [2, 3, 5, 37])
    assert rep.holds


def test_dp_fails_when_sections_meet():
    C = curve_by_label("37a1")
    # 6P - P = 5P = (1/4, -5/8): the two sections meet over 2 and nowhere else
    assert scalar_mul(C, 5, P37).x == Fraction(1, 4)
    rep = check_dp(C, [P37, scalar_mul(C, 6, P37)], [2, 3, 5])
    assert not rep.holds
    assert rep.meeting[(0, 1)] == (2,)
    assert check_dp(C, [P37, scalar_mul(C, 6, P37)], []).holds


def test_json_roundtrip():
    for label, a in KNOWN_CURVES.items():
        C = curve_by_label(label)
        assert RationalCurve.from_json(C.to_json()) == C
    for P in (O, P37, pt("1/4", "-5/8")):
        assert CurvePoint.from_json(P.to_json()) == P


def test_unknown_label():
    with pytest.raises(ValueError):
        curve_by_label("999z9")
