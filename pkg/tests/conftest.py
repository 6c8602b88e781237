from fractions import Fraction

import pytest
from mpmath import mp

from ellbloch.analytic import PrecisionCtx, periods
from ellbloch.curve import CurvePoint, curve_by_label

# generators (or at least non-torsion points) used across the suite
GENERATORS = {
    "37a1": [(0, 0)],
    "43a1": [(0, 0)],
    "53a1": [(0, 0)],
    "389a1": [(-1, 1), (0, 0)],
    "5077a1": [(-2, 3), (-1, 3), (0, 2)],
}


def pt(x, y) -> CurvePoint:
    return CurvePoint.affine(Fraction(x), Fraction(y))


@pytest.fixture(autouse=True)
def _reset_mp():
    # some tests raise mp.prec; never leak it into the next one
    saved = mp.prec
    yield
    mp.prec = saved


@pytest.fixture(scope="session")
def ctx128():
    return PrecisionCtx(128)


@pytest.fixture(scope="session")
def ctx192():
    return PrecisionCtx(192)


@pytest.fixture(scope="session")
def lattices():
    cache = {}

    def get(label, prec=192):
        key = (label, prec)
        if key not in cache:
            cache[key] = periods(curve_by_label(label), PrecisionCtx(prec))
        return cache[key]

    return get
