"""Acceptance criteria, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (shown even under
output capture) and then asserts.  Tolerances are pinned at the top.
"""

import json
import random
import subprocess
import sys
from fractions import Fraction

import mpmath
import pytest
from mpmath import mp, mpf

from conftest import GENERATORS, pt
from ellbloch.analytic import PrecisionCtx, elliptic_log, periods
from ellbloch.bloch import Divisor, HeightsProvider, check_kernel, goncharov_delta, mw_frame, symbol_dk
from ellbloch.cli import main
from ellbloch.curve import add_points, curve_by_label, negate, scalar_mul
from ellbloch.ekseries import EKClass, KroneckerEvaluator, g_value
from ellbloch.heights import global_height, limit_height, local_heights
from ellbloch.specseq.acyclic import build_acyclic_F, random_acyclicity_data, random_short_exact, tensor_quasi_iso_check
from ellbloch.specseq.couple import pages
from ellbloch.specseq.filtered import cohomology_dims, couple_from_filtered, random_filtered_complex

P_BITS = 192
CTX = PrecisionCtx(P_BITS)
EK_TOL = mpf(2) ** -(P_BITS - 16)  # criteria 1 and 2, scaled by max(1, |c|)
DIST_FACTOR = 10  # criterion 3: within 10 * tau
LIMIT_TOL = mpf("1e-10")  # criterion 5, limit oracle
HEIGHT_TAU = mpf(2) ** -(P_BITS // 2)  # criterion 5, quadraticity and parallelogram
EK_CURVES = ["11a1", "15a1", "37a1", "389a1", "5077a1"]
SEED = 20240601


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {detail}")

    return emit


def _scaled(x):
    return EK_TOL * max(mpf(1), abs(x))


# -- 1, 2: parity and reality ------------------------------------------------


@pytest.fixture(scope="module")
def ek_grid():
    rng = random.Random(SEED)
    rows = []
    for label in EK_CURVES:
        L = periods(curve_by_label(label), CTX)
        with mp.workprec(CTX.work_bits):
            for _ in range(20):
                z = mpf(rng.uniform(0.02, 0.98)) * L.omega1 + mpf(rng.uniform(0.02, 0.98)) * L.omega2
                ev_p, ev_m = KroneckerEvaluator(L, z, CTX), KroneckerEvaluator(L, -z, CTX)
                ev_p.prepare(6)
                ev_m.prepare(6)
                for k in range(2, 7):
                    rows.append((label, k, g_value(L, z, k, CTX, ev_p), g_value(L, -z, k, CTX, ev_m)))
    return rows


def test_01_ek_parity(ek_grid, report):
    worst, bad = mpf(0), 0
    with mp.workprec(CTX.work_bits):
        for _, k, gp, gm in ek_grid:
            for a, b in zip(gm.coeffs, gp.coeffs):
                d = abs(a - (-1) ** k * b)
                worst = max(worst, d / max(mpf(1), abs(b)))
                bad += d > _scaled(b)
    report(1, not bad, f"{len(ek_grid)} (curve, point, k) cases, worst scaled defect {mpmath.nstr(worst, 3)}, bound {mpmath.nstr(EK_TOL, 3)}")
    assert not bad


def test_02_ek_reality(ek_grid, report):
    worst, bad = mpf(0), 0
    with mp.workprec(CTX.work_bits):
        for _, k, gp, gm in ek_grid:
            for g in (gp, gm):
                scale = max(mpf(1), max(abs(c) for c in g.coeffs))
                d = g.reality_defect() / scale
                worst = max(worst, d)
                bad += d > EK_TOL
    report(2, not bad, f"{2 * len(ek_grid)} classes, worst scaled defect {mpmath.nstr(worst, 3)}")
    assert not bad


# -- 3: distribution law -----------------------------------------------------


def test_03_distribution_law(report):
    rng = random.Random(SEED + 3)
    checks, bad, worst = 0, 0, mpf(0)
    for label in ("37a1", "11a1"):
        L = periods(curve_by_label(label), CTX)
        with mp.workprec(CTX.work_bits):
            z = mpf(rng.uniform(0.05, 0.95)) * L.omega1 + mpf(rng.uniform(0.05, 0.95)) * L.omega2
            for N in (2, 3):
                shifts = [z + (i * L.omega1 + j * L.omega2) / N for i in range(N) for j in range(N)]
                evs = [KroneckerEvaluator(L, t, CTX) for t in shifts]
                ev_N = KroneckerEvaluator(L, N * z, CTX)
                for ev in evs + [ev_N]:
                    ev.prepare(5)
                for k in range(2, 6):
                    for a in range(k - 1):
                        b = k - 2 - a
                        parts = [ev.kronecker(a, b) for ev in evs]
                        lhs = mpmath.fsum(v for v, _ in parts)
                        rv, re_ = ev_N.kronecker(a, b)
                        rhs = mpf(N) ** (2 - k) * rv
                        tau = sum(e for _, e in parts) + re_ + CTX.tol * (1 + abs(lhs))
                        d = abs(lhs - rhs)
                        worst = max(worst, d / tau)
                        checks += 1
                        bad += d > DIST_FACTOR * tau
    report(3, not bad, f"{checks} (curve, N, a, b) identities, worst |lhs-rhs|/tau = {mpmath.nstr(worst, 3)} (limit {DIST_FACTOR})")
    assert not bad


# -- 4: regulator normalization through the CLI -------------------------------


def _cli_regulator(div, tmp_path):
    out = tmp_path / "rep.json"
    code = main(["regulator", "--divisor", json.dumps(div), "--prec-bits", str(P_BITS), "-o", str(out)])
    return code, json.loads(out.read_text())


def test_04_regulator_normalization(tmp_path, report):
    cases = [
        {"curve": "11a1", "k": 3, "terms": [{"lambda": 1, "point": {"x": 5, "y": 5}}]},
        {"curve": "11a1", "k": 3, "terms": [{"lambda": 1, "point": {"x": 5, "y": 5}}, {"lambda": "-1/2", "point": {"x": 16, "y": 60}}]},
        {"curve": "15a1", "k": 3, "terms": [{"lambda": 2, "point": {"x": -2, "y": 3}}, {"lambda": -1, "point": {"x": 3, "y": -2}}]},
    ]
    mismatches = []
    for div in cases:
        code, rep = _cli_regulator(div, tmp_path)
        C = curve_by_label(div["curve"])
        L = periods(C, CTX)
        with mp.workprec(CTX.work_bits):
            acc = [mpf(0)] * 2
            for t in div["terms"]:
                P = pt(t["point"]["x"], t["point"]["y"])
                lam = Fraction(t["lambda"])
                g = g_value(L, elliptic_log(C, L, P, CTX), 3, CTX)
                acc = [s + (c * lam.numerator) / lam.denominator for s, c in zip(acc, g.coeffs)]
            expect = [3 * s for s in acc]
        got = EKClass.from_json(rep["results"]["regulator"]).coeffs
        same = code == 0 and all(
            (x.real._mpf_, x.imag._mpf_) == (y.real._mpf_, y.imag._mpf_) for x, y in zip(got, expect)
        )
        if not same:
            mismatches.append(div)
    report(4, not mismatches, f"{len(cases)} torsion divisors at k=3, CLI value == 3 * sum lambda g bit for bit in {len(cases) - len(mismatches)}")
    assert not mismatches


# -- 5: heights ----------------------------------------------------------------


def _height_points():
    out = []
    for label in ("37a1", "43a1", "53a1", "389a1", "5077a1"):
        C = curve_by_label(label)
        gens = [pt(*g) for g in GENERATORS[label]]
        if len(gens) == 1:
            P = gens[0]
            pts = [P, negate(C, P), scalar_mul(C, 2, P), scalar_mul(C, -2, P)]
        elif len(gens) == 2:
            P, Q = gens
            pts = [P, Q, add_points(C, P, Q), add_points(C, P, negate(C, Q))]
        else:
            P, Q, R = gens
            pts = [P, Q, R, add_points(C, P, Q)]
        out += [(C, X) for X in pts]
    return out


def test_05_heights(report):
    pts = _height_points()
    assert len(pts) == 20 and pts[0][1] == pt(0, 0)
    with mp.workprec(CTX.work_bits):
        limit_gap = max(abs(global_height(C, P, CTX) - limit_height(C, P, 8, P_BITS)) for C, P in pts)
        quad_gap = mpf(0)
        par_gap = mpf(0)
        for C, P in pts[::4]:
            h1 = global_height(C, P, CTX)
            for n in range(2, 6):
                quad_gap = max(quad_gap, abs(global_height(C, scalar_mul(C, n, P), CTX) - n * n * h1))
        for C, P, Q in [(pts[4 * i][0], pts[4 * i][1], pts[4 * i + 2][1]) for i in range(5)]:
            s, d = add_points(C, P, Q), add_points(C, P, negate(C, Q))
            lhs = global_height(C, s, CTX) + (global_height(C, d, CTX) if not d.is_infinity else 0)
            par_gap = max(par_gap, abs(lhs - 2 * global_height(C, P, CTX) - 2 * global_height(C, Q, CTX)))
    ok_limit = limit_gap <= LIMIT_TOL
    ok_quad = quad_gap <= 10 * HEIGHT_TAU
    ok_par = par_gap <= 10 * HEIGHT_TAU
    report(
        5,
        ok_limit and ok_quad and ok_par,
        f"limit oracle n=8 worst gap {mpmath.nstr(limit_gap, 3)} vs {mpmath.nstr(LIMIT_TOL, 2)} "
        f"({'ok' if ok_limit else 'not met: the oracle itself converges like 4^-n'}); "
        f"quadraticity {mpmath.nstr(quad_gap, 3)}, parallelogram {mpmath.nstr(par_gap, 3)} vs 10*tau={mpmath.nstr(10 * HEIGHT_TAU, 3)}",
    )
    assert ok_quad and ok_par
    assert ok_limit, "limit-oracle tolerance 1e-10 at n=8 is not attainable; see the decisions ledger"


# -- 6: kernel checker -----------------------------------------------------------


def _brute_multiple(C, G, P, bound=12):
    """m with mG == P, found by walking the group law."""
    Q = G
    for m in range(1, bound + 1):
        if Q == P:
            return m
        if negate(C, Q) == P:
            return -m
        Q = add_points(C, Q, G)
    raise AssertionError(f"{P} not within {bound} multiples")


def test_06_kernel_checker(report):
    torsion_ok = 0
    torsion_cases = [
        ("11a1", [((5, 5), 1), ((16, -61), "-3/2")]),
        ("11a1", [((16, 60), 2)]),
        ("15a1", [((-2, 3), 1), ((8, 18), -1), ((3, -2), "1/3")]),
    ]
    for label, terms in torsion_cases:
        C = curve_by_label(label)
        for k in (2, 3):
            D = Divisor.make(C, [(pt(*xy), lam) for xy, lam in terms], k)
            torsion_ok += check_kernel(D, ctx=PrecisionCtx(128)).overall == "exact_pass"

    C = curve_by_label("37a1")
    G = pt(0, 0)
    ctx = PrecisionCtx(128)
    hp = HeightsProvider(C, ctx)
    pool = [scalar_mul(C, n, G) for n in (-4, -3, -2, -1, 1, 2, 3, 4)]
    rng = random.Random(SEED + 6)
    agree, n_pass, total = 0, 0, 0
    while total < 100:
        chosen = [rng.choice(pool) for _ in range(rng.randint(1, 4))]
        lams = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in chosen]
        mult = [_brute_multiple(C, G, P) for P in chosen]
        if rng.random() < 0.5 and len(chosen) > 1:
            # force the cubic relation on half the samples
            lams[-1] = -sum(l * m ** 3 for l, m in zip(lams[:-1], mult[:-1])) / Fraction(mult[-1] ** 3)
        D = Divisor.make(C, list(zip(chosen, lams)), 3)
        if not D.terms:
            continue
        total += 1
        brute = sum((lam * _brute_multiple(C, G, P) ** 3 for P, lam in D.terms), Fraction(0)) == 0
        got = check_kernel(D, hp, ctx).condition_i == "pass_exact"
        agree += brute == got
        n_pass += brute
    ok = torsion_ok == 6 and agree == total
    report(6, ok, f"torsion exact_pass {torsion_ok}/6; condition (i) agrees with brute force on {agree}/{total} rank-1 divisors ({n_pass} vanishing)")
    assert ok


# -- 7: symbol differential and delta ----------------------------------------------


def test_07_symbol_and_delta(report):
    C = curve_by_label("389a1")
    P1, P2 = (pt(*g) for g in GENERATORS["389a1"])
    pts = [add_points(C, scalar_mul(C, a, P1), scalar_mul(C, b, P2)) for a in range(-2, 3) for b in range(-2, 3) if a or b]
    rng = random.Random(SEED + 7)
    sym_ok = 0
    for k in range(2, 7):
        D = Divisor.make(C, [(rng.choice(pts), rng.randint(-5, 5) or 1) for _ in range(3)], k)
        t = symbol_dk(D)
        sym_ok += (t.left_level, t.right_level) == (k - 1, 1) and t.terms == D.terms
    fr = mw_frame(pts, C, PrecisionCtx(128), HeightsProvider(C, PrecisionCtx(128)))
    zero = 0
    for _ in range(200):
        terms = [(rng.choice(pts), Fraction(rng.randint(-5, 5), rng.randint(1, 3))) for _ in range(rng.randint(1, 5))]
        D = Divisor.make(C, terms, 1)
        zero += goncharov_delta(goncharov_delta(D, fr), fr).is_zero()
    ok = sym_ok == 5 and zero == 200
    report(7, ok, f"symbol_dk formal identity for k=2..6: {sym_ok}/5; delta o delta = 0 on {zero}/200 divisors")
    assert ok


# -- 8, 9: spectral sequences --------------------------------------------------------


def test_08_spectral_sequence_oracle(report):
    rng = random.Random(SEED + 8)
    good = 0
    for _ in range(200):
        C = random_filtered_complex(rng, length=rng.randint(1, 4), max_dim=6)
        ss = pages(couple_from_filtered(C))
        tot = ss.pages[-1].total_by_degree()
        good += ss.converges and all(tot.get(n, 0) == h for n, h in cohomology_dims(C).items())
    two = 0
    for _ in range(20):
        C = random_filtered_complex(rng, length=2, max_dim=6)
        ss = pages(couple_from_filtered(C), r_max=4)
        nz = [{k: v for k, v in pg.dims.items() if v} for pg in ss.pages]
        two += ss.stable_from_page <= 2 and nz[1] == nz[-1]
    ok = good == 200 and two == 20
    report(8, ok, f"E_inf totals equal H^n on {good}/200 complexes; two-step case degenerates at E_2 on {two}/20")
    assert ok


def test_09_factory_and_short_exact(report):
    rng = random.Random(SEED + 9)
    good = 0
    for _ in range(200):
        _, _, cert = build_acyclic_F(random_acyclicity_data(rng))
        good += cert.acyclic and cert.quotient_ok
    ses = 0
    for _ in range(100):
        f, g = random_short_exact(rng)
        ses += tensor_quasi_iso_check(f, g, rng.randint(0, 3)).ok
    ok = good == 200 and ses == 100
    report(9, ok, f"factory instances acyclic with matching quotient dims {good}/200; short exact sequences {ses}/100")
    assert ok


# -- 10: reproducibility ----------------------------------------------------------


REPRO_JOBS = [
    ["periods", "--curve", "389a1"],
    ["ek", "--curve", "37a1", "--point", "0,0", "--k", "4"],
    ["heights", "--curve", "37a1", "--point", "1/4,-5/8"],
    ["regulator", "--divisor", json.dumps({"curve": "11a1", "k": 3, "terms": [{"lambda": 1, "point": {"x": 5, "y": 5}}]})],
    ["specseq-selftest", "--scale", "0.05", "--seed", "3"],
]


def test_10_reproducibility(report):
    same = 0
    for argv in REPRO_JOBS:
        outs = [
            subprocess.run([sys.executable, "-m", "ellbloch.cli", *argv, "--prec-bits", "128"], capture_output=True, check=False).stdout
            for _ in range(2)
        ]
        same += outs[0] == outs[1] and len(outs[0]) > 0
    ok = same == len(REPRO_JOBS)
    report(10, ok, f"{same}/{len(REPRO_JOBS)} commands give byte-identical reports across two processes")
    assert ok
