"""Randomized self-test suites, reproducible from a seed."""

from __future__ import annotations

import random

from . import linalg as la
from .acyclic import (
    acyclic_extension,
    build_acyclic_F,
    e1_image,
    e1_rows,
    quotient_by_acyclic,
    quotient_filtered,
    random_acyclicity_data,
    random_short_exact,
    tensor_quasi_iso_check,
)
from .couple import check_exact, pages
from .filtered import cohomology_dims, couple_from_filtered, page_dims_direct, random_filtered_complex
from .split import random_split_pair, split_mono_quotient


def _nz(d):
    return {k: v for k, v in d.items() if v}


def suite_filtration(rng, count=200, max_length=4, max_dim=6):
    """Limit of the couple's spectral sequence against H^n, and pages against the direct oracle."""
    failures = []
    for it in range(count):
        C = random_filtered_complex(rng, length=rng.randint(1, max_length), max_dim=max_dim)
        c = couple_from_filtered(C)
        ss = pages(c, keep_couples=True)
        H = cohomology_dims(C)
        tot = ss.pages[-1].total_by_degree()
        if any(tot.get(n, 0) != H[n] for n in H) or not ss.converges:
            failures.append({"instance": it, "reason": "limit != cohomology"})
            continue
        for pg, cc in zip(ss.pages, ss.couples):
            if not check_exact(cc):
                failures.append({"instance": it, "reason": f"page {pg.r} couple not exact"})
                break
            if _nz(pg.dims) != page_dims_direct(C, pg.r):
                failures.append({"instance": it, "reason": f"page {pg.r} differs from the direct oracle"})
                break
    return {"name": "filtration", "count": count, "failures": failures}


def suite_two_step(rng, count=20):
    """Two-step filtrations: E_2 is already the limit."""
    failures = []
    for it in range(count):
        C = random_filtered_complex(rng, length=2, max_dim=6)
        ss = pages(couple_from_filtered(C), r_max=4)
        if ss.stable_from_page > 2 or _nz(ss.pages[1].dims) != _nz(ss.pages[-1].dims):
            failures.append({"instance": it})
    return {"name": "two_step", "count": count, "failures": failures}


def suite_acyclic_quotient(rng, count=50):
    failures = []
    for it in range(count):
        B = random_filtered_complex(rng, length=rng.randint(2, 4), max_dim=4)
        C, K = acyclic_extension(rng, B, pairs=rng.randint(1, 3))
        rows = e1_rows(C)
        Q = quotient_by_acyclic(rows, e1_image(C, K))
        sC = pages(couple_from_filtered(C))
        sQ = pages(couple_from_filtered(quotient_filtered(C, dict(K))))
        ok = Q.e2() == rows.cohomology() and _nz(sQ.pages[0].dims) == _nz(Q.rows.dims)
        for a, b in zip(sC.pages[1:], sQ.pages[1:]):
            ok = ok and _nz(a.dims) == _nz(b.dims) and _nz(a.diff_ranks) == _nz(b.diff_ranks)
        if not ok:
            failures.append({"instance": it})
    return {"name": "acyclic_quotient", "count": count, "failures": failures}


def suite_factory(rng, count=200):
    failures = []
    for it in range(count):
        data = random_acyclicity_data(rng)
        _, _, cert = build_acyclic_F(data)
        if not (cert.acyclic and cert.quotient_ok and cert.both_definitions_agree):
            failures.append({"instance": it, "certificate": cert.to_json()})
    return {"name": "acyclic_factory", "count": count, "failures": failures}


def suite_tensor(rng, count=100):
    failures = []
    for it in range(count):
        f, g = random_short_exact(rng)
        n = rng.randint(0, 3)
        rep = tensor_quasi_iso_check(f, g, n)
        if not rep.ok:
            failures.append({"instance": it, "report": rep.to_json()})
    return {"name": "tensor_quasi_iso", "count": count, "failures": failures}


def suite_split(rng, count=30):
    failures = []
    for it in range(count):
        c1 = couple_from_filtered(random_filtered_complex(rng, length=rng.randint(1, 3), max_dim=4))
        c2 = couple_from_filtered(random_filtered_complex(rng, length=rng.randint(1, 3), max_dim=4))
        sub, tot, io, rh = random_split_pair(rng, c1, c2)
        res = split_mono_quotient(sub, tot, io, rh, r_max=5)
        if not res.additive or not check_exact(res.quotient):
            failures.append({"instance": it})
    return {"name": "split_mono", "count": count, "failures": failures}


SUITES = {
    "filtration": suite_filtration,
    "two_step": suite_two_step,
    "acyclic_quotient": suite_acyclic_quotient,
    "acyclic_factory": suite_factory,
    "tensor_quasi_iso": suite_tensor,
    "split_mono": suite_split,
}


def run_selftest(seed: int = 0, suites=None, scale: float = 1.0) -> dict:
    """Run the named suites (all by default), each with its own seeded RNG."""
    names = list(SUITES) if not suites else list(suites)
    results = []
    for idx, name in enumerate(names):
        rng = random.Random(f"{seed}:{name}")
        fn = SUITES[name]
        default = fn.__defaults__[0]
        results.append(fn(rng, count=max(1, int(default * scale))))
    return {"seed": seed, "suites": results, "ok": all(not r["failures"] for r in results)}
