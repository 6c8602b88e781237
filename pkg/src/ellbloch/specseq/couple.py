"""Bigraded exact couples over Q, derived couples and their spectral sequences.

Bidegrees follow the cohomological convention: ``i`` is (-1, 1), ``j`` is
(0, 0) on the first page and ``k`` is (1, 0), so ``d_1 = j k`` has bidegree
(1, 0) and the r-th derived couple has ``j`` of bidegree (r-1, 1-r).

A couple may declare ``stable_from = s``: columns ``p > s`` of D are not
stored, ``D^{p,q}`` there is identified with ``D^{s, q+p-s}`` and ``i`` is the
identity.  E must vanish in columns ``p >= s``.  This finite encoding is what
makes "i is an isomorphism for p >= 1" checkable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import HypothesisViolationError, NonExactCoupleError, ShapeMismatchError
from . import linalg as la


@dataclass(frozen=True)
class BigradedModule:
    dims: tuple  # sorted ((p, q), dim) with dim > 0

    @classmethod
    def make(cls, dims: dict) -> "BigradedModule":
        return cls(tuple(sorted((tuple(k), int(v)) for k, v in dims.items() if v)))

    def dim(self, p: int, q: int) -> int:
        return dict(self.dims).get((p, q), 0)

    def support(self) -> list:
        return [k for k, _ in self.dims]

    def as_dict(self) -> dict:
        return dict(self.dims)

    def total(self) -> int:
        return sum(v for _, v in self.dims)

    def to_json(self):
        return [{"p": p, "q": q, "dim": d} for (p, q), d in self.dims]


@dataclass
class GradedMap:
    bidegree: tuple
    mats: dict  # (p, q) of the source -> matrix (target dim x source dim)

    def at(self, p: int, q: int, src_dim: int, tgt_dim: int):
        M = self.mats.get((p, q))
        if M is None:
            return la.zeros(tgt_dim, src_dim)
        if M.shape != (tgt_dim, src_dim):
            raise ShapeMismatchError(f"map of bidegree {self.bidegree} at {(p, q)} has shape {M.shape}, expected {(tgt_dim, src_dim)}")
        return M

    def to_json(self):
        return {
            "bidegree": list(self.bidegree),
            "mats": [{"p": p, "q": q, "matrix": la.to_json(M)} for (p, q), M in sorted(self.mats.items())],
        }


def _shift(pq, deg):
    return (pq[0] + deg[0], pq[1] + deg[1])


@dataclass
class ExactCouple:
    D: BigradedModule
    E: BigradedModule
    i: GradedMap
    j: GradedMap
    k: GradedMap
    stable_from: Optional[int] = None
    page: int = 1
    E_reps: dict = field(default_factory=dict, repr=False)  # (p,q) -> basis in page-1 coordinates

    # -- access with the implicit stable tail -----------------------

    def _canon_D(self, p: int, q: int):
        s = self.stable_from
        if s is not None and p > s:
            return (s, q + p - s)
        return (p, q)

    def d_dim(self, p: int, q: int) -> int:
        return self.D.dim(*self._canon_D(p, q))

    def e_dim(self, p: int, q: int) -> int:
        if self.stable_from is not None and p >= self.stable_from:
            return 0
        return self.E.dim(p, q)

    def i_at(self, p: int, q: int):
        """i: D^{p,q} -> D^{p-1,q+1}."""
        s = self.stable_from
        if s is not None and p > s:
            return la.eye(self.d_dim(p, q))
        return self.i.at(p, q, self.d_dim(p, q), self.d_dim(p - 1, q + 1))

    def j_at(self, p: int, q: int):
        t = _shift((p, q), self.j.bidegree)
        src = self.d_dim(p, q)
        tgt = self.e_dim(*t)
        s = self.stable_from
        if s is not None and p > s:
            return la.zeros(tgt, src)
        return self.j.at(p, q, src, tgt)

    def k_at(self, p: int, q: int):
        t = _shift((p, q), self.k.bidegree)
        return self.k.at(p, q, self.e_dim(p, q), self.d_dim(*t))

    def diff_bidegree(self) -> tuple:
        return _shift(self.j.bidegree, self.k.bidegree)

    def d_at(self, p: int, q: int):
        """``j k`` on E^{p,q}."""
        t = _shift((p, q), self.k.bidegree)
        return la.mul(self.j_at(*t), self.k_at(p, q))

    def bidegrees(self) -> list:
        """Every bidegree where some piece is stored, plus the neighbours the checks touch."""
        pts = set(self.D.support()) | set(self.E.support())
        extra = set()
        for (p, q) in pts:
            extra.add((p - 1, q + 1))
            extra.add((p + 1, q - 1))
            extra.add(_shift((p, q), self.k.bidegree))
            extra.add(_shift((p, q), self.j.bidegree))
            extra.add((p - self.j.bidegree[0], q - self.j.bidegree[1]))
            extra.add((p - self.k.bidegree[0], q - self.k.bidegree[1]))
        out = pts | extra
        if self.stable_from is not None:
            out = {self._canon_D(*pq) if pq[0] > self.stable_from else pq for pq in out}
        return sorted(out)

    def to_json(self):
        return {
            "page": self.page,
            "stable_from": self.stable_from,
            "D": self.D.to_json(),
            "E": self.E.to_json(),
            "i": self.i.to_json(),
            "j": self.j.to_json(),
            "k": self.k.to_json(),
        }

    @classmethod
    def from_json(cls, obj) -> "ExactCouple":
        def mod(lst):
            return BigradedModule.make({(e["p"], e["q"]): e["dim"] for e in lst})

        def gmap(o):
            return GradedMap(tuple(o["bidegree"]), {(e["p"], e["q"]): la.from_json(e["matrix"]) for e in o["mats"]})

        return cls(mod(obj["D"]), mod(obj["E"]), gmap(obj["i"]), gmap(obj["j"]), gmap(obj["k"]), obj.get("stable_from"), obj.get("page", 1))


# -- exactness --------------------------------------------------------------


@dataclass
class ExactnessReport:
    ok: bool
    locus: Optional[tuple] = None  # (vertex, (p, q))
    detail: str = ""

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"ok": self.ok, "locus": list(self.locus) if self.locus else None, "detail": self.detail}


def _vertex_exact(f, g, dim_mid) -> bool:
    if not la.is_zero(la.mul(g, f)):
        return False
    return la.rank(f) + la.rank(g) == dim_mid


def check_exact(c: ExactCouple) -> ExactnessReport:
    """Rank test of ``im = ker`` at the three vertices in every bidegree."""
    if c.stable_from is not None:
        for (p, q) in c.E.support():
            if p >= c.stable_from:
                return ExactnessReport(False, ("E", (p, q)), "E must vanish in the stable range")
    kd, jd = c.k.bidegree, c.j.bidegree
    for (p, q) in c.bidegrees():
        # D^{p,q}: image of i from D^{p+1,q-1}, kernel of j
        f = c.i_at(p + 1, q - 1)
        g = c.j_at(p, q)
        if not _vertex_exact(f, g, c.d_dim(p, q)):
            return ExactnessReport(False, ("D:i->j", (p, q)), "im i != ker j")
        # E^{p,q}: image of j, kernel of k
        src = (p - jd[0], q - jd[1])
        f = c.j_at(*src)
        g = c.k_at(p, q)
        if not _vertex_exact(f, g, c.e_dim(p, q)):
            return ExactnessReport(False, ("E:j->k", (p, q)), "im j != ker k")
        # D^{p,q}: image of k, kernel of i
        src = (p - kd[0], q - kd[1])
        f = c.k_at(*src)
        g = c.i_at(p, q)
        if not _vertex_exact(f, g, c.d_dim(p, q)):
            return ExactnessReport(False, ("D:k->i", (p, q)), "im k != ker i")
    return ExactnessReport(True)


# -- derivation ---------------------------------------------------------------


class _Homology:
    """Cycles mod boundaries inside one E^{p,q}."""

    def __init__(self, cycles, boundaries):
        self.B = la.colspace(boundaries)
        self.H = la.complement(self.B, cycles)
        self._basis = la.hcat(self.B, self.H, rows=cycles.shape[0])

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    def coords(self, V):
        X = la.solve(self._basis, V)
        return la.rows_of(X, range(self.B.shape[1], self._basis.shape[1]))


def _preimage(A, X):
    """Some ``Y`` with ``A Y = X`` (columns), using the greedy independent columns of A."""
    piv = la.pivots(A)
    sub = la.columns(A, piv)
    C = la.solve(sub, X)
    n = A.shape[1]
    rows = [[0] * X.shape[1] for _ in range(n)]
    Cr = la.to_rows(C)
    for r, p in enumerate(piv):
        rows[p] = Cr[r]
    return la.from_rows(rows, n, X.shape[1])


def derive(c: ExactCouple, check: bool = True, rng=None) -> ExactCouple:
    """The derived couple ``(im i, H(E, jk))``.

    ``j'`` is evaluated on two different preimages under ``i``; the classes
    must agree, otherwise the input was not exact.
    """
    import random as _random

    rng = rng or _random.Random(0)
    if check:
        rep = check_exact(c)
        if not rep:
            raise NonExactCoupleError(f"input couple is not exact at {rep.locus}: {rep.detail}")
    kd, jd = c.k.bidegree, c.j.bidegree
    dd = c.diff_bidegree()
    s = c.stable_from

    # D' = im i inside each stored D^{p,q}
    Dbasis = {}
    for (p, q) in c.D.support():
        Dbasis[(p, q)] = la.colspace(c.i_at(p + 1, q - 1))

    def dbasis(p, q):
        key = c._canon_D(p, q)
        if key in Dbasis:
            return Dbasis[key]
        return la.zeros(c.d_dim(p, q), 0)

    # E' = ker d / im d
    hom = {}
    for (p, q) in c.E.support():
        if s is not None and p >= s:
            continue
        cyc = la.nullspace(c.d_at(p, q))
        bnd = c.d_at(p - dd[0], q - dd[1])
        hom[(p, q)] = _Homology(cyc, bnd)

    newD = BigradedModule.make({pq: B.shape[1] for pq, B in Dbasis.items()})
    newE = BigradedModule.make({pq: h.dim for pq, h in hom.items()})

    i_m, j_m, k_m = {}, {}, {}
    for (p, q), B in Dbasis.items():
        if not B.shape[1]:
            continue
        # i'
        img = la.mul(c.i_at(p, q), B)
        tgt = dbasis(p - 1, q + 1)
        i_m[(p, q)] = la.solve(tgt, img) if tgt.shape[1] else la.zeros(0, B.shape[1])
        # j' through a preimage under i
        src = (p + 1, q - 1)
        tpq = _shift(src, jd)
        h = hom.get(tpq)
        if h is None or h.dim == 0:
            continue
        if s is not None and src[0] > s:
            continue  # j vanishes on the stable tail
        A = c.i_at(*src)
        Y1 = _preimage(A, B)
        N = la.nullspace(A)
        if N.shape[1]:
            R = la.random_matrix(rng, N.shape[1], B.shape[1], -3, 3)
            Y2 = la.add(Y1, la.mul(N, R))
        else:
            Y2 = Y1
        J = c.j_at(*src)
        c1 = h.coords(la.mul(J, Y1))
        c2 = h.coords(la.mul(J, Y2))
        if la.to_rows(c1) != la.to_rows(c2):
            raise NonExactCoupleError(f"j' depends on the preimage at {(p, q)}")
        j_m[(p, q)] = c1
    for (p, q), h in hom.items():
        if not h.dim:
            continue
        t = _shift((p, q), kd)
        tgt = dbasis(*t)
        img = la.mul(c.k_at(p, q), h.H)
        if tgt.shape[1]:
            k_m[(p, q)] = la.solve(tgt, img)
        elif not la.is_zero(img):
            raise NonExactCoupleError(f"k of a cycle leaves im i at {(p, q)}")

    # E' representatives in first-page coordinates
    reps = {}
    for pq, h in hom.items():
        prev = c.E_reps.get(pq)
        reps[pq] = la.mul(prev, h.H) if prev is not None else h.H

    out = ExactCouple(
        newD,
        newE,
        GradedMap((-1, 1), i_m),
        GradedMap((jd[0] + 1, jd[1] - 1), j_m),
        GradedMap(kd, k_m),
        s,
        c.page + 1,
        reps,
    )
    return out


# -- spectral sequence ----------------------------------------------------


@dataclass
class Page:
    r: int
    dims: dict  # (p, q) -> dim E_r^{p,q}
    diff_ranks: dict  # (p, q) -> rank of d_r out of (p, q)
    diff_bidegree: tuple

    def differentials_vanish(self) -> bool:
        return not any(self.diff_ranks.values())

    def total_by_degree(self) -> dict:
        out: dict = {}
        for (p, q), d in self.dims.items():
            out[p + q] = out.get(p + q, 0) + d
        return out

    def to_json(self):
        return {
            "r": self.r,
            "bidegree": list(self.diff_bidegree),
            "E": [{"p": p, "q": q, "dim": d, "d_rank": self.diff_ranks.get((p, q), 0)} for (p, q), d in sorted(self.dims.items()) if d],
        }


@dataclass
class SpectralSequence:
    pages: list
    stable_from_page: int
    E_inf: dict
    abutment: dict  # n -> dim D_1^{0, n+1}
    couples: list = field(repr=False, default_factory=list)

    @property
    def converges(self) -> bool:
        tot: dict = {}
        for (p, q), d in self.E_inf.items():
            tot[p + q] = tot.get(p + q, 0) + d
        keys = set(tot) | set(self.abutment)
        return all(tot.get(n, 0) == self.abutment.get(n, 0) for n in keys)

    def to_json(self):
        return {
            "pages": [pg.to_json() for pg in self.pages],
            "stable_through_page": self.stable_from_page,
            "E_inf": [{"p": p, "q": q, "dim": d} for (p, q), d in sorted(self.E_inf.items()) if d],
            "abutment": [{"n": n, "dim": d} for n, d in sorted(self.abutment.items())],
            "converges": self.converges,
        }


def check_hypotheses(c: ExactCouple, f=None):
    """Bounded below (optionally against ``f(n)``) and ``i`` iso for ``p >= 1``."""
    if f is not None:
        for (p, q) in c.D.support():
            if p < f(p + q):
                raise HypothesisViolationError(f"D^{{{p},{q}}} != 0 below the bound", locus=(p, q))
    cols = set()
    for (p, q) in c.D.support():
        cols.add((p, q))
        cols.add((p + 1, q - 1))
    for (p, q) in sorted(cols):
        if p < 1:
            continue
        if c.stable_from is not None and p > c.stable_from:
            continue
        A = c.i_at(p, q)
        a, b = c.d_dim(p, q), c.d_dim(p - 1, q + 1)
        if not (a == b == la.rank(A)):
            raise HypothesisViolationError(f"i: D^{{{p},{q}}} -> D^{{{p - 1},{q + 1}}} is not an isomorphism", locus=(p, q))


def _page_of(c: ExactCouple) -> Page:
    dims = {pq: c.e_dim(*pq) for pq in c.E.support()}
    ranks = {pq: la.rank(c.d_at(*pq)) for pq in c.E.support()}
    return Page(c.page, dims, ranks, c.diff_bidegree())


def pages(c: ExactCouple, r_max: Optional[int] = None, f=None, keep_couples: bool = False) -> SpectralSequence:
    """Pages ``E_1 .. E_R`` with ``R`` large enough that every later differential is zero.

    ``d_r`` moves the column by ``r``; once ``r`` exceeds the column width of
    the E-support all differentials vanish, which gives a finite stop.
    """
    check_hypotheses(c, f)
    rep = check_exact(c)
    if not rep:
        raise NonExactCoupleError(f"couple is not exact at {rep.locus}")
    cols = [p for p, _ in c.E.support()]
    width = (max(cols) - min(cols)) if cols else 0
    R = width + 1 if r_max is None else r_max
    cur = c
    out = [_page_of(cur)]
    couples = [cur] if keep_couples else []
    while cur.page < R:
        cur = derive(cur, check=False)
        out.append(_page_of(cur))
        if keep_couples:
            couples.append(cur)
    # first page from which all differentials vanish
    stable = out[-1].r
    for pg in reversed(out):
        if pg.differentials_vanish():
            stable = pg.r
        else:
            break
    # abutment read off the original couple: D^{0, n+1}
    ab = {}
    for (p, q) in c.D.support():
        if p == 0:
            ab[q - 1] = c.D.dim(p, q)
    # E_{width+1} = E_inf; with a smaller page bound the limit is unknown
    E_inf = dict(out[-1].dims) if out[-1].r > width else {}
    return SpectralSequence(out, stable, E_inf, ab, couples)
