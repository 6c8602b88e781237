"""Quotients of exact couples by split subcouples."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SplittingError
from . import linalg as la
from .couple import BigradedModule, ExactCouple, GradedMap, pages


@dataclass
class CoupleMorphism:
    """Bidegree (0, 0) maps on D and E, ``(p, q) -> matrix``."""

    D: dict
    E: dict

    def at_D(self, pq, src: int, tgt: int):
        M = self.D.get(pq)
        return la.zeros(tgt, src) if M is None else M

    def at_E(self, pq, src: int, tgt: int):
        M = self.E.get(pq)
        return la.zeros(tgt, src) if M is None else M


def _keys(*couples):
    out = set()
    for c in couples:
        out |= set(c.D.support()) | set(c.E.support())
        out |= set(c.bidegrees())
    return sorted(out)


def _check_commutes(src: ExactCouple, tgt: ExactCouple, phi: CoupleMorphism, name: str):
    for pq in _keys(src, tgt):
        p, q = pq
        fD = phi.at_D(pq, src.d_dim(p, q), tgt.d_dim(p, q))
        # i
        t = (p - 1, q + 1)
        lhs = la.mul(tgt.i_at(p, q), fD)
        rhs = la.mul(phi.at_D(t, src.d_dim(*t), tgt.d_dim(*t)), src.i_at(p, q))
        if la.to_rows(lhs) != la.to_rows(rhs):
            raise SplittingError(f"{name} does not commute with i", locus=("i", pq))
        # j
        t = (p + src.j.bidegree[0], q + src.j.bidegree[1])
        lhs = la.mul(tgt.j_at(p, q), fD)
        rhs = la.mul(phi.at_E(t, src.e_dim(*t), tgt.e_dim(*t)), src.j_at(p, q))
        if la.to_rows(lhs) != la.to_rows(rhs):
            raise SplittingError(f"{name} does not commute with j", locus=("j", pq))
        # k
        fE = phi.at_E(pq, src.e_dim(p, q), tgt.e_dim(p, q))
        t = (p + src.k.bidegree[0], q + src.k.bidegree[1])
        lhs = la.mul(tgt.k_at(p, q), fE)
        rhs = la.mul(phi.at_D(t, src.d_dim(*t), tgt.d_dim(*t)), src.k_at(p, q))
        if la.to_rows(lhs) != la.to_rows(rhs):
            raise SplittingError(f"{name} does not commute with k", locus=("k", pq))


@dataclass
class SplitQuotient:
    quotient: ExactCouple
    page_dims: list  # per page: {"sub": total, "tot": total, "quot": total} by bidegree
    additive: bool
    r_max: int

    def to_json(self):
        return {"additive": self.additive, "r_max": self.r_max, "pages": self.page_dims}


def split_mono_quotient(sub: ExactCouple, tot: ExactCouple, iota: CoupleMorphism, rho: CoupleMorphism, r_max: int = 5) -> SplitQuotient:
    """Quotient ``tot / iota(sub)``, realised as ``ker rho``."""
    for pq in _keys(sub, tot):
        p, q = pq
        for part, dim_s, dim_t in (("D", sub.d_dim(p, q), tot.d_dim(p, q)), ("E", sub.e_dim(p, q), tot.e_dim(p, q))):
            i_m = (iota.at_D if part == "D" else iota.at_E)(pq, dim_s, dim_t)
            r_m = (rho.at_D if part == "D" else rho.at_E)(pq, dim_t, dim_s)
            if la.to_rows(la.mul(r_m, i_m)) != la.to_rows(la.eye(dim_s)):
                raise SplittingError("retraction composed with inclusion is not the identity", locus=(part, pq))
    _check_commutes(sub, tot, iota, "inclusion")
    _check_commutes(tot, sub, rho, "retraction")

    Kd, Ke = {}, {}
    for pq in tot.D.support():
        Kd[pq] = la.nullspace(rho.at_D(pq, tot.d_dim(*pq), sub.d_dim(*pq)))
    for pq in tot.E.support():
        Ke[pq] = la.nullspace(rho.at_E(pq, tot.e_dim(*pq), sub.e_dim(*pq)))

    def kd(pq):
        pq = tot._canon_D(*pq)
        return Kd.get(pq, la.zeros(tot.d_dim(*pq), 0))

    def ke(pq):
        return Ke.get(pq, la.zeros(tot.e_dim(*pq), 0))

    i_m, j_m, k_m = {}, {}, {}
    for pq, B in Kd.items():
        if not B.shape[1]:
            continue
        p, q = pq
        t = (p - 1, q + 1)
        T = kd(t)
        if T.shape[1]:
            i_m[pq] = la.solve(T, la.mul(tot.i_at(p, q), B))
        t = (p + tot.j.bidegree[0], q + tot.j.bidegree[1])
        T = ke(t)
        if T.shape[1]:
            j_m[pq] = la.solve(T, la.mul(tot.j_at(p, q), B))
    for pq, B in Ke.items():
        if not B.shape[1]:
            continue
        p, q = pq
        t = (p + tot.k.bidegree[0], q + tot.k.bidegree[1])
        T = kd(t)
        if T.shape[1]:
            k_m[pq] = la.solve(T, la.mul(tot.k_at(p, q), B))
    Q = ExactCouple(
        BigradedModule.make({pq: B.shape[1] for pq, B in Kd.items()}),
        BigradedModule.make({pq: B.shape[1] for pq, B in Ke.items()}),
        GradedMap(tot.i.bidegree, i_m),
        GradedMap(tot.j.bidegree, j_m),
        GradedMap(tot.k.bidegree, k_m),
        tot.stable_from,
        tot.page,
    )
    ss = {name: pages(c, r_max=r_max) for name, c in (("sub", sub), ("tot", tot), ("quot", Q))}
    table, additive = [], True
    for r in range(len(ss["tot"].pages)):
        row = {}
        keys = set()
        for name in ss:
            keys |= set(ss[name].pages[r].dims)
        for pq in sorted(keys):
            a = ss["sub"].pages[r].dims.get(pq, 0)
            b = ss["tot"].pages[r].dims.get(pq, 0)
            c = ss["quot"].pages[r].dims.get(pq, 0)
            if b != a + c:
                additive = False
            if a or b or c:
                row[f"{pq[0]},{pq[1]}"] = [a, b, c]
        table.append({"r": r + 1, "dims": row})
    return SplitQuotient(Q, table, additive, r_max)


# -- random split pairs -------------------------------------------------------


def direct_sum_couple(c1: ExactCouple, c2: ExactCouple) -> ExactCouple:
    if c1.stable_from != c2.stable_from:
        raise ValueError("couples must share the stable column")
    keysD = sorted(set(c1.D.support()) | set(c2.D.support()))
    keysE = sorted(set(c1.E.support()) | set(c2.E.support()))
    D = BigradedModule.make({pq: c1.D.dim(*pq) + c2.D.dim(*pq) for pq in keysD})
    E = BigradedModule.make({pq: c1.E.dim(*pq) + c2.E.dim(*pq) for pq in keysE})
    i_m = {pq: la.block_diag(c1.i_at(*pq), c2.i_at(*pq)) for pq in keysD}
    j_m = {pq: la.block_diag(c1.j_at(*pq), c2.j_at(*pq)) for pq in keysD}
    k_m = {pq: la.block_diag(c1.k_at(*pq), c2.k_at(*pq)) for pq in keysE}
    return ExactCouple(D, E, GradedMap(c1.i.bidegree, i_m), GradedMap(c1.j.bidegree, j_m), GradedMap(c1.k.bidegree, k_m), c1.stable_from, c1.page)


def conjugate_couple(c: ExactCouple, GD: dict, GE: dict) -> ExactCouple:
    """Change of basis ``G`` in every bidegree (missing entries mean identity)."""

    def g(tab, pq, n):
        return tab.get(pq, la.eye(n))

    def ginv(tab, pq, n):
        return la.inverse(g(tab, pq, n))

    i_m, j_m, k_m = {}, {}, {}
    for pq in c.D.support():
        p, q = pq
        n = c.d_dim(p, q)
        t = c._canon_D(p - 1, q + 1)
        i_m[pq] = la.mul(la.mul(g(GD, t, c.d_dim(*t)), c.i_at(p, q)), ginv(GD, pq, n))
        t = (p + c.j.bidegree[0], q + c.j.bidegree[1])
        j_m[pq] = la.mul(la.mul(g(GE, t, c.e_dim(*t)), c.j_at(p, q)), ginv(GD, pq, n))
    for pq in c.E.support():
        p, q = pq
        t = c._canon_D(p + c.k.bidegree[0], q + c.k.bidegree[1])
        k_m[pq] = la.mul(la.mul(g(GD, t, c.d_dim(*t)), c.k_at(p, q)), ginv(GE, pq, c.e_dim(p, q)))
    return ExactCouple(c.D, c.E, GradedMap(c.i.bidegree, i_m), GradedMap(c.j.bidegree, j_m), GradedMap(c.k.bidegree, k_m), c.stable_from, c.page)


def random_split_pair(rng, c1: ExactCouple, c2: ExactCouple):
    """``(sub, tot, iota, rho)`` with ``tot = G (c1 (+) c2) G^-1``.

    The stable column keeps ``i`` the identity, so the same ``G`` is used for
    ``D^{s,q}`` and everything it is identified with.
    """
    S = direct_sum_couple(c1, c2)
    GD = {pq: la.random_invertible(rng, n) for pq, n in S.D.dims}
    GE = {pq: la.random_invertible(rng, n) for pq, n in S.E.dims}
    tot = conjugate_couple(S, GD, GE)
    iD, rD, iE, rE = {}, {}, {}, {}
    for pq, n in S.D.dims:
        a = c1.D.dim(*pq)
        iD[pq] = la.mul(GD[pq], la.columns(la.eye(n), range(a)))
        rD[pq] = la.mul(la.rows_of(la.eye(n), range(a)), la.inverse(GD[pq]))
    for pq, n in S.E.dims:
        a = c1.E.dim(*pq)
        iE[pq] = la.mul(GE[pq], la.columns(la.eye(n), range(a)))
        rE[pq] = la.mul(la.rows_of(la.eye(n), range(a)), la.inverse(GE[pq]))
    return c1, tot, CoupleMorphism(iD, iE), CoupleMorphism(rD, rE)
