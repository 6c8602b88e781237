"""Finite filtered cochain complexes over Q and the exact couple they define.

Filtration levels run over ``p`` in ``[-L, 0]`` with ``F^{-L} = C`` and
``F^0 = 0``.  The couple is

    D^{p,q} = H^{p+q-1}(C / F^p),   E^{p,q} = H^{p+q}(F^p / F^{p+1}),

``i`` induced by ``C/F^p -> C/F^{p-1}``, ``j`` the connecting map and ``k``
induced by ``F^p/F^{p+1} -> C/F^{p+1}``.  It is stable from column 1, where
``D^{1,q} = D^{0,q+1} = H^q(C)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg as la
from .couple import BigradedModule, ExactCouple, GradedMap


@dataclass
class FilteredComplex:
    dims: dict  # n -> dim C^n
    d: dict  # n -> matrix C^n -> C^{n+1}
    F: dict  # (p, n) -> basis of F^p C^n for -L < p < 0
    length: int  # L

    @property
    def degrees(self) -> list:
        return sorted(self.dims)

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    def diff(self, n: int):
        M = self.d.get(n)
        if M is None:
            return la.zeros(self.dim(n + 1), self.dim(n))
        return M

    def filt(self, p: int, n: int):
        if p <= -self.length:
            return la.eye(self.dim(n))
        if p >= 0:
            return la.zeros(self.dim(n), 0)
        return self.F.get((p, n), la.zeros(self.dim(n), 0))

    def validate(self):
        for n in self.degrees:
            if not la.is_zero(la.mul(self.diff(n + 1), self.diff(n))):
                raise ValueError(f"d^2 != 0 in degree {n}")
            for p in range(-self.length, 1):
                img = la.mul(self.diff(n), self.filt(p, n))
                if not la.in_span(self.filt(p, n + 1), img):
                    raise ValueError(f"d does not preserve F^{p} in degree {n}")

    def to_json(self):
        return {
            "length": self.length,
            "dims": {str(n): v for n, v in sorted(self.dims.items())},
            "d": {str(n): la.to_json(M) for n, M in sorted(self.d.items())},
            "F": [{"p": p, "n": n, "basis": la.to_json(M)} for (p, n), M in sorted(self.F.items())],
        }

    @classmethod
    def from_json(cls, obj) -> "FilteredComplex":
        return cls(
            {int(n): v for n, v in obj["dims"].items()},
            {int(n): la.from_json(M) for n, M in obj["d"].items()},
            {(e["p"], e["n"]): la.from_json(e["basis"]) for e in obj["F"]},
            obj["length"],
        )


# -- random generation ----------------------------------------------------


def random_filtered_complex(rng, length: int = 3, max_dim: int = 6, degrees=(0, 1, 2, 3), scramble: bool = True) -> FilteredComplex:
    """Direct sum of elementary pieces, then a random change of basis per degree.

    Pieces are single vectors (cycles) and pairs ``x -> y`` with
    ``deg y = deg x + 1`` and ``level(y) >= level(x)``; a pair with equal
    levels is acyclic on the graded piece, larger gaps create higher
    differentials.
    """
    degrees = list(degrees)
    levels = list(range(-length, 0))
    basis = {n: [] for n in degrees}  # n -> list of levels
    edges = []  # (n, index_x, index_y)
    budget = {n: rng.randint(0, max_dim) for n in degrees}
    for _ in range(3 * max_dim):
        n = rng.choice(degrees)
        if rng.random() < 0.6 and n + 1 in basis and len(basis[n]) < budget[n] and len(basis[n + 1]) < budget.get(n + 1, 0):
            lx = rng.choice(levels)
            ly = rng.choice([l for l in levels if l >= lx])
            basis[n].append(lx)
            basis[n + 1].append(ly)
            edges.append((n, len(basis[n]) - 1, len(basis[n + 1]) - 1))
        elif len(basis[n]) < budget[n]:
            basis[n].append(rng.choice(levels))
    dims = {n: len(basis[n]) for n in degrees}
    d = {}
    for n in degrees:
        if n + 1 in basis:
            rows = [[0] * dims[n] for _ in range(dims[n + 1])]
            for (m, a, b) in edges:
                if m == n:
                    rows[b][a] = rng.choice([1, -1, 2, -2, 3])
            d[n] = la.from_rows(rows, dims[n + 1], dims[n])
    F = {}
    for n in degrees:
        for p in range(-length + 1, 0):
            idx = [t for t, l in enumerate(basis[n]) if l >= p]
            F[(p, n)] = la.columns(la.eye(dims[n]), idx)
    C = FilteredComplex(dims, d, F, length)
    if scramble:
        C = change_basis(C, {n: la.random_invertible(rng, dims[n]) for n in degrees})
    return C


def change_basis(C: FilteredComplex, S: dict) -> FilteredComplex:
    """``d -> S d S^-1`` and ``F -> S F``."""
    Sinv = {n: la.inverse(M) for n, M in S.items()}
    d = {}
    for n, M in C.d.items():
        if n + 1 in S:
            d[n] = la.mul(la.mul(S[n + 1], M), Sinv[n])
    F = {(p, n): la.mul(S[n], B) for (p, n), B in C.F.items()}
    return FilteredComplex(dict(C.dims), d, F, C.length)


def direct_sum(A: FilteredComplex, B: FilteredComplex) -> FilteredComplex:
    L = max(A.length, B.length)
    degs = sorted(set(A.dims) | set(B.dims))
    dims = {n: A.dim(n) + B.dim(n) for n in degs}
    d = {n: la.block_diag(A.diff(n), B.diff(n)) for n in degs if n + 1 in dims}
    F = {}
    for n in degs:
        for p in range(-L + 1, 0):
            F[(p, n)] = la.block_diag(A.filt(p, n), B.filt(p, n))
    return FilteredComplex(dims, d, F, L)


# -- cohomology of subquotients -----------------------------------------------


class SubQuotient:
    """``H^m(Bc / Ac)`` for subcomplexes ``Ac <= Bc`` of C, classes as vectors in C^m."""

    def __init__(self, C: FilteredComplex, Bsub, Asub, m: int):
        Bm, Am, Am1 = Bsub(m), Asub(m), Asub(m + 1)
        dm = C.diff(m)
        # cocycles: x in B^m with dx in A^{m+1}
        N = la.nullspace(la.hcat(la.mul(dm, Bm), la.neg(Am1), rows=C.dim(m + 1)))
        Z = la.colspace(la.mul(Bm, la.rows_of(N, range(Bm.shape[1]))))
        bnd = la.hcat(Am, la.mul(C.diff(m - 1), Bsub(m - 1)), rows=C.dim(m))
        self.Bnd = la.colspace(bnd)
        self.H = la.complement(self.Bnd, Z)
        self._basis = la.hcat(self.Bnd, self.H, rows=C.dim(m))
        self.m = m

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    def coords(self, V):
        if not self.dim:
            return la.zeros(0, V.shape[1])
        X = la.solve(self._basis, V)
        return la.rows_of(X, range(self.Bnd.shape[1], self._basis.shape[1]))


def cohomology_dims(C: FilteredComplex) -> dict:
    out = {}
    for n in C.degrees:
        r_out = la.rank(C.diff(n))
        r_in = la.rank(C.diff(n - 1)) if n - 1 in C.dims else 0
        out[n] = C.dim(n) - r_out - r_in
    return out


def couple_from_filtered(C: FilteredComplex) -> ExactCouple:
    L = C.length
    degs = C.degrees

    def full(m):
        return la.eye(C.dim(m))

    def F(p):
        return lambda m: C.filt(p, m)

    Dsp, Esp = {}, {}
    for p in range(-L + 1, 2):
        for m in degs:
            q = m + 1 - p  # D^{p,q} = H^m(C/F^p)
            Dsp[(p, q)] = SubQuotient(C, full, F(p), m)
    for p in range(-L, 0):
        for m in degs:
            Esp[(p, m - p)] = SubQuotient(C, F(p), F(p + 1), m)

    def dsp(p, q):
        return Dsp.get((min(p, 1), q + p - min(p, 1)))

    i_m, j_m, k_m = {}, {}, {}
    for (p, q), S in Dsp.items():
        if not S.dim:
            continue
        if p <= 1:
            T = dsp(p - 1, q + 1)
            if T is not None and T.dim:
                i_m[(p, q)] = T.coords(S.H)
        T = Esp.get((p, q))
        if T is not None and T.dim:
            j_m[(p, q)] = T.coords(la.mul(C.diff(S.m), S.H))
    for (p, q), S in Esp.items():
        if not S.dim:
            continue
        T = dsp(p + 1, q)
        if T is not None and T.dim:
            k_m[(p, q)] = T.coords(S.H)
    D = BigradedModule.make({pq: S.dim for pq, S in Dsp.items()})
    E = BigradedModule.make({pq: S.dim for pq, S in Esp.items()})
    return ExactCouple(D, E, GradedMap((-1, 1), i_m), GradedMap((0, 0), j_m), GradedMap((1, 0), k_m), stable_from=1)


# -- direct page oracle -----------------------------------------------------


def _Z(C: FilteredComplex, p: int, r: int, n: int):
    """``{x in F^p C^n : dx in F^{p+r} C^{n+1}}``."""
    Fp = C.filt(p, n)
    Fpr = C.filt(p + r, n + 1)
    N = la.nullspace(la.hcat(la.mul(C.diff(n), Fp), la.neg(Fpr), rows=C.dim(n + 1)))
    return la.colspace(la.mul(Fp, la.rows_of(N, range(Fp.shape[1]))))


def page_dims_direct(C: FilteredComplex, r: int) -> dict:
    """``dim E_r^{p,q} = dim Z_r^p - dim(Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1})``."""
    out = {}
    for p in range(-C.length, 0):
        for n in C.degrees:
            Zr = _Z(C, p, r, n)
            lower = la.hcat(_Z(C, p + 1, r - 1, n), la.mul(C.diff(n - 1), _Z(C, p - r + 1, r - 1, n - 1)), rows=C.dim(n))
            dim = la.rank(Zr) - la.rank(lower)
            if dim:
                out[(p, n - p)] = dim
    return out
