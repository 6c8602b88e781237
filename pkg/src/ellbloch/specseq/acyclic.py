"""Dividing a spectral sequence by acyclic subcomplexes of its first page.

Contains the row-level quotient, its filtered-complex realisation used to
compare later pages, the tensor construction ``E^. / F^.`` built from data
``(A, a, B^J, d_m^J, e_m^J)`` and the quasi-isomorphism check for
``C_n = (V' -> V)^{(x) n}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from ..errors import HypothesisViolationError, NotAcyclicError, NotExactSequenceError, NotSubcomplexError
from . import linalg as la
from .filtered import FilteredComplex, SubQuotient, couple_from_filtered


# -- row complexes ---------------------------------------------------------


@dataclass
class RowComplexes:
    """E_1 rows: ``dims[(p, q)]`` and ``d[(p, q)]: E^{p,q} -> E^{p+1,q}``."""

    dims: dict
    d: dict

    def dim(self, p, q) -> int:
        return self.dims.get((p, q), 0)

    def diff(self, p, q):
        M = self.d.get((p, q))
        if M is None:
            return la.zeros(self.dim(p + 1, q), self.dim(p, q))
        return M

    def cohomology(self) -> dict:
        out = {}
        for (p, q), n in self.dims.items():
            h = n - la.rank(self.diff(p, q)) - la.rank(self.diff(p - 1, q))
            if h:
                out[(p, q)] = h
        return out

    def validate(self):
        for (p, q) in self.dims:
            if not la.is_zero(la.mul(self.diff(p + 1, q), self.diff(p, q))):
                raise ValueError(f"d^2 != 0 at {(p, q)}")


def e1_rows(C: FilteredComplex) -> RowComplexes:
    c = couple_from_filtered(C)
    dims = {pq: c.e_dim(*pq) for pq in c.E.support()}
    d = {pq: c.d_at(*pq) for pq in dims}
    return RowComplexes(dims, d)


@dataclass
class QuotientRows:
    rows: RowComplexes
    complements: dict  # (p, q) -> basis of a complement of F in E_1^{p,q}
    sub: dict  # (p, q) -> basis of F

    def e2(self) -> dict:
        return self.rows.cohomology()


def quotient_by_acyclic(E1: RowComplexes, F: dict) -> QuotientRows:
    """``E_1 / F`` for subcomplexes ``F^{.,q}`` of the rows, after checking acyclicity."""
    keys = set(E1.dims) | set(F)
    Fb = {pq: F.get(pq, la.zeros(E1.dim(*pq), 0)) for pq in keys}
    for (p, q), B in Fb.items():
        if B.shape[0] != E1.dim(p, q):
            raise NotSubcomplexError(f"F^{{{p},{q}}} does not live in E_1^{{{p},{q}}}")
        img = la.mul(E1.diff(p, q), B)
        tgt = Fb.get((p + 1, q), la.zeros(E1.dim(p + 1, q), 0))
        if not la.in_span(tgt, img):
            raise NotSubcomplexError(f"d(F^{{{p},{q}}}) is not contained in F^{{{p + 1},{q}}}")
    # acyclicity: ker(d|F) = d(F) at every spot
    for (p, q), B in Fb.items():
        B = la.colspace(B)
        dB = la.mul(E1.diff(p, q), B)
        ker = la.mul(B, la.nullspace(dB))
        prev = Fb.get((p - 1, q))
        bnd = la.mul(E1.diff(p - 1, q), prev) if prev is not None else la.zeros(E1.dim(p, q), 0)
        if la.rank(ker) != la.rank(bnd):
            wit = la.complement(la.colspace(bnd), ker)
            raise NotAcyclicError(f"F^{{.,{q}}} has cohomology at p = {p}", witness=la.to_rows(la.columns(wit, [0])))
    comp, dims, d = {}, {}, {}
    for pq in E1.dims:
        comp[pq] = la.complement(la.colspace(Fb[pq]), la.eye(E1.dim(*pq)))
        dims[pq] = comp[pq].shape[1]
    for (p, q) in E1.dims:
        t = (p + 1, q)
        if t not in E1.dims or not dims[(p, q)] or not dims[t]:
            continue
        Fs = la.colspace(Fb[t])
        basis = la.hcat(Fs, comp[t])
        X = la.solve(basis, la.mul(E1.diff(p, q), comp[(p, q)]))
        d[(p, q)] = la.rows_of(X, range(Fs.shape[1], basis.shape[1]))
    return QuotientRows(RowComplexes({k: v for k, v in dims.items() if v}, d), comp, Fb)


# -- filtered realisation ---------------------------------------------------


def is_subcomplex(C: FilteredComplex, K: dict) -> bool:
    return all(la.in_span(K.get(n + 1, la.zeros(C.dim(n + 1), 0)), la.mul(C.diff(n), K[n])) for n in K)


def quotient_filtered(C: FilteredComplex, K: dict) -> FilteredComplex:
    """``C / K`` with the induced filtration ``(F^p + K) / K``."""
    if not is_subcomplex(C, K):
        raise NotSubcomplexError("K is not stable under d")
    comp, dims = {}, {}
    for n in C.degrees:
        Kn = la.colspace(K.get(n, la.zeros(C.dim(n), 0)))
        K[n] = Kn
        comp[n] = la.complement(Kn, la.eye(C.dim(n)))
        dims[n] = comp[n].shape[1]

    def proj(n, V):
        basis = la.hcat(K[n], comp[n], rows=C.dim(n))
        X = la.solve(basis, V)
        return la.rows_of(X, range(K[n].shape[1], basis.shape[1]))

    d = {n: proj(n + 1, la.mul(C.diff(n), comp[n])) for n in C.degrees if n + 1 in C.dims}
    F = {}
    for (p, n), B in C.F.items():
        F[(p, n)] = la.colspace(proj(n, B))
    return FilteredComplex(dims, d, F, C.length)


def e1_image(C: FilteredComplex, K: dict) -> dict:
    """Image of ``E_1(K)`` in ``E_1(C)`` (K with the induced filtration)."""
    out = {}
    for p in range(-C.length, 0):
        for n in C.degrees:
            def Fp(pp):
                return lambda m: C.filt(pp, m)

            def FK(pp):
                return lambda m: la.intersect(C.filt(pp, m), K.get(m, la.zeros(C.dim(m), 0)))

            target = SubQuotient(C, Fp(p), Fp(p + 1), n)
            if not target.dim:
                continue
            source = SubQuotient(C, FK(p), FK(p + 1), n)
            out[(p, n - p)] = la.colspace(target.coords(source.H))
    return out


def acyclic_extension(rng, base: FilteredComplex, pairs: int = 2):
    """``base (+) A`` scrambled, where A is made of pairs ``x -> y`` one level apart.

    Returns ``(C, K)`` with K the image of A; ``E_1(A)`` is non-zero but its
    rows are acyclic.
    """
    from .filtered import change_basis, direct_sum

    L = base.length
    if L < 2:
        raise ValueError("need at least two filtration steps")
    degs = base.degrees
    basis = {n: [] for n in degs}
    edges = []
    for _ in range(pairs):
        n = rng.choice(degs[:-1])
        lx = rng.randint(-L, -2)
        basis[n].append(lx)
        basis[n + 1].append(lx + 1)
        edges.append((n, len(basis[n]) - 1, len(basis[n + 1]) - 1))
    dims = {n: len(basis[n]) for n in degs}
    d = {}
    for n in degs:
        if n + 1 in dims:
            rows = [[0] * dims[n] for _ in range(dims[n + 1])]
            for (m, a, b) in edges:
                if m == n:
                    rows[b][a] = 1
            d[n] = la.from_rows(rows, dims[n + 1], dims[n])
    F = {}
    for n in degs:
        for p in range(-L + 1, 0):
            F[(p, n)] = la.columns(la.eye(dims[n]), [t for t, l in enumerate(basis[n]) if l >= p])
    A = FilteredComplex(dims, d, F, L)
    S = direct_sum(base, A)
    G = {n: la.random_invertible(rng, S.dim(n)) for n in degs}
    C = change_basis(S, G)
    K = {n: la.mul(G[n], la.columns(la.eye(S.dim(n)), range(base.dim(n), S.dim(n)))) for n in degs}
    return C, K


# -- the tensor construction ------------------------------------------------


def _subsets(n):
    for r in range(n + 1):
        for J in itertools.combinations(range(1, n + 1), r):
            yield J


@dataclass
class AcyclicityData:
    """``A`` with subspace ``a`` (basis columns), spaces ``B^J`` and the maps.

    ``partial[(J, m)]: B^J -> B^{J-m} (x) A`` and
    ``eps[(J, m)]: B^{J-m} (x) a -> B^J`` in coordinates (B-index major).
    """

    n: int
    dim_A: int
    a: object  # dim_A x dim_a matrix
    dim_B: dict  # J (sorted tuple) -> dim
    partial: dict
    eps: dict
    signs: dict = field(default_factory=dict)  # filled by check: ("c"|"d", J, m, m') -> +-1

    @property
    def dim_a(self) -> int:
        return self.a.shape[1]

    def dB(self, J) -> int:
        return self.dim_B.get(tuple(J), 0)

    def P(self, J, m):
        J = tuple(J)
        Jm = tuple(x for x in J if x != m)
        M = self.partial.get((J, m))
        if M is None:
            return la.zeros(self.dB(Jm) * self.dim_A, self.dB(J))
        return M

    def Eps(self, J, m):
        J = tuple(J)
        Jm = tuple(x for x in J if x != m)
        M = self.eps.get((J, m))
        if M is None:
            return la.zeros(self.dB(J), self.dB(Jm) * self.dim_a)
        return M


def _swap_last_two(d0, d1, d2):
    """``X (x) P (x) Q -> X (x) Q (x) P``."""
    return la.tensor_permutation([d0, d1, d2], [0, 2, 1])


def check_acyclicity_hypotheses(data: AcyclicityData) -> dict:
    """Verify (a)-(d); returns the sign table, raises on the first violation."""
    nA, na = data.dim_A, data.dim_a
    signs = {}
    for J in _subsets(data.n):
        for m in J:
            Jm = tuple(x for x in J if x != m)
            # (a): d_m e_m is the inclusion B^{J-m} (x) a -> B^{J-m} (x) A
            lhs = la.mul(data.P(J, m), data.Eps(J, m))
            rhs = la.kron(la.eye(data.dB(Jm)), data.a)
            if la.to_rows(lhs) != la.to_rows(rhs):
                raise HypothesisViolationError(f"(a) fails for J={J}, m={m}", locus=("a", J, m))
        for m, mp in itertools.permutations(J, 2):
            Jm = tuple(x for x in J if x != m)
            Jmp = tuple(x for x in J if x != mp)
            Jmm = tuple(x for x in J if x not in (m, mp))
            b2 = data.dB(Jmm)
            if m < mp:
                # (b): both routes to B^{J-m-m'} (x) A_m (x) A_m'
                r1 = la.mul(la.kron(data.P(Jm, mp), la.eye(nA)), data.P(J, m))  # B (x) A_m' (x) A_m
                r1 = la.mul(_swap_last_two(b2, nA, nA), r1)
                r2 = la.mul(la.kron(data.P(Jmp, m), la.eye(nA)), data.P(J, mp))  # B (x) A_m (x) A_m'
                if la.to_rows(r1) != la.to_rows(r2):
                    raise HypothesisViolationError(f"(b) fails for J={J}, m={m}, m'={mp}", locus=("b", J, m, mp))
            # (c): B^{J-m} (x) a_m -> B^{J-m'} (x) A_m'
            top = la.mul(la.kron(data.P(Jm, mp), la.eye(na)), la.eye(data.dB(Jm) * na))  # B'' (x) A_m' (x) a_m
            top = la.mul(_swap_last_two(b2, nA, na), top)  # B'' (x) a_m (x) A_m'
            top = la.mul(la.kron(data.Eps(Jmp, m), la.eye(nA)), top)
            bottom = la.mul(data.P(J, mp), data.Eps(J, m))
            c = _sign(top, bottom)
            if c is None:
                raise HypothesisViolationError(f"(c) fails for J={J}, m={m}, m'={mp}", locus=("c", J, m, mp))
            signs[("c", J, m, mp)] = c
            if m < mp:
                # (d): B'' (x) a_m' (x) a_m -> B^J both ways; inputs ordered (x) a_m' (x) a_m
                r1 = la.mul(data.Eps(J, m), la.kron(data.Eps(Jm, mp), la.eye(na)))
                r2 = la.mul(data.Eps(J, mp), la.kron(data.Eps(Jmp, m), la.eye(na)))
                r2 = la.mul(r2, _swap_last_two(b2, na, na))
                c = _sign(r1, r2)
                if c is None:
                    raise HypothesisViolationError(f"(d) fails for J={J}, m={m}, m'={mp}", locus=("d", J, m, mp))
                signs[("d", J, m, mp)] = c
    data.signs = signs
    return signs


def _sign(X, Y):
    if la.to_rows(X) == la.to_rows(Y):
        return 1
    if la.to_rows(X) == la.to_rows(la.neg(Y)):
        return -1
    return None


@dataclass
class AcyclicCertificate:
    E_dims: dict
    F_dims: dict
    quotient_dims: dict  # from E/F
    predicted_quotient_dims: dict  # sum dim(B^J / b^J) * dim(A/a)^|I|
    F_cohomology: dict
    both_definitions_agree: bool
    signs: dict

    @property
    def acyclic(self) -> bool:
        return not any(self.F_cohomology.values())

    @property
    def quotient_ok(self) -> bool:
        return self.quotient_dims == self.predicted_quotient_dims

    def to_json(self):
        return {
            "E_dims": self.E_dims,
            "F_dims": self.F_dims,
            "quotient_dims": self.quotient_dims,
            "predicted_quotient_dims": self.predicted_quotient_dims,
            "F_cohomology": self.F_cohomology,
            "definitions_agree": self.both_definitions_agree,
            "acyclic": self.acyclic,
        }


@dataclass
class TensorComplex:
    """``E^i = (+)_{|I| = i} B^J (x) A^{(x) I}``, summands in a fixed order."""

    n: int
    blocks: dict  # i -> list of (J, offset, size)
    dims: dict
    d: dict  # i -> matrix E^i -> E^{i+1}

    def block(self, i, J):
        for JJ, off, size in self.blocks[i]:
            if JJ == J:
                return off, size
        raise KeyError(J)


def _complement_of(J, n):
    return tuple(x for x in range(1, n + 1) if x not in J)


def build_tensor_complex(data: AcyclicityData) -> TensorComplex:
    n, nA = data.n, data.dim_A
    blocks, dims = {}, {}
    for i in range(n + 1):
        off = 0
        lst = []
        for J in _subsets(n):
            if len(J) != n - i:
                continue
            size = data.dB(J) * nA ** i
            lst.append((J, off, size))
            off += size
        blocks[i] = lst
        dims[i] = off
    d = {}
    for i in range(n):
        rows = [[0] * dims[i] for _ in range(dims[i + 1])]
        M = la.zeros(dims[i + 1], dims[i])
        for J, off, size in blocks[i]:
            if not size:
                continue
            I = _complement_of(J, n)
            for pos, m in enumerate(J):
                Jm = tuple(x for x in J if x != m)
                toff, tsize = _block_lookup(blocks[i + 1], Jm)
                if not tsize:
                    continue
                # B^{J-m} (x) A_m (x) A^I  ->  B^{J-m} (x) A^{I + m}
                comp = la.kron(data.P(J, m), la.eye(nA ** len(I)))
                newI = sorted(I + (m,))
                order = [0] + [1 + ([m] + list(I)).index(x) for x in newI]
                perm = la.tensor_permutation([data.dB(Jm)] + [nA] * (len(I) + 1), order)
                comp = la.scale(la.mul(perm, comp), (-1) ** pos)
                for r, row in enumerate(la.to_rows(comp)):
                    for c, v in enumerate(row):
                        if v:
                            rows[toff + r][off + c] += v
        d[i] = la.from_rows(rows, dims[i + 1], dims[i])
    return TensorComplex(n, blocks, dims, d)


def _block_lookup(lst, J):
    for JJ, off, size in lst:
        if JJ == J:
            return off, size
    return 0, 0


def _b_space(data: AcyclicityData, J):
    """``b^J``: span of the images of the ``e_m^J``."""
    mats = [data.Eps(J, m) for m in J]
    return la.colspace(la.hcat(*mats, rows=data.dB(J))) if mats else la.zeros(data.dB(J), 0)


def _kernel_to_quotient_power(data: AcyclicityData, k: int):
    """``ker(A^{(x)k} -> (A/a)^{(x)k})``: tensors with some factor in ``a``."""
    nA = data.dim_A
    if k == 0:
        return la.zeros(1, 0)
    mats = []
    for t in range(k):
        mats.append(la.kron_all([data.a if s == t else la.eye(nA) for s in range(k)]))
    return la.colspace(la.hcat(*mats, rows=nA ** k))


def build_acyclic_F(data: AcyclicityData) -> tuple:
    """``(E, F, certificate)``; F is built recursively and compared with the closed form."""
    signs = check_acyclicity_hypotheses(data)
    E = build_tensor_complex(data)
    n, nA = data.n, data.dim_A
    # generators b^J (x) A^I
    gens = {}
    closed = {}
    for i in range(n + 1):
        g, cl = [], []
        for J, off, size in E.blocks[i]:
            if not size:
                continue
            bJ = _b_space(data, J)
            emb = la.columns(la.eye(E.dims[i]), range(off, off + size))
            g.append(la.mul(emb, la.kron(bJ, la.eye(nA ** i))))
            cl.append(la.mul(emb, la.kron(bJ, la.eye(nA ** i))))
            cl.append(la.mul(emb, la.kron(la.eye(data.dB(J)), _kernel_to_quotient_power(data, i))))
        gens[i] = la.hcat(*g, rows=E.dims[i]) if g else la.zeros(E.dims[i], 0)
        closed[i] = la.colspace(la.hcat(*cl, rows=E.dims[i])) if cl else la.zeros(E.dims[i], 0)
    F = {}
    for i in range(n + 1):
        prev = la.mul(E.d[i - 1], F[i - 1]) if i > 0 else la.zeros(E.dims[i], 0)
        F[i] = la.colspace(la.hcat(prev, gens[i], rows=E.dims[i]))
    agree = all(la.same_span(F[i], closed[i]) for i in range(n + 1))
    # subcomplex and cohomology
    coh = {}
    for i in range(n + 1):
        if i < n and not la.in_span(F[i + 1], la.mul(E.d[i], F[i])):
            raise NotAcyclicError(f"F is not a subcomplex at degree {i}", witness=None)
        dF = la.mul(E.d[i], F[i]) if i < n else la.zeros(0, F[i].shape[1])
        ker = F[i].shape[1] - la.rank(dF)
        im = la.rank(la.mul(E.d[i - 1], F[i - 1])) if i > 0 else 0
        coh[i] = ker - im
    qa = nA - data.dim_a
    predicted = {}
    for i in range(n + 1):
        tot = 0
        for J, off, size in E.blocks[i]:
            tot += (data.dB(J) - _b_space(data, J).shape[1]) * qa ** i
        predicted[i] = tot
    quot = {i: E.dims[i] - F[i].shape[1] for i in range(n + 1)}
    cert = AcyclicCertificate(
        dict(E.dims), {i: F[i].shape[1] for i in F}, quot, predicted, coh, agree, {str(k): v for k, v in signs.items()}
    )
    if not cert.acyclic:
        i = min(k for k, v in coh.items() if v)
        raise NotAcyclicError(f"F has cohomology in degree {i}; this contradicts the acyclicity statement", witness={"degree": i})
    return E, F, cert


def random_acyclicity_data(rng, n_max: int = 3, dim_max: int = 3) -> AcyclicityData:
    """Genuine data: ``B^J = Y (x) (x)_{m in J} W_m`` with ``W_m = a (+) U_m``.

    ``d_m`` applies ``phi_m = (incl, psi_m): W_m -> A`` to the m-th factor and
    ``e_m`` inserts ``a -> W_m``; every ``B^J`` and ``W_m`` is then scrambled by
    a random automorphism, which preserves (a)-(d).
    """
    n = rng.randint(0, n_max)
    nA = rng.randint(1, 2)
    na = rng.randint(0, nA)
    a = la.colspace(la.random_matrix(rng, nA, na, -2, 2)) if na else la.zeros(nA, 0)
    if a.shape[1] < na:
        a = la.columns(la.eye(nA), range(na))
    na = a.shape[1]
    dY = rng.randint(1, 2 if n <= 2 else 1)
    W = {}
    for m in range(1, n + 1):
        du = rng.randint(0, 1)
        dw = na + du
        psi = la.random_matrix(rng, nA, du, -2, 2)
        phi = la.hcat(a, psi, rows=nA)
        eps = la.columns(la.eye(dw), range(na))
        H = la.random_invertible(rng, dw)
        W[m] = (dw, la.mul(phi, la.inverse(H)), la.mul(H, eps))
    dim_B, G = {}, {}
    for J in _subsets(n):
        d = dY
        for m in J:
            d *= W[m][0]
        dim_B[J] = d
        G[J] = la.random_invertible(rng, d)
    partial, eps = {}, {}
    for J in _subsets(n):
        for m in J:
            Jm = tuple(x for x in J if x != m)
            k = J.index(m)
            # factors: Y, W_J[0..]; apply phi on factor k+1, then move A to the end
            dimsJ = [dY] + [W[x][0] for x in J]
            mats = [la.eye(dY)] + [W[x][1] if x == m else la.eye(W[x][0]) for x in J]
            Pm = la.kron_all(mats)  # Y (x) ... A at slot k+1 ...
            dims_after = [dY] + [nA if x == m else W[x][0] for x in J]
            order = [t for t in range(len(dims_after)) if t != k + 1] + [k + 1]
            Pm = la.mul(la.tensor_permutation(dims_after, order), Pm)
            # scramble: (G_{J-m} (x) id_A) Pm G_J^-1
            partial[(J, m)] = la.mul(la.mul(la.kron(G[Jm], la.eye(nA)), Pm), la.inverse(G[J]))
            # e_m: B^{J-m} (x) a -> B^J, insert a at slot k+1
            dims_in = [dY] + [W[x][0] for x in Jm] + [na]
            order_in = list(range(k + 1)) + [len(dims_in) - 1] + list(range(k + 1, len(dims_in) - 1))
            perm = la.tensor_permutation(dims_in, order_in)
            mats = [la.eye(dY)] + [W[x][2] if x == m else la.eye(W[x][0]) for x in J]
            Em = la.mul(la.kron_all(mats), perm)
            eps[(J, m)] = la.mul(la.mul(G[J], Em), la.kron(la.inverse(G[Jm]), la.eye(na)))
    return AcyclicityData(n, nA, a, dim_B, partial, eps)


# -- C_n = (V' -> V)^{(x) n} --------------------------------------------------------


@dataclass
class QuasiIsoReport:
    n: int
    cohomology: dict
    top_dim: int
    target_dim: int
    induced_rank: int

    @property
    def ok(self) -> bool:
        low = all(v == 0 for i, v in self.cohomology.items() if i < self.n)
        return low and self.top_dim == self.target_dim == self.induced_rank

    def to_json(self):
        return {"n": self.n, "cohomology": self.cohomology, "top": self.top_dim, "target": self.target_dim, "induced_rank": self.induced_rank, "ok": self.ok}


def tensor_quasi_iso_check(f, g, n: int) -> QuasiIsoReport:
    """``f: V' -> V`` injective, ``g: V -> V''`` surjective, ``im f = ker g``."""
    dV = f.shape[0]
    if g.shape[1] != dV:
        raise NotExactSequenceError("shapes do not compose")
    if la.rank(f) != f.shape[1] or la.rank(g) != g.shape[0] or not la.is_zero(la.mul(g, f)) or la.rank(f) + la.rank(g) != dV:
        raise NotExactSequenceError("0 -> V' -> V -> V'' -> 0 is not exact")
    d1, d2 = f.shape[1], g.shape[0]
    # reuse the tensor construction: B^J = V'^{(x) J}, A = V, partial = f on the slot
    dim_B = {}
    partial = {}
    for J in _subsets(n):
        dim_B[J] = d1 ** len(J)
    for J in _subsets(n):
        for m in J:
            k = J.index(m)
            mats = [f if x == m else la.eye(d1) for x in J]
            Pm = la.kron_all(mats)
            dims_after = [dV if x == m else d1 for x in J]
            order = [t for t in range(len(J)) if t != k] + [k]
            partial[(J, m)] = la.mul(la.tensor_permutation(dims_after, order), Pm)
    data = AcyclicityData(n, dV, la.zeros(dV, 0), dim_B, partial, {})
    E = build_tensor_complex(data)
    coh = {}
    for i in range(n + 1):
        out = la.rank(E.d[i]) if i < n else 0
        inn = la.rank(E.d[i - 1]) if i > 0 else 0
        coh[i] = E.dims[i] - out - inn
    G = la.kron_all([g] * n)
    induced = la.rank(G)
    # the map must kill the boundaries and be onto
    if n > 0 and not la.is_zero(la.mul(G, E.d[n - 1])):
        induced = -1
    return QuasiIsoReport(n, coh, coh[n], d2 ** n, induced)


def random_short_exact(rng, max_dim: int = 2):
    """``0 -> V' -> V -> V'' -> 0`` with scrambled bases."""
    d1 = rng.randint(0, max_dim)
    d2 = rng.randint(0, max_dim)
    dV = d1 + d2
    H = la.random_invertible(rng, dV)
    f = la.mul(H, la.columns(la.eye(dV), range(d1)))
    g = la.mul(la.rows_of(la.eye(dV), range(d1, dV)), la.inverse(H))
    S = la.random_invertible(rng, d2)
    return f, la.mul(S, g)
