"""Exact linear algebra over Q on top of sympy's DomainMatrix.

Subspaces of Q^n are matrices whose columns form a basis.  Zero-sized
shapes are handled here so callers never special-case them.
"""

from __future__ import annotations

from fractions import Fraction

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

Mat = DomainMatrix


def zeros(m: int, n: int) -> Mat:
    return DomainMatrix.zeros((m, n), QQ)


def eye(n: int) -> Mat:
    return DomainMatrix.eye(n, QQ)


def _q(v):
    if isinstance(v, Fraction):
        return QQ(v.numerator, v.denominator)
    if isinstance(v, str):
        f = Fraction(v)
        return QQ(f.numerator, f.denominator)
    return QQ(v)


def from_rows(rows, m: int | None = None, n: int | None = None) -> Mat:
    rows = [list(r) for r in rows]
    m = len(rows) if m is None else m
    n = (len(rows[0]) if rows else 0) if n is None else n
    if m == 0 or n == 0:
        return zeros(m, n)
    return DomainMatrix([[_q(v) for v in r] for r in rows], (m, n), QQ)


def to_rows(A: Mat) -> list:
    m, n = A.shape
    if m == 0 or n == 0:
        return [[] for _ in range(m)]
    return [[Fraction(int(v.numerator), int(v.denominator)) for v in r] for r in A.to_Matrix().tolist()]


def to_json(A: Mat):
    return {"shape": list(A.shape), "rows": [[str(v) for v in r] for r in to_rows(A)]}


def from_json(obj) -> Mat:
    m, n = obj["shape"]
    return from_rows(obj["rows"], m, n)


def rank(A: Mat) -> int:
    m, n = A.shape
    if m == 0 or n == 0:
        return 0
    return A.rank()


def is_zero(A: Mat) -> bool:
    m, n = A.shape
    return m == 0 or n == 0 or A.is_zero_matrix


def mul(A: Mat, B: Mat) -> Mat:
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} x {B.shape}")
    if 0 in A.shape or 0 in B.shape:
        return zeros(A.shape[0], B.shape[1])
    return A * B


def add(A: Mat, B: Mat) -> Mat:
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} + {B.shape}")
    if 0 in A.shape:
        return A
    return A + B


def neg(A: Mat) -> Mat:
    return A if 0 in A.shape else -A


def scale(A: Mat, c) -> Mat:
    if 0 in A.shape:
        return A
    return A * _q(c)


def hcat(*mats: Mat, rows: int | None = None) -> Mat:
    mats = [M for M in mats if M is not None]
    if rows is None:
        rows = mats[0].shape[0]
    cols = sum(M.shape[1] for M in mats)
    keep = [M for M in mats if M.shape[1]]
    if rows == 0 or not keep:
        return zeros(rows, cols)
    out = keep[0]
    for M in keep[1:]:
        out = out.hstack(M)
    return out


def vcat(*mats: Mat, cols: int | None = None) -> Mat:
    if cols is None:
        cols = mats[0].shape[1]
    rows = sum(M.shape[0] for M in mats)
    keep = [M for M in mats if M.shape[0]]
    if cols == 0 or not keep:
        return zeros(rows, cols)
    out = keep[0]
    for M in keep[1:]:
        out = out.vstack(M)
    return out


def block_diag(*mats: Mat) -> Mat:
    m = sum(M.shape[0] for M in mats)
    n = sum(M.shape[1] for M in mats)
    out = [[QQ(0)] * n for _ in range(m)]
    r0 = c0 = 0
    for M in mats:
        for i, row in enumerate(to_rows(M)):
            for j, v in enumerate(row):
                out[r0 + i][c0 + j] = _q(v)
        r0 += M.shape[0]
        c0 += M.shape[1]
    return from_rows(out, m, n)


def columns(A: Mat, idx) -> Mat:
    idx = list(idx)
    m = A.shape[0]
    if m == 0 or not idx:
        return zeros(m, len(idx))
    return A.extract(list(range(m)), idx)


def rows_of(A: Mat, idx) -> Mat:
    idx = list(idx)
    n = A.shape[1]
    if n == 0 or not idx:
        return zeros(len(idx), n)
    return A.extract(idx, list(range(n)))


def pivots(A: Mat) -> tuple:
    if 0 in A.shape:
        return ()
    return A.rref()[1]


def colspace(A: Mat) -> Mat:
    """Basis of the column span (the greedy independent columns of ``A``)."""
    return columns(A, pivots(A))


def nullspace(A: Mat) -> Mat:
    """Basis of ``{x : A x = 0}`` as columns."""
    m, n = A.shape
    if n == 0:
        return zeros(0, 0)
    if m == 0 or A.is_zero_matrix:
        return eye(n)
    R, piv = A.rref()
    free = [j for j in range(n) if j not in piv]
    if not free:
        return zeros(n, 0)
    Rr = to_rows(R)
    cols = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(piv):
            v[p] = -Rr[r][f]
        cols.append(v)
    return from_rows([list(r) for r in zip(*cols)], n, len(free))


def complement(sub: Mat, big: Mat) -> Mat:
    """Columns of ``big`` that extend a basis of span(sub) to span(sub + big)."""
    k = sub.shape[1]
    piv = pivots(hcat(sub, big, rows=sub.shape[0]))
    return columns(big, [p - k for p in piv if p >= k])


def solve(A: Mat, B: Mat) -> Mat:
    """``X`` with ``A X = B`` for ``A`` of full column rank; raises if inconsistent."""
    m, k = A.shape
    t = B.shape[1]
    if B.shape[0] != m:
        raise ValueError("shape mismatch in solve")
    if t == 0:
        return zeros(k, 0)
    if k == 0:
        if not is_zero(B):
            raise ValueError("inconsistent system")
        return zeros(0, t)
    R, piv = hcat(A, B).rref()
    if list(piv[:k]) != list(range(k)):
        raise ValueError("matrix does not have full column rank")
    if any(p >= k for p in piv):
        raise ValueError("inconsistent system")
    return R.extract(list(range(k)), list(range(k, k + t)))


def in_span(A: Mat, v: Mat) -> bool:
    return rank(hcat(A, v, rows=A.shape[0])) == rank(A)


def same_span(U: Mat, V: Mat) -> bool:
    r = rank(hcat(U, V, rows=U.shape[0]))
    return r == rank(U) == rank(V)


def intersect(U: Mat, V: Mat) -> Mat:
    """Basis of span(U) n span(V)."""
    U, V = colspace(U), colspace(V)
    N = nullspace(hcat(U, neg(V), rows=U.shape[0]))
    return colspace(mul(U, rows_of(N, range(U.shape[1]))))


def kron(A: Mat, B: Mat) -> Mat:
    (m, n), (p, q) = A.shape, B.shape
    if 0 in (m, n, p, q):
        return zeros(m * p, n * q)
    a, b = to_rows(A), to_rows(B)
    out = [[a[i][j] * b[k][l] for j in range(n) for l in range(q)] for i in range(m) for k in range(p)]
    return from_rows(out, m * p, n * q)


def kron_all(mats) -> Mat:
    out = eye(1)
    for M in mats:
        out = kron(out, M)
    return out


def tensor_permutation(dims, order) -> Mat:
    """Matrix sending ``v_0 (x) ... (x) v_{r-1}`` to the factors reordered as ``order``.

    ``order[t]`` is the source position of the t-th output factor.
    """
    import itertools

    dims = list(dims)
    total = 1
    for d in dims:
        total *= d
    out_dims = [dims[o] for o in order]
    rows = [[0] * total for _ in range(total)]

    def flat(idx, ds):
        f = 0
        for i, d in zip(idx, ds):
            f = f * d + i
        return f

    for idx in itertools.product(*[range(d) for d in dims]):
        src = flat(idx, dims)
        dst = flat([idx[o] for o in order], out_dims)
        rows[dst][src] = 1
    return from_rows(rows, total, total)


# -- random generators --------------------------------------------------


def random_matrix(rng, m: int, n: int, lo: int = -2, hi: int = 2) -> Mat:
    return from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)], m, n)


def random_invertible(rng, n: int) -> Mat:
    """Unit lower times unit upper triangular, so always invertible."""
    if n == 0:
        return zeros(0, 0)
    L = [[1 if i == j else (rng.randint(-2, 2) if j < i else 0) for j in range(n)] for i in range(n)]
    U = [[1 if i == j else (rng.randint(-2, 2) if j > i else 0) for j in range(n)] for i in range(n)]
    P = list(range(n))
    rng.shuffle(P)
    Pm = [[1 if P[i] == j else 0 for j in range(n)] for i in range(n)]
    return mul(mul(from_rows(Pm), from_rows(L)), from_rows(U))


def inverse(A: Mat) -> Mat:
    n = A.shape[0]
    if n == 0:
        return A
    return A.inv()
