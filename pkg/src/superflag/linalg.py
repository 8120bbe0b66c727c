"""Exact rational sparse linear algebra: RREF, rank/kernel/image, solve, complement.

All arithmetic is over Q via gmpy2.mpq.  Every canonical object here is a reduced
row echelon form, which is unique for a given span, so results are independent of
entry insertion order.
"""

from __future__ import annotations

from typing import Iterable, Optional

from gmpy2 import mpq

Rational = mpq
Vec = dict  # sparse vector: coordinate (int) -> nonzero mpq

ZERO = mpq(0)
ONE = mpq(1)


def rat(x) -> mpq:
    """Coerce an int / string ("3/2") / Fraction to an exact rational."""
    return mpq(x)


def vec_axpy(target: Vec, coef, src: Vec) -> None:
    """target += coef * src in place, dropping zero entries."""
    if not coef:
        return
    for k, v in src.items():
        w = target.get(k)
        if w is None:
            target[k] = coef * v
        else:
            w = w + coef * v
            if w:
                target[k] = w
            else:
                del target[k]


def vec_scale(v: Vec, coef) -> Vec:
    if not coef:
        return {}
    return {k: coef * x for k, x in v.items()}


def vec_dot(a: Vec, b: Vec):
    if len(b) < len(a):
        a, b = b, a
    total = ZERO
    for k, v in a.items():
        w = b.get(k)
        if w is not None:
            total += v * w
    return total


def rref(rows: Iterable[Vec]) -> tuple[list[Vec], list[int]]:
    """Reduced row echelon basis of the span of ``rows``.

    Returns (basis, pivots) with pivots strictly increasing, each basis vector
    having coefficient 1 at its pivot coordinate and zeros at all other pivots.
    """
    basis: list[Vec] = []
    piv: dict[int, int] = {}
    colidx: dict[int, set] = {}  # coordinate -> indices of basis rows hitting it

    for row in rows:
        r = {k: v for k, v in row.items() if v}
        # Basis rows are zero at every pivot column but their own, so eliminating
        # the pivot columns present in r never reintroduces one: a single pass
        # over the snapshot fully reduces r against the current RREF.
        for k in [k for k in r if k in piv]:
            coef = -r[k]
            for kk, v in basis[piv[k]].items():
                w = r.get(kk)
                if w is None:
                    r[kk] = coef * v
                else:
                    w = w + coef * v
                    if w:
                        r[kk] = w
                    else:
                        del r[kk]
        if not r:
            continue
        lead = min(r)
        inv = 1 / r[lead]
        if inv != 1:
            r = {k: v * inv for k, v in r.items()}
        new = len(basis)
        basis.append(r)
        piv[lead] = new
        for k in r:
            colidx.setdefault(k, set()).add(new)
        hits = colidx.get(lead)
        for i in sorted(hits):
            if i == new:
                continue
            tgt = basis[i]
            coef = -tgt[lead]
            for k, v in r.items():
                w = tgt.get(k)
                if w is None:
                    tgt[k] = coef * v
                    colidx.setdefault(k, set()).add(i)
                else:
                    w = w + coef * v
                    if w:
                        tgt[k] = w
                    else:
                        del tgt[k]
                        colidx[k].discard(i)

    order = sorted(range(len(basis)), key=lambda i: min(basis[i]))
    basis = [basis[i] for i in order]
    pivots = [min(b) for b in basis]
    return basis, pivots


class SparseMatrix:
    """Sparse matrix over Q; ``entries`` maps (row, col) to a nonzero rational."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Optional[dict] = None):
        self.rows = rows
        self.cols = cols
        ent = {}
        if entries:
            for (r, c), v in entries.items():
                if not (0 <= r < rows and 0 <= c < cols):
                    raise ValueError(f"entry ({r},{c}) out of bounds {rows}x{cols}")
                if v:
                    ent[(r, c)] = mpq(v)
        self.entries = ent

    @classmethod
    def from_dense(cls, data) -> "SparseMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, {(i, j): mpq(v) for i, row in enumerate(data)
                                for j, v in enumerate(row) if v})

    @classmethod
    def from_columns(cls, rows: int, columns: list) -> "SparseMatrix":
        return cls(rows, len(columns), {(r, j): v for j, col in enumerate(columns)
                                        for r, v in col.items()})

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): ONE for i in range(n)})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def row_vectors(self) -> list:
        out = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def col_vectors(self) -> list:
        out = [dict() for _ in range(self.cols)]
        for (r, c), v in self.entries.items():
            out[c][r] = v
        return out

    def column(self, j: int) -> Vec:
        return {r: v for (r, c), v in self.entries.items() if c == j}

    def matvec(self, x: Vec) -> Vec:
        cols = {}
        for (r, c), v in self.entries.items():
            cols.setdefault(c, []).append((r, v))
        out: Vec = {}
        for c, xv in x.items():
            if not xv:
                continue
            for r, v in cols.get(c, ()):
                w = out.get(r)
                w = v * xv if w is None else w + v * xv
                if w:
                    out[r] = w
                else:
                    del out[r]
        return out

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols_of_self: dict[int, list] = {}
        for (r, c), v in self.entries.items():
            cols_of_self.setdefault(c, []).append((r, v))
        by_col_of_other: dict[int, dict] = {}
        for (r, c), v in other.entries.items():
            by_col_of_other.setdefault(c, {})[r] = v
        out = {}
        for j, col in by_col_of_other.items():
            acc: Vec = {}
            for k, xv in col.items():
                for r, v in cols_of_self.get(k, ()):
                    w = acc.get(r)
                    w = v * xv if w is None else w + v * xv
                    if w:
                        acc[r] = w
                    else:
                        del acc[r]
            for r, v in acc.items():
                out[(r, j)] = v
        return SparseMatrix(self.rows, other.cols, out)

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows,
                            {(c, r): v for (r, c), v in self.entries.items()})

    def add(self, other: "SparseMatrix", coef=ONE) -> "SparseMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in add")
        ent = dict(self.entries)
        for k, v in other.entries.items():
            w = ent.get(k)
            w = coef * v if w is None else w + coef * v
            if w:
                ent[k] = w
            else:
                del ent[k]
        return SparseMatrix(self.rows, self.cols, ent)

    def scale(self, coef) -> "SparseMatrix":
        if not coef:
            return SparseMatrix(self.rows, self.cols)
        return SparseMatrix(self.rows, self.cols,
                            {k: coef * v for k, v in self.entries.items()})

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __hash__(self):
        raise TypeError("SparseMatrix is unhashable")

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


class Subspace:
    """Subspace given by a reduced-echelon basis with strictly increasing pivots."""

    __slots__ = ("ambient", "basis", "pivots")

    def __init__(self, ambient: int, basis: list, pivots: list):
        self.ambient = ambient
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def from_vectors(cls, ambient: int, vectors: Iterable[Vec]) -> "Subspace":
        basis, pivots = rref(vectors)
        for p in pivots:
            if not 0 <= p < ambient:
                raise ValueError(f"coordinate {p} outside ambient dimension {ambient}")
        return cls(ambient, basis, pivots)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Vec) -> Vec:
        """Canonical residual of v modulo this subspace (zero iff v is a member)."""
        r = dict(v)
        for i, p in enumerate(self.pivots):
            c = r.get(p)
            if c:
                vec_axpy(r, -c, self.basis[i])
        return r

    def coords(self, v: Vec) -> Optional[Vec]:
        """Coefficients of v in the echelon basis, or None if v is not a member."""
        out: Vec = {}
        r = dict(v)
        for i, p in enumerate(self.pivots):
            c = r.get(p)
            if c:
                out[i] = c
                vec_axpy(r, -c, self.basis[i])
        return None if r else out

    def contains(self, v: Vec) -> bool:
        return not self.reduce(v)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"


def matrix_rank(m: SparseMatrix) -> int:
    """Exact rank via a single elimination in the narrower orientation."""
    mm = m.transpose() if m.cols > m.rows else m
    return len(rref(mm.row_vectors())[0])


def rank_kernel_image(m: SparseMatrix) -> tuple[int, Subspace, Subspace]:
    """Exact rank, kernel (subspace of the column-index space), and column span."""
    row_basis, row_pivots = rref(m.row_vectors())
    rank = len(row_basis)
    pivset = set(row_pivots)
    kernel_vecs = []
    for f in range(m.cols):
        if f in pivset:
            continue
        v: Vec = {f: ONE}
        for i, p in enumerate(row_pivots):
            c = row_basis[i].get(f)
            if c:
                v[p] = -c
        kernel_vecs.append(v)
    kernel = Subspace.from_vectors(m.cols, kernel_vecs)
    image = Subspace.from_vectors(m.rows, m.col_vectors())
    if rank + kernel.dim != m.cols or image.dim != rank:
        raise AssertionError("rank-nullity violated; elimination bug")
    return rank, kernel, image


def solve(m: SparseMatrix, b: Vec) -> Optional[Vec]:
    """Echelon-canonical solution of m @ x = b (free variables zero), or None."""
    for k in b:
        if not 0 <= k < m.rows:
            raise ValueError(f"rhs coordinate {k} outside {m.rows} rows")
    aug = m.cols  # augmented column index
    rows = m.row_vectors()
    for r, v in b.items():
        if v:
            rows[r][aug] = v
    basis, pivots = rref(rows)
    x: Vec = {}
    for i, p in enumerate(pivots):
        if p == aug:
            return None
        c = basis[i].get(aug)
        if c:
            x[p] = c
    return x


def echelon_complement(sub: Subspace) -> Subspace:
    """Span of standard basis vectors at the non-pivot coordinates of ``sub``."""
    pivset = set(sub.pivots)
    free = [j for j in range(sub.ambient) if j not in pivset]
    return Subspace(sub.ambient, [{j: ONE} for j in free], free)


def hnf_rows(rows: list) -> list[tuple[int, list[int]]]:
    """Row Hermite form of the integer lattice spanned by ``rows``.

    Returns [(pivot_col, row)] sorted by pivot_col, pivots positive, each row
    zero left of its pivot, entries above each pivot reduced into [0, pivot).
    """
    if not rows:
        return []
    n = len(rows[0])
    work = [list(r) for r in rows if any(r)]
    result: list[tuple[int, list[int]]] = []
    for col in range(n):
        live = [r for r in work if r[col]]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            a = live[0]
            for r in live[1:]:
                q = r[col] // a[col]
                if q:
                    for j in range(col, n):
                        r[j] -= q * a[j]
            live = [r for r in live if r[col]]
        pivot_row = live[0]
        if pivot_row[col] < 0:
            for j in range(col, n):
                pivot_row[j] = -pivot_row[j]
        result.append((col, pivot_row))
        work = [r for r in work if r is not pivot_row and any(r[col:])]
        for r in work:
            if r[col]:
                q = r[col] // pivot_row[col]
                for j in range(col, n):
                    r[j] -= q * pivot_row[j]
        work = [r for r in work if any(r)]
    # reduce entries above each pivot
    for idx, (col, row) in enumerate(result):
        for jdx in range(idx):
            above = result[jdx][1]
            q = above[col] // row[col]
            if q:
                for j in range(col, len(row)):
                    above[j] -= q * row[j]
    return result


def hnf_reduce(v, hnf) -> tuple:
    """Canonical representative of integer vector v modulo the HNF lattice."""
    w = list(v)
    n = len(w)
    for col, row in hnf:
        q = w[col] // row[col]
        if q:
            for j in range(col, n):
                w[j] -= q * row[j]
    return tuple(w)
