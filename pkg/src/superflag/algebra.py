"""Free graded-commutative superalgebras with three gradings plus internal weight.

Generators carry (cohomological degree c, flag weight w <= 0, internal weight
s >= 1, intrinsic parity); the Koszul parity governing signs is (c + parity) mod 2
and the totalized degree is t = c + w.  Monomials are normal-ordered tuples of
(generator index, exponent).  Blocks (fixed s, t, c) are finite because every
generator has positive internal weight; bases are ordered sector-major by an
optional abelian multigrading so operator matrices are block diagonal.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterable, Optional

from gmpy2 import mpq

from .linalg import ONE, SparseMatrix, hnf_reduce, hnf_rows

Mono = tuple  # ((gen_index, exponent), ...) sorted by generator index

EVEN = 0
ODD = 1


@dataclass(frozen=True)
class GeneratorSpec:
    """A free generator with its gradings; parity is intrinsic (0 even, 1 odd)."""

    name: str
    c: int
    w: int
    s: int
    parity: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"generator {self.name}: internal weight must be >= 1")
        if self.w > 0:
            raise ValueError(f"generator {self.name}: flag weight must be <= 0")
        if self.parity not in (0, 1):
            raise ValueError(f"generator {self.name}: parity must be 0 or 1")

    @property
    def koszul(self) -> int:
        return (self.c + self.parity) % 2

    @property
    def t(self) -> int:
        return self.c + self.w


class GradedAlgebra:
    """Free graded-commutative algebra on an ordered tuple of generators."""

    def __init__(self, gens: Iterable[GeneratorSpec],
                 sector_vectors: Optional[list] = None,
                 sector_relations: Optional[list] = None):
        self.gens = tuple(gens)
        names = [g.name for g in self.gens]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        self.s_of = tuple(g.s for g in self.gens)
        self.t_of = tuple(g.t for g in self.gens)
        self.c_of = tuple(g.c for g in self.gens)
        self.koszul_of = tuple(g.koszul for g in self.gens)
        self.index = {g.name: i for i, g in enumerate(self.gens)}
        if sector_vectors is not None:
            if len(sector_vectors) != len(self.gens):
                raise ValueError("one sector vector per generator required")
            self._lattice = hnf_rows(sector_relations or [])
            self._sector_vectors = tuple(
                hnf_reduce(v, self._lattice) for v in sector_vectors)
            self._sector_dim = len(self._sector_vectors[0]) if self.gens else 0
        else:
            self._lattice = []
            self._sector_vectors = None
            self._sector_dim = 0
        # pruning bound for block enumeration: per unit of s, how far t and c move
        self._rate = max([max(abs(g.t), abs(g.c)) for g in self.gens], default=0)
        self._blocks: dict = {}

    # -- monomials ---------------------------------------------------------

    def mono_degrees(self, m: Mono) -> tuple[int, int, int]:
        s = t = c = 0
        for g, e in m:
            s += e * self.s_of[g]
            t += e * self.t_of[g]
            c += e * self.c_of[g]
        return s, t, c

    def mono_koszul(self, m: Mono) -> int:
        return sum(e * self.koszul_of[g] for g, e in m) % 2

    def sector(self, m: Mono) -> tuple:
        if self._sector_vectors is None:
            return ()
        total = [0] * self._sector_dim
        for g, e in m:
            vec = self._sector_vectors[g]
            for i in range(self._sector_dim):
                total[i] += e * vec[i]
        return hnf_reduce(total, self._lattice)

    def mul_mono(self, m1: Mono, m2: Mono):
        """(sign, product monomial), or None when an odd generator squares."""
        if not m1:
            return 1, m2
        if not m2:
            return 1, m1
        kos = self.koszul_of
        odd1 = [g for g, e in m1 if kos[g]]
        swaps = 0
        if odd1:
            for g, e in m2:
                if kos[g]:
                    # odd generators of m1 strictly greater than g must cross g
                    swaps += len(odd1) - bisect_right(odd1, g)
        out = []
        i = j = 0
        while i < len(m1) and j < len(m2):
            g1, e1 = m1[i]
            g2, e2 = m2[j]
            if g1 < g2:
                out.append((g1, e1))
                i += 1
            elif g2 < g1:
                out.append((g2, e2))
                j += 1
            else:
                if kos[g1]:
                    return None
                out.append((g1, e1 + e2))
                i += 1
                j += 1
        out.extend(m1[i:])
        out.extend(m2[j:])
        return (-1 if swaps & 1 else 1), tuple(out)

    def mono_str(self, m: Mono) -> str:
        if not m:
            return "1"
        parts = []
        for g, e in m:
            name = self.gens[g].name
            parts.append(name if e == 1 else f"{name}^{e}")
        return "*".join(parts)

    # -- polynomials -------------------------------------------------------

    def zero(self) -> "GradedPolynomial":
        return GradedPolynomial(self, {})

    def one(self) -> "GradedPolynomial":
        return GradedPolynomial(self, {(): ONE})

    def generator(self, name: str) -> "GradedPolynomial":
        g = self.index[name]
        return GradedPolynomial(self, {((g, 1),): ONE})

    def monomial(self, m: Mono, coef=ONE) -> "GradedPolynomial":
        coef = mpq(coef)
        return GradedPolynomial(self, {tuple(m): coef} if coef else {})

    # -- blocks ------------------------------------------------------------

    def block_data(self, s: int, t: int, c: int):
        """(basis list, monomial->index dict, [(sector, start, stop)]) for a block."""
        key = (s, t, c)
        hit = self._blocks.get(key)
        if hit is not None:
            return hit
        monos = self._enumerate(s, t, c)
        groups: dict = {}
        for m in monos:
            groups.setdefault(self.sector(m), []).append(m)
        basis = []
        sectors = []
        for label in sorted(groups):
            ms = sorted(groups[label])
            sectors.append((label, len(basis), len(basis) + len(ms)))
            basis.extend(ms)
        index = {m: i for i, m in enumerate(basis)}
        data = (basis, index, sectors)
        self._blocks[key] = data
        return data

    def block_basis(self, s: int, t: int, c: int) -> list:
        return self.block_data(s, t, c)[0]

    def _enumerate(self, s: int, t: int, c: int) -> list:
        if s < 0:
            return []
        out = []
        n = len(self.gens)
        rate = self._rate
        stack = []

        def walk(i: int, rs: int, rt: int, rc: int):
            if rs == 0:
                if rt == 0 and rc == 0:
                    out.append(tuple(stack))
                return
            if i == n or abs(rt) > rs * rate or abs(rc) > rs * rate:
                return
            g = self.gens[i]
            top = rs // g.s
            if g.koszul:
                top = min(top, 1)
            walk(i + 1, rs, rt, rc)
            for e in range(1, top + 1):
                stack.append((i, e))
                walk(i + 1, rs - e * g.s, rt - e * g.t, rc - e * g.c)
                stack.pop()

        walk(0, s, t, c)
        return out


class GradedPolynomial:
    """Finite Q-linear combination of normal-ordered monomials."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: GradedAlgebra, terms: dict):
        self.algebra = algebra
        self.terms = terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (isinstance(other, GradedPolynomial)
                and self.algebra is other.algebra and self.terms == other.terms)

    def __hash__(self):
        raise TypeError("GradedPolynomial is unhashable")

    def __add__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        self._check(other)
        out = dict(self.terms)
        for m, cf in other.terms.items():
            w = out.get(m)
            w = cf if w is None else w + cf
            if w:
                out[m] = w
            else:
                del out[m]
        return GradedPolynomial(self.algebra, out)

    def __neg__(self) -> "GradedPolynomial":
        return GradedPolynomial(self.algebra, {m: -cf for m, cf in self.terms.items()})

    def __sub__(self, other: "GradedPolynomial") -> "GradedPolynomial":
        return self + (-other)

    def scale(self, coef) -> "GradedPolynomial":
        coef = mpq(coef)
        if not coef:
            return GradedPolynomial(self.algebra, {})
        return GradedPolynomial(self.algebra, {m: coef * cf for m, cf in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, GradedPolynomial):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def homogeneous_degree(self) -> Optional[tuple[int, int, int]]:
        """(s, t, c) if every term agrees, else None."""
        degree = None
        for m in self.terms:
            d = self.algebra.mono_degrees(m)
            if degree is None:
                degree = d
            elif degree != d:
                return None
        return degree

    def koszul_parity(self) -> Optional[int]:
        parity = None
        for m in self.terms:
            p = self.algebra.mono_koszul(m)
            if parity is None:
                parity = p
            elif parity != p:
                return None
        return parity

    def _check(self, other: "GradedPolynomial") -> None:
        if self.algebra is not other.algebra:
            raise ValueError("operands live in different algebras")

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for m in sorted(self.terms):
            cf = self.terms[m]
            ms = self.algebra.mono_str(m)
            bits.append(f"{cf}" if m == () else f"{cf}*{ms}")
        return " + ".join(bits)


def multiply(a: GradedPolynomial, b: GradedPolynomial) -> GradedPolynomial:
    """Graded-commutative product with Koszul signs."""
    a._check(b)
    alg = a.algebra
    out: dict = {}
    mul_mono = alg.mul_mono
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            hit = mul_mono(ma, mb)
            if hit is None:
                continue
            sign, m = hit
            cf = ca * cb if sign > 0 else -(ca * cb)
            w = out.get(m)
            w = cf if w is None else w + cf
            if w:
                out[m] = w
            else:
                del out[m]
    return GradedPolynomial(alg, out)


class Derivation:
    """Graded derivation determined by generator images, extended by Leibniz.

    ``parity`` is the Koszul parity of the operator; ``shifts`` = (dc, dw, ds)
    must be satisfied by every generator image (checked on construction).
    """

    __slots__ = ("algebra", "parity", "shifts", "images", "name")

    def __init__(self, algebra: GradedAlgebra, parity: int,
                 shifts: tuple[int, int, int], images: dict, name: str = "D"):
        self.algebra = algebra
        self.parity = parity
        self.shifts = shifts
        self.images = {}
        self.name = name
        dc, dw, ds = shifts
        for g, poly in images.items():
            if isinstance(g, str):
                g = algebra.index[g]
            if not poly:
                continue
            spec = algebra.gens[g]
            want = (spec.s + ds, spec.c + spec.w + dc + dw, spec.c + dc)
            got = poly.homogeneous_degree()
            if got != want:
                raise ValueError(
                    f"{name}({spec.name}): image grading {got} != expected {want}")
            p = poly.koszul_parity()
            if p is not None and p != (spec.koszul + parity) % 2:
                raise ValueError(f"{name}({spec.name}): image parity mismatch")
            self.images[g] = poly

    @property
    def dt(self) -> int:
        return self.shifts[0] + self.shifts[1]

    def __call__(self, a: GradedPolynomial) -> GradedPolynomial:
        return apply_derivation(self, a)

    def apply_monomial(self, m: Mono, coef=ONE) -> GradedPolynomial:
        alg = self.algebra
        out = alg.zero()
        if not self.images:
            return out
        kos = alg.koszul_of
        prefix_parity = 0
        for i, (g, e) in enumerate(m):
            img = self.images.get(g)
            if img is not None:
                sign = -1 if (self.parity and prefix_parity) else 1
                cf = coef * e if sign > 0 else -(coef * e)
                left = GradedPolynomial(alg, {m[:i]: ONE})
                rest_mono = tuple(([(g, e - 1)] if e > 1 else []) + list(m[i + 1:]))
                term = multiply(multiply(left, img),
                                GradedPolynomial(alg, {rest_mono: ONE}))
                out = out + term.scale(cf)
            prefix_parity ^= (e * kos[g]) & 1
        return out

    def __repr__(self) -> str:
        return f"Derivation({self.name}, shifts={self.shifts})"


def apply_derivation(D: Derivation, a: GradedPolynomial) -> GradedPolynomial:
    """Extend D over a polynomial by the graded Leibniz rule."""
    if D.algebra is not a.algebra:
        raise ValueError("derivation and argument live in different algebras")
    out = D.algebra.zero()
    for m, cf in a.terms.items():
        out = out + D.apply_monomial(m, cf)
    return out


def commutator(D: Derivation, E: Derivation, name: str = "") -> Derivation:
    """Graded commutator [D, E] = D E - (-1)^{|D||E|} E D as a derivation."""
    if D.algebra is not E.algebra:
        raise ValueError("derivations live in different algebras")
    alg = D.algebra
    sign = -1 if (D.parity and E.parity) else 1
    images = {}
    for g in range(len(alg.gens)):
        gen_poly = GradedPolynomial(alg, {((g, 1),): ONE})
        img = D(E(gen_poly)) - E(D(gen_poly)).scale(sign)
        if img:
            images[g] = img
    shifts = tuple(x + y for x, y in zip(D.shifts, E.shifts))
    return Derivation(alg, (D.parity + E.parity) % 2, shifts, images,
                      name or f"[{D.name},{E.name}]")


def block_basis(alg: GradedAlgebra, s: int, t: int, c: int) -> list:
    """All monomials of the block in canonical (sector-major) order."""
    return alg.block_basis(s, t, c)


def target_block(D: Derivation, source: tuple[int, int, int]) -> tuple[int, int, int]:
    s, t, c = source
    return (s + D.shifts[2], t + D.dt, c + D.shifts[0])


def operator_matrix(D: Derivation, source: tuple[int, int, int]) -> SparseMatrix:
    """Matrix of D from the source block to the shifted target block."""
    alg = D.algebra
    target = target_block(D, source)
    src = alg.block_basis(*source)
    _, tgt_index, _ = alg.block_data(*target)
    entries = {}
    for j, m in enumerate(src):
        img = D.apply_monomial(m)
        for mm, cf in img.terms.items():
            r = tgt_index.get(mm)
            if r is None:
                raise AssertionError(
                    f"{D.name} left the expected block: {alg.mono_str(mm)} "
                    f"not in block {target}")
            entries[(r, j)] = cf
    return SparseMatrix(len(tgt_index), len(src), entries)


def operator_sector_matrices(D: Derivation, source: tuple[int, int, int]) -> dict:
    """Per-sector matrices of D (sectors are preserved, so the matrix is
    block diagonal); keys are sector labels present in the source block."""
    alg = D.algebra
    target = target_block(D, source)
    src_basis, _, src_sectors = alg.block_data(*source)
    tgt_basis, _, tgt_sectors = alg.block_data(*target)
    tgt_table = {label: (start, stop) for label, start, stop in tgt_sectors}
    out = {}
    for label, start, stop in src_sectors:
        t_start, t_stop = tgt_table.get(label, (0, 0))
        local_index = {m: i for i, m in enumerate(tgt_basis[t_start:t_stop])}
        entries = {}
        for j in range(start, stop):
            img = D.apply_monomial(src_basis[j])
            for mm, cf in img.terms.items():
                r = local_index.get(mm)
                if r is None:
                    raise AssertionError(
                        f"{D.name} left sector {label} of block {target}: "
                        f"{alg.mono_str(mm)}")
                entries[(r, j - start)] = cf
        out[label] = SparseMatrix(t_stop - t_start, stop - start, entries)
    return out
