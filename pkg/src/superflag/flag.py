"""Weighted-flag de Rham complex over a supertranslation algebra.

The complex is the polynomial superspace ring on even coordinates x^mu, odd
coordinates theta^alpha, together with odd cone coordinates lambda^alpha of
weight -1 and even fiber coordinates v^mu of weight -2.  Its differential is
the sum of three odd derivations, graded by how much weight they drop:

* ``d1``   (drop 0):  (lambda Gamma^mu lambda) d/dv^mu
* ``d0``   (drop 1):  lambda^alpha (d/dtheta^alpha
                       - Gamma^mu_{alpha beta} theta^beta d/dx^mu)
* ``dm1``  (drop 2):  v^mu d/dx^mu

The total differential squares to zero precisely because Gamma is symmetric;
the square splits into five weight components that must vanish separately.
All three derivations preserve the abelian multigrading inherited from the
quadrics (x and v carry the degree of their quadric, theta and lambda the
degree of their odd coordinate), so every blockwise computation is split by
sector exactly as in the coalgebra cohomology.
"""

from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq

from .algebra import (Derivation, GeneratorSpec, GradedAlgebra,
                      GradedPolynomial, apply_derivation, multiply,
                      operator_matrix)
from .homology import ChainContraction, chain_dims
from .linalg import SparseMatrix
from .superalgebra import SuperTranslationAlgebra

WEIGHT_BUCKETS = ("drop0", "drop1", "drop2", "drop3", "drop4")


@dataclass
class FlagComplex:
    n: SuperTranslationAlgebra
    algebra: GradedAlgebra
    d1: Derivation
    d0: Derivation
    dm1: Derivation

    # generator index helpers (normal order: x < theta < lambda < v)
    def x_index(self, mu: int) -> int:
        return mu

    def theta_index(self, alpha: int) -> int:
        return self.n.n_even + alpha

    def lambda_index(self, alpha: int) -> int:
        return self.n.n_even + self.n.n_odd + alpha

    def v_index(self, mu: int) -> int:
        return self.n.n_even + 2 * self.n.n_odd + mu

    def total_apply(self, poly: GradedPolynomial) -> GradedPolynomial:
        return (apply_derivation(self.d1, poly)
                + apply_derivation(self.d0, poly)
                + apply_derivation(self.dm1, poly))


def _full_gamma(n: SuperTranslationAlgebra) -> dict:
    out = {}
    for (mu, a, b), coef in n.gamma.items():
        out[(mu, a, b)] = out.get((mu, a, b), mpq(0)) + coef
        if a != b:
            out[(mu, b, a)] = out.get((mu, b, a), mpq(0)) + coef
    return out


def build_superspace_complex(n: SuperTranslationAlgebra,
                             d0_gamma: dict = None) -> FlagComplex:
    """The flag complex of ``n``.

    ``d0_gamma`` overrides the (full, not upper-triangular) tensor used in the
    x-image of ``d0``; it exists so that tests can demonstrate how a
    non-symmetric tensor breaks the square of the total differential.
    """
    gens = []
    for mu in range(n.n_even):
        gens.append(GeneratorSpec(f"x{mu}", c=0, w=0, s=2, parity=0))
    for a in range(n.n_odd):
        gens.append(GeneratorSpec(f"th{a}", c=0, w=0, s=1, parity=1))
    for a in range(n.n_odd):
        gens.append(GeneratorSpec(f"la{a}", c=1, w=-1, s=1, parity=1))
    for mu in range(n.n_even):
        gens.append(GeneratorSpec(f"v{mu}", c=1, w=-2, s=2, parity=0))
    odd_vecs, even_vecs, relations = n.multigrading()
    sector_vectors = (even_vecs + odd_vecs + odd_vecs + even_vecs)
    alg = GradedAlgebra(gens, sector_vectors=sector_vectors,
                        sector_relations=relations)
    cx = FlagComplex(n, alg, None, None, None)

    d1_images = {}
    for mu in range(n.n_even):
        poly = alg.zero()
        for (m2, a, b), coef in n.gamma.items():
            if m2 != mu:
                continue
            la, lb = cx.lambda_index(a), cx.lambda_index(b)
            if a == b:
                poly = poly + GradedPolynomial(alg, {((la, 2),): coef})
            else:
                poly = poly + GradedPolynomial(alg, {((la, 1), (lb, 1)): 2 * coef})
        if poly:
            d1_images[cx.v_index(mu)] = poly
    cx.d1 = Derivation(alg, 1, (1, 0, 0), d1_images, name="d1")

    full = _full_gamma(n) if d0_gamma is None else {
        k: mpq(c) for k, c in d0_gamma.items() if c}
    d0_images = {}
    for a in range(n.n_odd):
        d0_images[cx.theta_index(a)] = alg.generator(f"la{a}")
    for mu in range(n.n_even):
        poly = alg.zero()
        for (m2, a, b), coef in full.items():
            if m2 != mu:
                continue
            term = multiply(alg.generator(f"la{a}"), alg.generator(f"th{b}"))
            poly = poly + term.scale(-coef)
        if poly:
            d0_images[cx.x_index(mu)] = poly
    cx.d0 = Derivation(alg, 1, (1, -1, 0), d0_images, name="d0")

    dm1_images = {cx.x_index(mu): alg.generator(f"v{mu}")
                  for mu in range(n.n_even)}
    cx.dm1 = Derivation(alg, 1, (1, -2, 0), dm1_images, name="dm1")
    return cx


def square_components(cx: FlagComplex) -> dict:
    """Defects of the five weight components of (total differential)^2.

    Returns {bucket: {generator name: nonzero polynomial}}; all five empty
    dictionaries mean the total differential squares to zero (it suffices to
    check generators, since each component is itself a derivation).
    """
    d1, d0, dm1 = cx.d1, cx.d0, cx.dm1

    def two(da, db, g):
        return apply_derivation(da, apply_derivation(db, g))

    out = {name: {} for name in WEIGHT_BUCKETS}
    for spec in cx.algebra.gens:
        g = cx.algebra.generator(spec.name)
        defects = {
            "drop0": two(d1, d1, g),
            "drop1": two(d1, d0, g) + two(d0, d1, g),
            "drop2": two(d0, d0, g) + two(d1, dm1, g) + two(dm1, d1, g),
            "drop3": two(d0, dm1, g) + two(dm1, d0, g),
            "drop4": two(dm1, dm1, g),
        }
        for name, poly in defects.items():
            if poly:
                out[name][spec.name] = poly
    return out


def total_square_is_zero(cx: FlagComplex) -> bool:
    return not any(square_components(cx).values())


def square_check_block(cx: FlagComplex, s: int, t: int, c: int) -> dict:
    """Blockwise matrices of the five weight components of the square.

    Composes the operator matrices out of the block (s, t, c); returns
    {bucket: SparseMatrix}.  A correct complex yields five zero matrices.
    """
    d1, d0, dm1 = cx.d1, cx.d0, cx.dm1

    def mat(d, src):
        return operator_matrix(d, src)

    src = (s, t, c)
    via = {
        "d1": (s, t + 1, c + 1),
        "d0": (s, t, c + 1),
        "dm1": (s, t - 1, c + 1),
    }
    first = {name: mat(d, src) for name, d in
             (("d1", d1), ("d0", d0), ("dm1", dm1))}

    def compose(outer, outer_d, inner):
        return mat(outer_d, via[inner]).matmul(first[inner])

    out = {
        "drop0": compose("d1", d1, "d1"),
        "drop1": compose("d1", d1, "d0").add(compose("d0", d0, "d1")),
        "drop2": compose("d0", d0, "d0")
                 .add(compose("d1", d1, "dm1"))
                 .add(compose("dm1", dm1, "d1")),
        "drop3": compose("d0", d0, "dm1").add(compose("dm1", dm1, "d0")),
        "drop4": compose("dm1", dm1, "dm1"),
    }
    return out


# -- total-complex homology over the cone degree -------------------------------


def superblock(cx: FlagComplex, s: int, c: int) -> tuple:
    """All monomials of scaling s and cone degree c, sector-major.

    Returns (basis list, {mono: position}, sectors as (label, start, stop)).
    Monomials of every weight are merged; within a sector they are ordered by
    totalized degree then by the per-block order.
    """
    entries = []  # (label, t, mono)
    for t in range(-s, c + 1):
        basis, _, sectors = cx.algebra.block_data(s, t, c)
        if not basis:
            continue
        for label, start, stop in sectors:
            for j in range(start, stop):
                entries.append((label, t, basis[j]))
    entries.sort(key=lambda e: (e[0], e[1]))
    basis = [m for _, _, m in entries]
    index = {m: j for j, m in enumerate(basis)}
    sectors = []
    j = 0
    while j < len(entries):
        k = j
        while k < len(entries) and entries[k][0] == entries[j][0]:
            k += 1
        sectors.append((entries[j][0], j, k))
        j = k
    return basis, index, sectors


def _total_tables_transitions(cx: FlagComplex, s: int) -> tuple:
    blocks = [superblock(cx, s, c) for c in range(s + 1)]
    tables = [(len(b[0]), b[2]) for b in blocks]
    transitions = []
    for c in range(s):
        basis, _, sectors = blocks[c]
        _, tindex, tsectors = blocks[c + 1]
        tslice = {label: (start, stop) for label, start, stop in tsectors}
        local = {}
        for label, start, stop in sectors:
            span = tslice.get(label)
            ent = {}
            for col in range(start, stop):
                mono = basis[col]
                poly = cx.total_apply(GradedPolynomial(cx.algebra,
                                                       {mono: mpq(1)}))
                for m2, coef in poly.terms.items():
                    assert span is not None, "differential left its sector"
                    row = tindex[m2]
                    assert span[0] <= row < span[1], \
                        "differential left its sector"
                    ent[(row - span[0], col - start)] = coef
            if ent:
                local[label] = SparseMatrix(span[1] - span[0],
                                            stop - start, ent)
        transitions.append(local)
    return tables, transitions


def total_complex_chain(cx: FlagComplex, s: int,
                        rule: str = "standard") -> ChainContraction:
    """Contraction of the fixed-s total complex graded by cone degree."""
    tables, transitions = _total_tables_transitions(cx, s)
    return ChainContraction(tables, transitions, rule=rule)


def acyclicity_oracle(cx: FlagComplex, s_max: int) -> dict:
    """{(s, c): dim H} for s <= s_max; expected {(0, 0): 1} and nothing else.

    Dimensions only (single elimination per sector), no contraction data.
    """
    out = {}
    for s in range(s_max + 1):
        tables, transitions = _total_tables_transitions(cx, s)
        for c, d in enumerate(chain_dims(tables, transitions)):
            if d:
                out[(s, c)] = d
    return out
