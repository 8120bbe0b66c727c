"""Supertranslation algebras presented by quadratic structure constants.

An algebra here is odd space of dimension n_odd, even space of dimension
n_even, and a symmetric tensor Gamma^mu_{alpha beta} giving the odd-odd
bracket.  The module provides the named presets, the Chevalley-Eilenberg
(Koszul) complex and its blockwise cohomology with explicit contractions, the
nilpotence ideal with Hilbert/dimension data, the defect, and twisting by a
square-zero odd element.

All CE computations are split along an abelian multigrading: each odd
coordinate gets its own lattice degree and each even coordinate inherits the
common degree of its quadric's terms (forced equal by quotienting with the
per-quadric term differences); zero quadrics get fresh degrees.  Every
differential in sight preserves these sectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from . import clifford
from .algebra import (Derivation, GeneratorSpec, GradedAlgebra,
                      GradedPolynomial, operator_sector_matrices)
from .groebner import GroebnerResult, groebner_hilbert as _groebner
from .homology import ChainContraction, block_table
from .linalg import ONE, SparseMatrix, rank_kernel_image

PRESET_NAMES = ("D11", "MIN_TWIST", "MAX_TWIST", "TOY_POINT", "TOY_1D")


class WorkLimitExceeded(Exception):
    """A computation refused to start or continue under the work budget."""


@dataclass(frozen=True)
class SuperTranslationAlgebra:
    """Supertranslation-type algebra: [odd, odd] = 2 Gamma^mu odd odd e_mu."""

    name: str
    n_odd: int
    n_even: int
    gamma: dict  # (mu, alpha, beta) with alpha <= beta -> mpq
    declared_dim_Y: Optional[int] = None
    p0_action: Optional[tuple] = None  # ((odd matrix, even matrix), ...)

    def __post_init__(self):
        clean = {}
        for (mu, a, b), coef in self.gamma.items():
            if not 0 <= mu < self.n_even:
                raise ValueError(f"gamma index mu={mu} out of range")
            if not (0 <= a < self.n_odd and 0 <= b < self.n_odd):
                raise ValueError(f"gamma index pair ({a},{b}) out of range")
            if a > b:
                raise ValueError(f"gamma keys must have alpha <= beta, got ({a},{b})")
            coef = mpq(coef)
            if coef:
                clean[(mu, a, b)] = coef
        object.__setattr__(self, "gamma", clean)

    def gamma_entry(self, mu: int, a: int, b: int) -> mpq:
        if a > b:
            a, b = b, a
        return self.gamma.get((mu, a, b), mpq(0))

    def quadrics(self) -> list:
        """lambda Gamma^mu lambda as commutative polynomials (exponent dicts)."""
        out = [dict() for _ in range(self.n_even)]
        for (mu, a, b), coef in self.gamma.items():
            if a == b:
                mono = tuple(2 if i == a else 0 for i in range(self.n_odd))
                out[mu][mono] = out[mu].get(mono, 0) + coef
            else:
                mono = tuple(1 if i in (a, b) else 0 for i in range(self.n_odd))
                out[mu][mono] = out[mu].get(mono, 0) + 2 * coef
        return [{m: c for m, c in q.items() if c} for q in out]

    def multigrading(self) -> tuple:
        """(odd degree vectors, even degree vectors, lattice relations)."""
        zero_quadrics = [mu for mu in range(self.n_even)
                         if not any(k[0] == mu for k in self.gamma)]
        dim = self.n_odd + len(zero_quadrics)

        def unit(i):
            return tuple(1 if j == i else 0 for j in range(dim))

        odd_vectors = [unit(a) for a in range(self.n_odd)]
        relations = []
        even_vectors = []
        fresh = {mu: k for k, mu in enumerate(zero_quadrics)}
        terms: dict = {}
        for (mu, a, b), _ in sorted(self.gamma.items()):
            vec = tuple(x + y for x, y in zip(unit(a), unit(b)))
            terms.setdefault(mu, []).append(vec)
        for mu in range(self.n_even):
            if mu in fresh:
                even_vectors.append(unit(self.n_odd + fresh[mu]))
                continue
            vecs = terms[mu]
            even_vectors.append(vecs[0])
            for other in vecs[1:]:
                relations.append([x - y for x, y in zip(other, vecs[0])])
        return odd_vectors, even_vectors, relations


def _epsilon(perm) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                sign = -sign
    return sign


def _min_twist_gamma() -> dict:
    pairs = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    index = {p: i for i, p in enumerate(pairs)}
    gamma = {}
    for e in range(5):
        others = [k for k in range(5) if k != e]
        seen = set()
        for a, b in ((x, y) for x in others for y in others if x < y):
            rest = [k for k in others if k not in (a, b)]
            c, d = rest
            key = tuple(sorted((index[(a, b)], index[(c, d)])))
            if key in seen:
                continue
            seen.add(key)
            gamma[(e, key[0], key[1])] = mpq(_epsilon((a, b, c, d, e)))
    return gamma


def preset(name: str) -> SuperTranslationAlgebra:
    """One of the named example algebras."""
    if name == "D11":
        bs = clifford.symmetric_gammas()
        gamma = {}
        for mu, b in enumerate(bs):
            for a in range(clifford.DIM):
                for b2 in range(a, clifford.DIM):
                    if b[a][b2]:
                        gamma[(mu, a, b2)] = mpq(b[a][b2])
        return SuperTranslationAlgebra("D11", 32, 11, gamma, declared_dim_Y=23)
    if name == "MIN_TWIST":
        return SuperTranslationAlgebra("MIN_TWIST", 10, 5, _min_twist_gamma())
    if name == "MAX_TWIST":
        return SuperTranslationAlgebra("MAX_TWIST", 0, 2, {})
    if name == "TOY_POINT":
        return SuperTranslationAlgebra("TOY_POINT", 1, 1, {(0, 0, 0): mpq(1)})
    if name == "TOY_1D":
        return SuperTranslationAlgebra("TOY_1D", 1, 1, {})
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


# -- Chevalley-Eilenberg complex ---------------------------------------------


@dataclass
class CEComplex:
    """Koszul-dual model: free algebra on lambda, v with d = lambda Gamma lambda d/dv."""

    algebra_def: SuperTranslationAlgebra
    algebra: GradedAlgebra
    differential: Derivation

    def block(self, s: int, t: int):
        return self.algebra.block_data(s, t, s + t)

    def t_range(self, s: int) -> range:
        return range(-(s // 2), 1)


def ce_complex(n: SuperTranslationAlgebra) -> CEComplex:
    gens = [GeneratorSpec(f"la{a}", 1, -1, 1, 1) for a in range(n.n_odd)]
    gens += [GeneratorSpec(f"v{m}", 1, -2, 2, 0) for m in range(n.n_even)]
    odd_vecs, even_vecs, relations = n.multigrading()
    alg = GradedAlgebra(gens, sector_vectors=odd_vecs + even_vecs,
                        sector_relations=relations)
    images = {}
    for mu in range(n.n_even):
        poly = alg.zero()
        for (m2, a, b), coef in n.gamma.items():
            if m2 != mu:
                continue
            if a == b:
                poly = poly + GradedPolynomial(alg, {((a, 2),): coef})
            else:
                poly = poly + GradedPolynomial(alg, {((a, 1), (b, 1)): 2 * coef})
        if poly:
            images[n.n_odd + mu] = poly
    d = Derivation(alg, 1, (1, 0, 0), images, name="d_ce")
    return CEComplex(n, alg, d)


class CohomologyModel:
    """Blockwise CE cohomology with contractions, computed lazily per weight."""

    def __init__(self, n: SuperTranslationAlgebra, s_max: int,
                 rule: str = "standard", work_limit: Optional[int] = None):
        self.n = n
        self.s_max = s_max
        self.rule = rule
        self.work_limit = work_limit
        self.complex = ce_complex(n)
        self._chains: dict = {}
        self._work = 0

    def _charge(self, amount: int) -> None:
        self._work += amount
        if self.work_limit is not None and self._work > self.work_limit:
            raise WorkLimitExceeded(
                f"CE cohomology work {self._work} exceeds limit {self.work_limit}")

    @property
    def work(self) -> int:
        return self._work

    def chain(self, s: int, t_stop: int = 1) -> ChainContraction:
        """Contraction of the fixed-s chain over t; ``t_stop`` bounds the top.

        With the default the full chain (through t = 0) is built; passing a
        smaller bound computes only degrees t < t_stop with a buffer on top,
        which keeps large tail blocks out of the elimination.
        """
        if s > self.s_max:
            raise ValueError(f"s={s} exceeds s_max={self.s_max}")
        t_stop = min(t_stop, 1)
        key = (s, t_stop)
        hit = self._chains.get(key)
        if hit is not None:
            return hit
        cx = self.complex
        t_min = -(s // 2)
        ts = [t for t in range(t_min, min(t_stop + 1, 1))]
        tail = 0 if t_stop >= 1 else 1
        tables = []
        mats = []
        for t in ts:
            data = cx.block(s, t)
            self._charge(len(data[0]))
            tables.append(block_table(data))
        for t in ts[:-1]:
            local = operator_sector_matrices(cx.differential, (s, t, s + t))
            self._charge(sum(m.nnz + m.cols for m in local.values()))
            mats.append(local)
        chain = ChainContraction(tables, mats, rule=self.rule, tail=tail)
        self._chains[key] = chain
        return chain

    def _degree_of(self, s: int, t: int) -> int:
        return t + (s // 2)

    def dim(self, s: int, t: int, t_stop: int = 1) -> int:
        if s == 0:
            return 1 if t == 0 else 0
        if t < -(s // 2) or t > 0:
            return 0
        return self.chain(s, t_stop).hdim(self._degree_of(s, t))

    def reps(self, s: int, t: int, t_stop: int = 1) -> list:
        """Canonical representatives as polynomials."""
        if s == 0:
            return [self.complex.algebra.one()] if t == 0 else []
        alg = self.complex.algebra
        basis = alg.block_basis(s, t, s + t)
        out = []
        for row in self.chain(s, t_stop).reps(self._degree_of(s, t)):
            out.append(GradedPolynomial(alg, {basis[j]: c for j, c in row.items()}))
        return out

    def dims_table(self) -> dict:
        """{(s, t): dim} over all s <= s_max (full chains)."""
        table = {}
        for s in range(self.s_max + 1):
            for t in self.t_range(s):
                d = self.dim(s, t)
                if d:
                    table[(s, t)] = d
        return table

    def t_range(self, s: int) -> range:
        return range(-(s // 2), 1)

    def concentration(self) -> set:
        """The set of totalized degrees with nonzero cohomology, s <= s_max."""
        return {t for (_, t) in self.dims_table()}


def ce_cohomology(n: SuperTranslationAlgebra, s_max: int,
                  rule: str = "standard",
                  work_limit: Optional[int] = None) -> CohomologyModel:
    if s_max < 0:
        raise ValueError("s_max must be >= 0")
    return CohomologyModel(n, s_max, rule=rule, work_limit=work_limit)


# -- nilpotence ideal, Hilbert data, defect -----------------------------------


@dataclass(frozen=True)
class NilpotenceIdeal:
    n_vars: int
    generators: tuple  # groebner-format polynomials

    def groebner(self, d_max: int, work_limit: int = 20_000_000) -> GroebnerResult:
        return _groebner(list(self.generators), self.n_vars, d_max, work_limit)


def nilpotence_ideal(n: SuperTranslationAlgebra) -> NilpotenceIdeal:
    return NilpotenceIdeal(n.n_odd, tuple(
        {m: mpq(c) for m, c in q.items()} for q in n.quadrics() if q))


def groebner_hilbert(ideal: NilpotenceIdeal, d_max: int,
                     work_limit: int = 20_000_000) -> GroebnerResult:
    """Hilbert values h(0..d_max) and leading-term data of R/I."""
    return ideal.groebner(d_max, work_limit)


@dataclass(frozen=True)
class DefectResult:
    dim_Y: int
    source: str  # "declared" or "groebner"
    defect: int
    n_odd: int
    n_even: int

    @property
    def codim_form(self) -> int:
        """Same number as n_even - codim(Y)."""
        return self.n_even - (self.n_odd - self.dim_Y)


def defect(n: SuperTranslationAlgebra, d_max: int = 12,
           work_limit: int = 20_000_000) -> DefectResult:
    """def(n) = dim Y - (n_odd - n_even), with dim Y declared or computed."""
    if n.declared_dim_Y is not None:
        dim_y, source = n.declared_dim_Y, "declared"
    else:
        res = groebner_hilbert(nilpotence_ideal(n), d_max, work_limit)
        if not res.stabilized or res.krull_dim is None:
            raise WorkLimitExceeded(
                "Groebner basis did not stabilize under the work limit; "
                "declare dim_Y on the algebra or raise the limit")
        dim_y, source = res.krull_dim, "groebner"
    return DefectResult(dim_y, source, dim_y - (n.n_odd - n.n_even),
                        n.n_odd, n.n_even)


# -- twisting -----------------------------------------------------------------


@dataclass
class TwistResult:
    q: tuple
    bracket_matrix: SparseMatrix  # (beta, mu) entries sum_alpha Q^a Gamma^mu_{a b}
    rank: int
    dim_h2: int
    dim_h1: Optional[int] = None
    dim_h0: Optional[int] = None
    euler_ok: Optional[bool] = None
    descent_ok: Optional[bool] = None
    n_tilde: Optional[dict] = None  # (mu~, a~, b~) -> mpq on H1/H2 coordinates


def twist(n: SuperTranslationAlgebra, q) -> TwistResult:
    """Residual structure after twisting by a square-zero odd element."""
    q = tuple(mpq(x) for x in q)
    if len(q) != n.n_odd:
        raise ValueError(f"Q must have {n.n_odd} components")
    violated = []
    for mu, quadric in enumerate(n.quadrics()):
        total = mpq(0)
        for mono, coef in quadric.items():
            term = mpq(coef)
            for i, e in enumerate(mono):
                for _ in range(e):
                    term *= q[i]
            total += term
        if total:
            violated.append(mu)
    if violated:
        raise ValueError(
            f"Q is not square-zero: quadric(s) {violated} do not vanish")
    entries = {}
    for (mu, a, b), coef in n.gamma.items():
        if q[a]:
            entries[(b, mu)] = entries.get((b, mu), mpq(0)) + q[a] * coef
        if a != b and q[b]:
            entries[(a, mu)] = entries.get((a, mu), mpq(0)) + q[b] * coef
    entries = {k: v for k, v in entries.items() if v}
    bracket = SparseMatrix(n.n_odd, n.n_even, entries)
    rank, _, _ = rank_kernel_image(bracket)
    result = TwistResult(q, bracket, rank, n.n_even - rank)
    if n.p0_action is None:
        return result

    # complex p0 --[ ,Q]--> odd --Gamma(Q)--> even
    n_p = len(n.p0_action)
    d0_cols = []
    for odd_mat, _ in n.p0_action:
        col = {}
        for beta in range(n.n_odd):
            val = sum((mpq(odd_mat[beta][alpha]) * q[alpha]
                       for alpha in range(n.n_odd) if q[alpha]), mpq(0))
            if val:
                col[beta] = val
        d0_cols.append(col)
    d0 = SparseMatrix.from_columns(n.n_odd, d0_cols)
    d1 = bracket.transpose()  # odd -> even
    def table(dim):
        return (dim, [((), 0, dim)] if dim else [])

    chain = ChainContraction(
        [table(n_p), table(n.n_odd), table(n.n_even)],
        [{(): d0} if d0_cols else {}, {(): d1}])
    result.dim_h0 = chain.hdim(0)
    result.dim_h1 = chain.hdim(1)
    euler_lhs = n_p - n.n_odd + n.n_even
    euler_rhs = result.dim_h0 - result.dim_h1 + result.dim_h2
    result.euler_ok = euler_lhs == euler_rhs

    def gamma_bracket(u, w):
        out = {}
        for (mu, a, b), coef in n.gamma.items():
            term = coef * (u.get(a, 0) * w.get(b, 0) + u.get(b, 0) * w.get(a, 0))
            if term:
                out[mu] = out.get(mu, mpq(0)) + term
        return {k: v for k, v in out.items() if v}

    h1_reps = chain.reps(1)
    descent_ok = True
    for jj in range(n_p):
        boundary = d0.column(jj)
        for rep in h1_reps:
            w = gamma_bracket(boundary, rep)
            if chain.p_apply(2, w):
                descent_ok = False
    result.descent_ok = descent_ok
    n_tilde = {}
    for ia, ra in enumerate(h1_reps):
        for ib in range(ia, len(h1_reps)):
            w = gamma_bracket(ra, h1_reps[ib])
            for mu2, coef in sorted(chain.p_apply(2, w).items()):
                n_tilde[(mu2, ia, ib)] = coef
    result.n_tilde = n_tilde
    return result


def scan_null_twists(n: SuperTranslationAlgebra, max_candidates: int = 4096) -> dict:
    """Deterministic scan (basis vectors, then signed pairs) for square-zero
    odd elements of minimal and maximal bracket rank."""
    candidates = []
    for i in range(n.n_odd):
        vec = [0] * n.n_odd
        vec[i] = 1
        candidates.append(vec)
    for i in range(n.n_odd):
        for j in range(i + 1, n.n_odd):
            for sign in (1, -1):
                vec = [0] * n.n_odd
                vec[i] = 1
                vec[j] = sign
                candidates.append(vec)
    best = {}
    for vec in candidates[:max_candidates]:
        try:
            res = twist(n, vec)
        except ValueError:
            continue
        if "minimal" not in best or res.rank < best["minimal"].rank:
            best["minimal"] = res
        if "maximal" not in best or res.rank > best["maximal"].rank:
            best["maximal"] = res
    return best
