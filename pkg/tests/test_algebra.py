"""Graded algebra layer: signs, gradings, blocks, derivations."""

from __future__ import annotations

import itertools

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from superflag.algebra import (GeneratorSpec, GradedAlgebra, GradedPolynomial,
                               apply_derivation, block_basis, commutator,
                               Derivation, multiply, operator_matrix)


def flag_gens(n_x, n_theta, n_lambda, n_v):
    gens = [GeneratorSpec(f"x{i}", 0, 0, 2, 0) for i in range(n_x)]
    gens += [GeneratorSpec(f"th{i}", 0, 0, 1, 1) for i in range(n_theta)]
    gens += [GeneratorSpec(f"la{i}", 1, -1, 1, 1) for i in range(n_lambda)]
    gens += [GeneratorSpec(f"v{i}", 1, -2, 2, 0) for i in range(n_v)]
    return gens


def ce_algebra(n_odd, n_even):
    return GradedAlgebra(flag_gens(0, 0, n_odd, n_even))


def test_generator_gradings():
    x, th, la, v = flag_gens(1, 1, 1, 1)
    assert (x.koszul, x.t) == (0, 0)
    assert (th.koszul, th.t) == (1, 0)
    assert (la.koszul, la.t) == (0, 0)  # odd intrinsic parity, odd c: Koszul even
    assert (v.koszul, v.t) == (1, -1)  # even intrinsic parity, odd c: Koszul odd


def test_generator_validation():
    with pytest.raises(ValueError):
        GeneratorSpec("bad", 0, 0, 0, 0)
    with pytest.raises(ValueError):
        GeneratorSpec("bad", 0, 1, 1, 0)
    with pytest.raises(ValueError):
        GeneratorSpec("bad", 0, 0, 1, 2)
    with pytest.raises(ValueError):
        GradedAlgebra([GeneratorSpec("a", 0, 0, 1, 1),
                       GeneratorSpec("a", 0, 0, 1, 1)])


def test_koszul_signs():
    alg = GradedAlgebra(flag_gens(1, 2, 2, 2))
    x = alg.generator("x0")
    t1, t2 = alg.generator("th0"), alg.generator("th1")
    l1, l2 = alg.generator("la0"), alg.generator("la1")
    v1, v2 = alg.generator("v0"), alg.generator("v1")
    assert not (t1 * t1)  # odd generator squares to zero
    assert t1 * t2 == -(t2 * t1)
    assert l1 * l2 == l2 * l1  # lambdas are Koszul even
    assert l1 * l1  # and may square
    assert v1 * v2 == -(v2 * v1)  # vs are Koszul odd
    assert not (v1 * v1)
    for g in (t1, l1, v1):
        assert x * g == g * x


def test_normal_ordering_sign():
    alg = GradedAlgebra(flag_gens(0, 3, 0, 0))
    t0, t1, t2 = (alg.generator(f"th{i}") for i in range(3))
    prod = (t1 * t2) * t0  # two transpositions to reach normal order
    assert prod == t0 * (t1 * t2)
    ((mono, coef),) = prod.terms.items()
    assert coef == 1
    assert mono == ((0, 1), (1, 1), (2, 1))


def test_polynomial_arithmetic():
    alg = ce_algebra(2, 1)
    a, b = alg.generator("la0"), alg.generator("la1")
    p = 2 * a + b.scale(mpq(1, 3))
    q = p - p
    assert not q
    assert (p + q) == p
    assert (-p) + p == alg.zero()
    assert (a * b).homogeneous_degree() == (2, 0, 2)
    assert alg.one() * p == p


@st.composite
def small_polys(draw):
    alg = small_polys.alg
    n = len(alg.gens)
    terms = draw(st.lists(
        st.tuples(st.lists(st.integers(0, n - 1), max_size=3),
                  st.integers(-3, 3)),
        max_size=3))
    poly = alg.zero()
    for gens, coef in terms:
        term = alg.one().scale(coef)
        for g in gens:
            term = term * GradedPolynomial(alg, {((g, 1),): mpq(1)})
        poly = poly + term
    return poly


small_polys.alg = GradedAlgebra(flag_gens(1, 2, 2, 1))


@settings(max_examples=60, deadline=None)
@given(small_polys(), small_polys(), small_polys())
def test_associativity_and_distributivity(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


def test_grading_additivity():
    alg = GradedAlgebra(flag_gens(1, 1, 1, 1))
    th, la, v = alg.generator("th0"), alg.generator("la0"), alg.generator("v0")
    p = th * la
    q = v * la
    assert p.homogeneous_degree() == (2, 0, 1)
    assert q.homogeneous_degree() == (3, -1, 2)
    assert (p * q).homogeneous_degree() == (5, -1, 3)
    assert (p * q).koszul_parity() == (p.koszul_parity() + q.koszul_parity()) % 2
    assert (th + v).homogeneous_degree() is None


def brute_force_block(alg, s, t, c):
    ranges = []
    for g in alg.gens:
        top = s // g.s
        if g.koszul:
            top = min(top, 1)
        ranges.append(range(top + 1))
    out = []
    for exps in itertools.product(*ranges):
        mono = tuple((i, e) for i, e in enumerate(exps) if e)
        if alg.mono_degrees(mono) == (s, t, c):
            out.append(mono)
    return sorted(out)


def test_block_enumeration_matches_brute_force():
    alg = GradedAlgebra(flag_gens(1, 2, 2, 1))
    for s in range(0, 5):
        for t in range(-4, 3):
            for c in range(-1, 5):
                assert sorted(alg.block_basis(s, t, c)) == \
                    brute_force_block(alg, s, t, c)


def test_block_counts_match_presets():
    big = ce_algebra(32, 11)
    # lambda^2 v^2 block: 528 symmetric lambda pairs times 55 antisymmetric v pairs
    assert len(big.block_basis(6, -2, 4)) == 528 * 55
    small = ce_algebra(10, 5)
    assert len(small.block_basis(1, 0, 1)) == 10
    assert big.block_basis(0, 0, 0) == [()]
    assert big.block_basis(1, 1, 1) == []


def test_sector_major_ordering():
    gens = [GeneratorSpec("a", 1, -1, 1, 1), GeneratorSpec("b", 1, -1, 1, 1)]
    alg = GradedAlgebra(gens, sector_vectors=[(1, 0), (0, 1)])
    basis, index, sectors = alg.block_data(1, 0, 1)
    assert basis == [((1, 1),), ((0, 1),)]  # label (0,1) sorts before (1,0)
    assert sectors == [((0, 1), 0, 1), ((1, 0), 1, 2)]
    assert index[((0, 1),)] == 1
    # one shared sector after modding out the difference
    alg2 = GradedAlgebra(gens, sector_vectors=[(1, 0), (0, 1)],
                         sector_relations=[[1, -1]])
    _, _, sectors2 = alg2.block_data(1, 0, 1)
    assert len(sectors2) == 1


def test_derivation_basics():
    alg = GradedAlgebra(flag_gens(1, 2, 2, 0))
    d0 = Derivation(alg, 1, (1, -1, 0),
                    {f"th{i}": alg.generator(f"la{i}") for i in range(2)},
                    name="d")
    assert not d0(alg.one())  # derivations kill constants
    th0, th1 = alg.generator("th0"), alg.generator("th1")
    la0, la1 = alg.generator("la0"), alg.generator("la1")
    assert d0(th0) == la0
    assert d0(th0 * th1) == la0 * th1 - th0 * la1
    x = alg.generator("x0")
    dx = Derivation(alg, 1, (1, -1, 0), {"x0": alg.generator("la0") * th0})
    assert dx(x * x) == (x * dx(x)).scale(2)  # power rule on an even generator


def test_derivation_validates_images():
    alg = GradedAlgebra(flag_gens(1, 1, 1, 1))
    with pytest.raises(ValueError, match="grading"):
        Derivation(alg, 1, (1, -1, 0), {"th0": alg.generator("v0")})
    with pytest.raises(ValueError, match="parity"):
        Derivation(alg, 0, (1, -1, 0), {"th0": alg.generator("la0")})


def test_derivation_shifts_blocks():
    alg = GradedAlgebra(flag_gens(2, 2, 2, 0))
    d0 = Derivation(alg, 1, (1, -1, 0),
                    {f"th{i}": alg.generator(f"la{i}") for i in range(2)})
    p = alg.generator("th0") * alg.generator("th1") * alg.generator("x0")
    s, t, c = p.homogeneous_degree()
    # shifts (dc, dw, ds) = (1, -1, 0) move a block by (ds, dc+dw, dc)
    assert d0(p).homogeneous_degree() == (s, t, c + 1)


def test_operator_matrix_and_commutator():
    alg = GradedAlgebra(flag_gens(1, 2, 2, 1))
    D = Derivation(alg, 1, (1, -1, 0),
                   {f"th{i}": alg.generator(f"la{i}") for i in range(2)},
                   name="D")
    E = Derivation(alg, 0, (0, -1, 2),
                   {f"la{i}": alg.generator("v0") * alg.generator(f"th{i}")
                    for i in range(2)},
                   name="E")
    DE = commutator(D, E)
    assert DE.parity == 1
    assert DE.shifts == (1, -2, 2)
    checked = 0
    for s in range(0, 4):
        for t in range(-3, 2):
            for c in range(0, 4):
                src = (s, t, c)
                if not alg.block_basis(*src):
                    continue
                mid_d = (s, t + D.dt, c + 1)
                m_ed = operator_matrix(E, mid_d).matmul(operator_matrix(D, src))
                mid_e = (s + 2, t + E.dt, c)
                m_de = operator_matrix(D, mid_e).matmul(operator_matrix(E, src))
                # [D, E] = D E - (-1)^{|D||E|} E D; here |D||E| = 0
                assert operator_matrix(DE, src) == m_de.add(m_ed, mpq(-1))
                checked += 1
    assert checked > 5


def test_free_function_aliases():
    alg = ce_algebra(2, 1)
    a, b = alg.generator("la0"), alg.generator("la1")
    assert multiply(a, b) == a * b
    D = Derivation(alg, 1, (1, 0, 0), {"v0": a * b})
    assert apply_derivation(D, alg.generator("v0")) == a * b
    assert block_basis(alg, 2, 0, 2) == alg.block_basis(2, 0, 2)


def test_operator_matrix_shapes():
    alg = ce_algebra(2, 1)
    d1 = Derivation(alg, 1, (1, 0, 0),
                    {"v0": alg.generator("la0") * alg.generator("la1")})
    m = operator_matrix(d1, (2, -1, 1))  # block spanned by v0
    assert (m.rows, m.cols) == (len(alg.block_basis(2, 0, 2)), 1)
    basis, index, _ = alg.block_data(2, 0, 2)
    col = m.column(0)
    mono = ((0, 1), (1, 1))
    assert col == {index[mono]: mpq(1)}
