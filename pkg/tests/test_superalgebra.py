"""Supertranslation presets, CE cohomology, defect, and twisting."""

import pytest
from gmpy2 import mpq

from superflag import clifford
from superflag.algebra import apply_derivation, operator_matrix
from superflag.groebner import hilbert_by_rank
from superflag.superalgebra import (
    PRESET_NAMES,
    SuperTranslationAlgebra,
    WorkLimitExceeded,
    ce_cohomology,
    ce_complex,
    defect,
    groebner_hilbert,
    nilpotence_ideal,
    preset,
    scan_null_twists,
    twist,
)

MIN_HILBERT = [1, 10, 50, 175, 490, 1176, 2520]


# -- presets and validation ----------------------------------------------------


def test_preset_shapes():
    shapes = {name: (preset(name).n_odd, preset(name).n_even)
              for name in PRESET_NAMES}
    assert shapes == {
        "D11": (32, 11),
        "MIN_TWIST": (10, 5),
        "MAX_TWIST": (0, 2),
        "TOY_POINT": (1, 1),
        "TOY_1D": (1, 1),
    }
    assert preset("D11").declared_dim_Y == 23
    assert preset("MIN_TWIST").declared_dim_Y is None
    with pytest.raises(ValueError):
        preset("D10")


def test_gamma_validation():
    with pytest.raises(ValueError, match="alpha <= beta"):
        SuperTranslationAlgebra("bad", 2, 1, {(0, 1, 0): 1})
    with pytest.raises(ValueError, match="out of range"):
        SuperTranslationAlgebra("bad", 2, 1, {(1, 0, 0): 1})
    with pytest.raises(ValueError, match="out of range"):
        SuperTranslationAlgebra("bad", 2, 1, {(0, 0, 2): 1})
    # zero coefficients are dropped, values coerced to rationals
    alg = SuperTranslationAlgebra("ok", 2, 1, {(0, 0, 1): "3/2", (0, 0, 0): 0})
    assert alg.gamma == {(0, 0, 1): mpq(3, 2)}
    assert alg.gamma_entry(0, 1, 0) == mpq(3, 2)  # symmetric access
    assert alg.gamma_entry(0, 1, 1) == 0


def test_min_twist_gamma_matches_independent_construction():
    """Rebuild the pair-partition quadrics from scratch and compare."""

    def eps(perm):
        sign = 1
        perm = list(perm)
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    sign = -sign
        return sign

    pairs = [(a, b) for a in range(5) for b in range(a + 1, 5)]
    index = {p: i for i, p in enumerate(pairs)}
    expected = [dict() for _ in range(5)]
    for e in range(5):
        rest = [k for k in range(5) if k != e]
        seen = set()
        for a in rest:
            for b in rest:
                if a == b:
                    continue
                c, d = [k for k in rest if k not in (a, b)]
                i, j = sorted((index[tuple(sorted((a, b)))],
                               index[tuple(sorted((c, d)))]))
                if (i, j) in seen:
                    continue
                seen.add((i, j))
                mono = tuple(1 if k in (i, j) else 0 for k in range(10))
                coef = 2 * eps((min(a, b), max(a, b), c, d, e))
                expected[e][mono] = expected[e].get(mono, 0) + coef
    expected = [{m: mpq(c) for m, c in q.items() if c} for q in expected]
    assert preset("MIN_TWIST").quadrics() == expected


def test_quadrics_zero_rows_and_multigrading():
    toy = preset("TOY_1D")  # gamma = 0: quadric empty, fresh even degree
    assert toy.quadrics() == [{}]
    odd, even, rel = toy.multigrading()
    assert odd == [(1, 0)]
    assert even == [(0, 1)]
    assert rel == []
    mn = preset("MIN_TWIST")
    odd, even, rel = mn.multigrading()
    assert len(odd) == 10 and len(even) == 5
    # each quadric has 3 terms -> 2 relations each
    assert len(rel) == 10


# -- CE complex and cohomology --------------------------------------------------


def test_ce_differential_images():
    cx = ce_complex(preset("D11"))
    d = cx.differential
    assert len(d.images) == 11  # one quadric per translation
    assert not ce_complex(preset("TOY_1D")).differential.images
    toy = ce_complex(preset("TOY_POINT"))
    img = toy.differential.images[1]  # d(v) = lambda^2
    assert list(img.terms.items()) == [(((0, 2),), mpq(1))]


def test_ce_differential_squares_to_zero():
    for name, (s, t) in (("MIN_TWIST", (3, -1)), ("D11", (4, -2))):
        cx = ce_complex(preset(name))
        d = cx.differential
        m1 = operator_matrix(d, (s, t, s + t))
        m2 = operator_matrix(d, (s, t + 1, s + t + 1))
        assert m2.matmul(m1).is_zero()


def test_toy_tables():
    assert ce_cohomology(preset("TOY_POINT"), 6).dims_table() == {
        (0, 0): 1, (1, 0): 1}
    table = ce_cohomology(preset("TOY_1D"), 6).dims_table()
    expected = {(s, 0): 1 for s in range(7)}
    expected.update({(s, -1): 1 for s in range(2, 7)})
    assert table == expected


def test_max_twist_table():
    model = ce_cohomology(preset("MAX_TWIST"), 6)
    assert model.dims_table() == {(0, 0): 1, (2, -1): 2, (4, -2): 1}
    assert model.concentration() == {0, -1, -2}
    # the dualizing class: the product of the two translations
    (omega,) = model.reps(4, -2)
    assert list(omega.terms) == [((0, 1), (1, 1))]


def test_min_twist_table_and_hilbert():
    model = ce_cohomology(preset("MIN_TWIST"), 6)
    table = model.dims_table()
    assert [table.get((s, 0), 0) for s in range(7)] == MIN_HILBERT
    assert [table.get((s, -1), 0) for s in range(7)] == [0, 0, 0, 5, 40, 175, 560]
    assert [table.get((s, -2), 0) for s in range(7)] == [0, 0, 0, 0, 0, 1, 10]
    assert model.concentration() == {0, -1, -2}
    res = groebner_hilbert(nilpotence_ideal(preset("MIN_TWIST")), 6)
    assert res.stabilized and res.hilbert == MIN_HILBERT
    assert res.krull_dim == 7


def test_min_twist_lowest_dual_class_is_closed():
    model = ce_cohomology(preset("MIN_TWIST"), 5)
    (omega,) = model.reps(5, -2)
    assert omega.homogeneous_degree() == (5, -2, 3)
    assert not apply_derivation(model.complex.differential, omega)
    # every monomial is lambda * v * v
    for mono in omega.terms:
        assert sorted(model.complex.algebra.s_of[g] for g, _ in mono
                      for _ in range(_)) in ([1, 2, 2],)


def test_contraction_verifies_and_rule_invariance():
    for rule in ("standard", "reversed"):
        model = ce_cohomology(preset("MIN_TWIST"), 4, rule=rule)
        model.chain(3).verify_all()
        model.chain(4).verify_all()
        assert model.dim(4, -1) == 40
        assert model.dim(4, -2) == 0


def test_d11_small_dims_and_rank_crosscheck():
    model = ce_cohomology(preset("D11"), 4)
    assert model.dims_table() == {
        (0, 0): 1, (1, 0): 32, (2, 0): 517, (3, 0): 5632,
        (4, -1): 11, (4, 0): 46618}
    quads = [dict(q) for q in preset("D11").quadrics()]
    assert model.dim(2, 0) == hilbert_by_rank(quads, 32, 2)
    assert model.dim(3, 0) == hilbert_by_rank(quads, 32, 3)
    assert model.dim(4, 0) == hilbert_by_rank(quads, 32, 4)
    # truncated staircase agrees through the cut
    res = groebner_hilbert(nilpotence_ideal(preset("D11")), 2)
    assert not res.stabilized
    assert res.hilbert_exact_through >= 2
    assert res.hilbert[2] == 517


def test_d11_tail_chain_skips_top_blocks():
    model = ce_cohomology(preset("D11"), 6)
    assert model.dim(4, -2, t_stop=-1) == 0
    # only blocks t <= -1 were enumerated: worst is (4,-1) of size 5808
    assert model.work < 50_000
    _, _, sectors = model.complex.block(6, -2)
    assert len(sectors) == 32
    assert max(stop - start for _, start, stop in sectors) == 960


def test_work_limit():
    model = ce_cohomology(preset("MIN_TWIST"), 6, work_limit=10)
    with pytest.raises(WorkLimitExceeded):
        model.dim(2, 0)
    assert model.work > 10


# -- defect ---------------------------------------------------------------------


def test_defect_table():
    rows = {}
    for name in PRESET_NAMES:
        res = defect(preset(name))
        assert res.codim_form == res.defect
        rows[name] = (res.defect, res.dim_Y, res.source)
    assert rows == {
        "D11": (2, 23, "declared"),
        "MIN_TWIST": (2, 7, "groebner"),
        "MAX_TWIST": (2, 0, "groebner"),
        "TOY_POINT": (0, 0, "groebner"),
        "TOY_1D": (1, 1, "groebner"),
    }


def test_defect_concentration_invariant():
    """Largest nonzero codegree of CE cohomology equals the defect."""
    for name in ("MIN_TWIST", "MAX_TWIST", "TOY_POINT", "TOY_1D"):
        model = ce_cohomology(preset(name), 6)
        conc = model.concentration()
        d = defect(preset(name)).defect
        assert max(-t for t in conc) == d


def test_defect_work_limit_error():
    with pytest.raises(WorkLimitExceeded, match="declare dim_Y"):
        defect(preset("MIN_TWIST"), work_limit=5)


# -- twisting -------------------------------------------------------------------


def test_twist_rejects_non_null():
    with pytest.raises(ValueError, match=r"quadric\(s\) \[0\]"):
        twist(preset("TOY_POINT"), (1,))
    with pytest.raises(ValueError, match="components"):
        twist(preset("MIN_TWIST"), (1, 0))


def test_twist_toy_and_min():
    assert twist(preset("TOY_1D"), (1,)).dim_h2 == 1
    res = twist(preset("MIN_TWIST"), (1,) + (0,) * 9)
    assert res.rank == 3 and res.dim_h2 == 2


def test_d11_twist_scan_matches_spinor_scan():
    scan = scan_null_twists(preset("D11"))
    assert (scan["minimal"].rank, scan["minimal"].dim_h2) == (6, 5)
    assert (scan["maximal"].rank, scan["maximal"].dim_h2) == (9, 2)
    spinors = clifford.null_spinor_scan()
    assert scan["minimal"].q == tuple(mpq(x) for x in spinors["minimal"][0])
    assert scan["maximal"].q == tuple(mpq(x) for x in spinors["maximal"][0])


def test_twist_with_symmetry_action():
    zero_odd = ((0,) * 3,) * 3
    zero_even = ((0,),)
    base = dict(n_odd=3, n_even=1, gamma={(0, 0, 1): mpq(1)})
    # trivial action: H = (ker 0, ker/0, coker) with induced bracket on H1
    alg = SuperTranslationAlgebra("FIX", p0_action=((zero_odd, zero_even),),
                                  **base)
    res = twist(alg, (0, 0, 1))
    assert (res.dim_h0, res.dim_h1, res.dim_h2) == (1, 3, 1)
    assert res.euler_ok and res.descent_ok
    assert res.n_tilde == {(0, 0, 1): mpq(1)}
    # diag(1,-1,0) action: d0 hits theta_0, leaving a single class
    rho = ((1, 0, 0), (0, -1, 0), (0, 0, 0))
    alg2 = SuperTranslationAlgebra("FIX2", p0_action=((rho, zero_even),),
                                   **base)
    res2 = twist(alg2, (1, 0, 0))
    assert (res2.dim_h0, res2.dim_h1, res2.dim_h2) == (0, 1, 0)
    assert res2.euler_ok and res2.descent_ok and res2.n_tilde == {}
