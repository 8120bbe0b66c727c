"""Groebner/Hilbert layer with independent rank-based cross-checks."""

from __future__ import annotations

from itertools import permutations
from math import comb

from gmpy2 import mpq
from hypothesis import given, settings, strategies as st
import pytest

from superflag.groebner import (expo_divides, grevlex_key, groebner_hilbert,
                                hilbert_by_rank, lead, staircase_dimension,
                                staircase_hilbert)


def expo(n, **at):
    out = [0] * n
    for k, v in at.items():
        out[int(k[1:])] = v
    return tuple(out)


def test_grevlex_examples():
    # three variables x0 > x1 > x2
    x0 = expo(3, e0=1)
    x1 = expo(3, e1=1)
    x2 = expo(3, e2=1)
    assert grevlex_key(x0) > grevlex_key(x1) > grevlex_key(x2)
    # degree dominates
    assert grevlex_key(expo(3, e2=2)) > grevlex_key(x0)
    # classic grevlex tiebreak: x0*x2 < x1^2
    assert grevlex_key(expo(3, e0=1, e2=1)) < grevlex_key(expo(3, e1=2))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=4, max_size=4),
       st.lists(st.integers(0, 3), min_size=4, max_size=4),
       st.lists(st.integers(0, 2), min_size=4, max_size=4))
def test_grevlex_is_multiplicative(a, b, c):
    a, b, c = tuple(a), tuple(b), tuple(c)
    if grevlex_key(a) < grevlex_key(b):
        ac = tuple(x + y for x, y in zip(a, c))
        bc = tuple(x + y for x, y in zip(b, c))
        assert grevlex_key(ac) < grevlex_key(bc)


def test_principal_ideal():
    # R = Q[u], I = (u^2)
    res = groebner_hilbert([{(2,): 1}], 1, 6)
    assert res.hilbert == [1, 1, 0, 0, 0, 0, 0]
    assert res.stabilized and not res.work_limited
    assert res.krull_dim == 0


def test_free_ring():
    res = groebner_hilbert([], 3, 5)
    assert res.hilbert == [comb(2 + d, 2) for d in range(6)]
    assert res.krull_dim == 3
    assert res.basis == []


def test_unit_ideal():
    res = groebner_hilbert([{(1, 0): 1}, {(0, 1): 1}], 2, 4)
    assert res.hilbert == [1, 0, 0, 0, 0]
    assert res.krull_dim == 0
    assert staircase_dimension([(0, 0)], 2) == -1


def test_textbook_groebner():
    # I = (x^2 - y*z... ) keep homogeneous: x*y, y^2 in Q[x,y]
    res = groebner_hilbert([{(1, 1): 1}, {(0, 2): 1}], 2, 5)
    # quotient basis: 1, x, y, x^2, x^3, ... -> h = (1, 2, 1, 1, 1, ...)
    assert res.hilbert == [1, 2, 1, 1, 1, 1]
    assert res.krull_dim == 1


def test_syzygy_pair_produces_new_element():
    # classic: f = x^2, g = x*y + y^2; S-pair gives y^3 (up to reduction)
    f = {(2, 0): 1}
    g = {(1, 1): 1, (0, 2): 1}
    res = groebner_hilbert([f, g], 2, 6)
    assert res.stabilized
    leads = set(res.lead_terms)
    assert (2, 0) in leads and (1, 1) in leads
    assert any(lt[0] == 0 for lt in leads)  # a pure power of y appeared
    assert res.krull_dim == 0  # x^2, xy, y^k: no free variable remains
    assert res.hilbert[5] == 0


def min_twist_quadrics():
    """Five quadrics q_e = sum eps(a,b,c,d,e) la_{ab} la_{cd} on 10 pair vars."""
    pair_index = {}
    pairs = []
    for a in range(5):
        for b in range(a + 1, 5):
            pair_index[(a, b)] = len(pairs)
            pairs.append((a, b))

    def eps(perm):
        sign = 1
        perm = list(perm)
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    sign = -sign
        return sign

    quadrics = []
    for e in range(5):
        others = [k for k in range(5) if k != e]
        q = {}
        for perm in permutations(others):
            a, b, c, d = perm
            if a > b or c > d or (a, b) >= (c, d):
                continue
            mono = [0] * 10
            mono[pair_index[(a, b)]] += 1
            mono[pair_index[(c, d)]] += 1
            key = tuple(mono)
            q[key] = q.get(key, 0) + 2 * eps((a, b, c, d, e))
        quadrics.append({m: c for m, c in q.items() if c})
    return quadrics


def test_min_twist_hilbert_and_dimension():
    quadrics = min_twist_quadrics()
    assert len(quadrics) == 5
    res = groebner_hilbert(quadrics, 10, 6)
    assert res.hilbert[0:3] == [1, 10, 50]
    assert res.stabilized
    assert res.krull_dim == 7
    # cross-check two degrees against the rank-based count
    assert hilbert_by_rank(quadrics, 10, 2) == 50
    assert hilbert_by_rank(quadrics, 10, 3) == res.hilbert[3]


def test_work_limit_flags_partial_result():
    quadrics = min_twist_quadrics()
    res = groebner_hilbert(quadrics, 10, 6, work_limit=5)
    assert res.work_limited
    assert not res.stabilized
    assert res.krull_dim is None
    assert res.hilbert_exact_through < 6


@settings(max_examples=25, deadline=None)
@given(st.lists(
    st.lists(st.tuples(st.lists(st.integers(0, 2), min_size=3, max_size=3),
                       st.integers(-2, 2)),
             min_size=1, max_size=3),
    min_size=1, max_size=3))
def test_staircase_matches_rank_count(raw):
    gens = []
    for terms in raw:
        deg = sum(terms[0][0])
        poly = {}
        for mono, coef in terms:
            if sum(mono) == deg and coef:
                key = tuple(mono)
                poly[key] = poly.get(key, 0) + coef
        poly = {m: c for m, c in poly.items() if c}
        if poly and sum(lead(poly)) > 0:
            gens.append(poly)
    res = groebner_hilbert(gens, 3, 4)
    for d in range(5):
        assert res.hilbert[d] == hilbert_by_rank(gens, 3, d)


def test_staircase_hilbert_direct():
    # lead terms x0^2 and x0*x1 in 3 vars
    leads = [(2, 0, 0), (1, 1, 0)]
    h = staircase_hilbert(leads, 3, 3)
    # standard monomials: 1; x0,x1,x2; x0x2,x1^2,x1x2,x2^2; ...
    assert h == [1, 3, 4, 5]
    assert staircase_dimension(leads, 3) == 2
