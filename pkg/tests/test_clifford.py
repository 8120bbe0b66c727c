"""Gamma data: Clifford relations, intertwiner, symmetric forms, null scan."""

from __future__ import annotations

from superflag.clifford import (DIM, N_VECTOR, bracket_matrix, flip_mask,
                                gamma_endomorphisms, identity, int_rank,
                                intertwiner, mat_mul, metric_diagonal,
                                null_spinor_scan, quadric_values, scale,
                                symmetric_gammas, transpose, add)


def as_lists(m):
    return [list(r) for r in m]


def test_clifford_relations():
    gammas = [as_lists(g) for g in gamma_endomorphisms()]
    g = metric_diagonal()
    ident = identity(DIM)
    for mu in range(N_VECTOR):
        for nu in range(mu, N_VECTOR):
            anti = add(mat_mul(gammas[mu], gammas[nu]),
                       mat_mul(gammas[nu], gammas[mu]))
            expected = scale(ident, 2 * g[mu]) if mu == nu \
                else [[0] * DIM for _ in range(DIM)]
            assert anti == expected


def test_metric_signature():
    g = metric_diagonal()
    assert sorted(g) == [-1] * 5 + [1] * 6
    assert [mu for mu, x in enumerate(g) if x == 1] == [0, 1, 4, 5, 8, 9]


def test_intertwiner_properties():
    k = as_lists(intertwiner())
    assert transpose(k) == scale(k, -1)
    assert mat_mul(k, k) == scale(identity(DIM), -1)
    assert flip_mask(k) == 0b10101


def test_symmetric_gammas():
    bs = symmetric_gammas()
    masks = set()
    for b in bs:
        rows = as_lists(b)
        assert rows == transpose(rows)
        for row in rows:
            assert sum(1 for x in row if x) == 1
            assert all(x in (-1, 0, 1) for x in row)
        masks.add(flip_mask(rows))
    assert len(masks) == 6
    assert 0 not in masks  # no diagonal form: basis spinors are all null


def test_basis_spinors_are_null_with_minimal_rank():
    for i in (0, 7, 31):
        q = [0] * DIM
        q[i] = 1
        assert quadric_values(q) == [0] * N_VECTOR
        assert int_rank(bracket_matrix(q)) == 6


def test_null_scan_finds_both_orbits():
    scan = null_spinor_scan()
    q_min, rank_min = scan["minimal"]
    q_max, rank_max = scan["maximal"]
    assert rank_min == 6 and rank_max == 9
    assert quadric_values(q_min) == [0] * N_VECTOR
    assert quadric_values(q_max) == [0] * N_VECTOR
    # determinism: first basis vector wins the minimal slot
    assert q_min == [1] + [0] * (DIM - 1)
    # surviving translations: 11 - rank
    assert N_VECTOR - rank_min == 5
    assert N_VECTOR - rank_max == 2


def test_scan_is_deterministic():
    assert null_spinor_scan() == null_spinor_scan()
