from __future__ import annotations

import random

from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from superflag.linalg import (
    SparseMatrix,
    Subspace,
    echelon_complement,
    hnf_reduce,
    hnf_rows,
    rank_kernel_image,
    rat,
    rref,
    solve,
    vec_axpy,
)


def _dense(entries, rows, cols):
    return SparseMatrix(rows, cols, {k: mpq(v) for k, v in entries.items()})


def test_rational_coercion_reduced():
    assert rat("3/6") == mpq(1, 2)
    assert rat("3/6").denominator == 2
    assert rat("-4/2") == -2
    assert rat(0).denominator == 1


def test_identity_rank_kernel_image():
    m = SparseMatrix.identity(2)
    rank, ker, im = rank_kernel_image(m)
    assert rank == 2
    assert ker.dim == 0
    assert im.dim == 2


def test_zero_matrix_rank_kernel_image():
    m = SparseMatrix.zero(3, 4)
    rank, ker, im = rank_kernel_image(m)
    assert (rank, ker.dim, im.dim) == (0, 4, 0)


def test_rank_one_kernel():
    m = SparseMatrix.from_dense([[1, 2], [2, 4]])
    rank, ker, im = rank_kernel_image(m)
    assert rank == 1
    assert ker.dim == 1
    # kernel spanned by (-2, 1); canonical echelon form scales the pivot to 1
    assert ker.contains({0: mpq(-2), 1: mpq(1)})


def test_solve_identity():
    m = SparseMatrix.identity(2)
    assert solve(m, {0: mpq(3), 1: mpq(5)}) == {0: mpq(3), 1: mpq(5)}


def test_solve_free_variable_canonical():
    m = SparseMatrix.from_dense([[1, 1]])
    assert solve(m, {0: mpq(2)}) == {0: mpq(2)}


def test_solve_inconsistent():
    m = SparseMatrix.from_dense([[1], [1]])
    assert solve(m, {0: mpq(1), 1: mpq(2)}) is None


def test_echelon_complement_full_and_zero():
    full = Subspace.from_vectors(2, [{0: mpq(1)}, {1: mpq(1)}])
    assert echelon_complement(full).dim == 0
    zero = Subspace.from_vectors(3, [])
    assert echelon_complement(zero).dim == 3


def test_echelon_complement_pivot_rule():
    sub = Subspace.from_vectors(2, [{0: mpq(1), 1: mpq(1)}])
    comp = echelon_complement(sub)
    assert comp.dim == 1
    assert comp.basis == [{1: mpq(1)}]


def _random_matrix(rng: random.Random, rows: int, cols: int, density: float) -> SparseMatrix:
    ent = {}
    for r in range(rows):
        for c in range(cols):
            if rng.random() < density:
                ent[(r, c)] = mpq(rng.randint(-4, 4), rng.randint(1, 3))
    return SparseMatrix(rows, cols, ent)


@given(st.integers(0, 2 ** 30))
@settings(max_examples=60, deadline=None)
def test_rank_nullity_and_memberships(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 7), rng.randint(1, 7)
    m = _random_matrix(rng, rows, cols, rng.choice([0.2, 0.5, 0.9]))
    rank, ker, im = rank_kernel_image(m)
    assert rank + ker.dim == cols
    assert im.dim == rank
    for k in ker.basis:
        assert m.matvec(k) == {}
    for col in m.col_vectors():
        assert im.contains(col)


@given(st.integers(0, 2 ** 30))
@settings(max_examples=60, deadline=None)
def test_solve_reproduces_rhs(seed):
    rng = random.Random(seed)
    rows, cols = rng.randint(1, 6), rng.randint(1, 6)
    m = _random_matrix(rng, rows, cols, 0.6)
    x0 = {c: mpq(rng.randint(-3, 3)) for c in range(cols) if rng.random() < 0.7}
    b = m.matvec(x0)
    x = solve(m, b)
    assert x is not None
    assert m.matvec(x) == b


@given(st.integers(0, 2 ** 30))
@settings(max_examples=40, deadline=None)
def test_complement_direct_sum(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    vecs = [{c: mpq(rng.randint(-3, 3)) for c in range(n) if rng.random() < 0.6}
            for _ in range(rng.randint(0, n))]
    sub = Subspace.from_vectors(n, vecs)
    comp = echelon_complement(sub)
    assert sub.dim + comp.dim == n
    joined = Subspace.from_vectors(n, sub.basis + comp.basis)
    assert joined.dim == n


@given(st.integers(0, 2 ** 30))
@settings(max_examples=40, deadline=None)
def test_rref_insertion_order_independent(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    vecs = [{c: mpq(rng.randint(-3, 3)) for c in range(n) if rng.random() < 0.7}
            for _ in range(rng.randint(1, 6))]
    b1, p1 = rref(vecs)
    shuffled = vecs[:]
    rng.shuffle(shuffled)
    b2, p2 = rref(shuffled)
    assert b1 == b2 and p1 == p2


def test_subspace_coords_roundtrip():
    sub = Subspace.from_vectors(3, [{0: mpq(1), 2: mpq(2)}, {1: mpq(1), 2: mpq(-1)}])
    v = {}
    vec_axpy(v, mpq(3), sub.basis[0])
    vec_axpy(v, mpq(-2), sub.basis[1])
    coords = sub.coords(v)
    assert coords == {0: mpq(3), 1: mpq(-2)}
    assert sub.coords({0: mpq(1), 1: mpq(1), 2: mpq(100)}) is None


def test_matmul_and_transpose():
    a = SparseMatrix.from_dense([[1, 2], [0, 1]])
    b = SparseMatrix.from_dense([[1, 0], [3, 1]])
    ab = a.matmul(b)
    assert ab == SparseMatrix.from_dense([[7, 2], [3, 1]])
    assert a.transpose() == SparseMatrix.from_dense([[1, 0], [2, 1]])


def test_hnf_canonical_cosets():
    # lattice spanned by (2, 0) and (0, 3) in Z^2
    h = hnf_rows([[2, 0], [0, 3]])
    reps = {hnf_reduce((a, b), h) for a in range(-4, 5) for b in range(-6, 7)}
    assert reps == {(a, b) for a in range(2) for b in range(3)}


def test_hnf_reduce_quotient_consistency():
    # lattice from relation rows e0 + e1 - e2 - e3 (pairs with equal sums collapse)
    h = hnf_rows([[1, 1, -1, -1]])
    assert hnf_reduce((1, 1, 0, 0), h) == hnf_reduce((0, 0, 1, 1), h)
    assert hnf_reduce((1, 0, 0, 0), h) != hnf_reduce((0, 0, 0, 1), h)
