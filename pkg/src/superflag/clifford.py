"""Rational 32x32 gamma data for the eleven-dimensional presets.

Eleven pairwise-anticommuting endomorphisms are built as five-fold tensor
products of diag(1,-1), antidiag(1,1) and antidiag(1,-1); their squares give a
split metric of signature (6,5).  No rational intertwiner makes these
symmetric with a definite metric, but conjugating by K = g3 g4 g7 g8 g11
(which is antisymmetric with K^2 = -1) produces eleven *symmetric* bilinear
forms B^mu = K g^mu -- the structure constants used by the supertranslation
presets.  Every entry is an integer and every matrix is a signed permutation,
so each B^mu is indexed by the bit mask it flips; that mask structure drives
the deterministic scan for null spinors of minimal and maximal bracket rank.
"""

from __future__ import annotations

from functools import lru_cache

Matrix = list  # list of rows, integer entries

_A = [[1, 0], [0, -1]]
_B = [[0, 1], [1, 0]]
_C = [[0, 1], [-1, 0]]
_I2 = [[1, 0], [0, 1]]

DIM = 32
N_VECTOR = 11


def kron(a: Matrix, b: Matrix) -> Matrix:
    na, nb = len(a), len(b)
    out = [[0] * (na * nb) for _ in range(na * nb)]
    for i in range(na):
        for j in range(na):
            if not a[i][j]:
                continue
            for k in range(nb):
                for l in range(nb):
                    if b[k][l]:
                        out[i * nb + k][j * nb + l] = a[i][j] * b[k][l]
    return out


def kron_all(mats: list) -> Matrix:
    out = mats[0]
    for m in mats[1:]:
        out = kron(out, m)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        row = a[i]
        for k, x in enumerate(row):
            if x:
                brow = b[k]
                orow = out[i]
                for j, y in enumerate(brow):
                    if y:
                        orow[j] += x * y
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def scale(a: Matrix, c: int) -> Matrix:
    return [[x * c for x in row] for row in a]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


@lru_cache(maxsize=None)
def gamma_endomorphisms() -> tuple:
    """Eleven anticommuting 32x32 endomorphisms; index mu runs 0..10."""
    gammas = []
    for j in range(1, 6):
        prefix = [_C] * (j - 1)
        suffix = [_I2] * (5 - j)
        gammas.append(kron_all(prefix + [_A] + suffix))
        gammas.append(kron_all(prefix + [_B] + suffix))
    gammas.append(kron_all([_C] * 5))
    return tuple(tuple(tuple(row) for row in g) for g in gammas)


@lru_cache(maxsize=None)
def metric_diagonal() -> tuple:
    """g^{mu mu} with g^{mu nu} = 0 off-diagonal: squares of the gammas."""
    out = []
    for g in gamma_endomorphisms():
        sq = mat_mul([list(r) for r in g], [list(r) for r in g])
        out.append(sq[0][0])
    return tuple(out)


@lru_cache(maxsize=None)
def intertwiner() -> tuple:
    """K with K^T = -K, K^2 = -1, making K g^mu symmetric for every mu."""
    gs = gamma_endomorphisms()
    k = identity(DIM)
    for mu in (2, 3, 6, 7, 10):  # the gammas squaring to -1
        k = mat_mul(k, [list(r) for r in gs[mu]])
    return tuple(tuple(row) for row in k)


@lru_cache(maxsize=None)
def symmetric_gammas() -> tuple:
    """B^mu = K g^mu: eleven symmetric signed-permutation bilinear forms."""
    k = [list(r) for r in intertwiner()]
    out = []
    for g in gamma_endomorphisms():
        b = mat_mul(k, [list(r) for r in g])
        if b != transpose(b):
            raise AssertionError("intertwined gamma failed to be symmetric")
        out.append(tuple(tuple(row) for row in b))
    return tuple(out)


def flip_mask(b: Matrix) -> int:
    """For a signed permutation of xor type, the defining bit mask."""
    masks = set()
    for i, row in enumerate(b):
        cols = [j for j, x in enumerate(row) if x]
        if len(cols) != 1:
            raise ValueError("not a signed permutation matrix")
        masks.add(i ^ cols[0])
    if len(masks) != 1:
        raise ValueError("permutation is not of xor type")
    return masks.pop()


def bracket_matrix(q: list) -> Matrix:
    """Gamma(Q)_{beta mu} = sum_alpha Q^alpha B^mu_{alpha beta}, 32 x 11."""
    bs = symmetric_gammas()
    out = [[0] * N_VECTOR for _ in range(DIM)]
    for mu, b in enumerate(bs):
        for alpha, qa in enumerate(q):
            if not qa:
                continue
            row = b[alpha]
            for beta, x in enumerate(row):
                if x:
                    out[beta][mu] += qa * x
    return out


def quadric_values(q: list) -> list:
    """The eleven numbers Q B^mu Q; zero for a null spinor."""
    bs = symmetric_gammas()
    vals = []
    for b in bs:
        total = 0
        for alpha, qa in enumerate(q):
            if not qa:
                continue
            for beta, x in enumerate(b[alpha]):
                if x and q[beta]:
                    total += qa * x * q[beta]
        vals.append(total)
    return vals


def int_rank(m: Matrix) -> int:
    """Rank over Q."""
    from .linalg import SparseMatrix, rank_kernel_image
    rank, _, _ = rank_kernel_image(SparseMatrix.from_dense(m))
    return rank


def null_spinor_scan() -> dict:
    """Deterministic search for null spinors of extreme bracket rank.

    Basis spinors come first, then signed pairs e_I +/- e_J in index order.
    Returns the first null spinor of minimal bracket rank seen and the first
    achieving the maximal rank over the scan.
    """
    candidates = []
    for i in range(DIM):
        q = [0] * DIM
        q[i] = 1
        candidates.append(q)
    for i in range(DIM):
        for j in range(i + 1, DIM):
            for sign in (1, -1):
                q = [0] * DIM
                q[i] = 1
                q[j] = sign
                candidates.append(q)
    best_min = None
    best_max = None
    for q in candidates:
        if any(quadric_values(q)):
            continue
        r = int_rank(bracket_matrix(q))
        if best_min is None or r < best_min[1]:
            best_min = (q, r)
        if best_max is None or r > best_max[1]:
            best_max = (q, r)
    return {"minimal": best_min, "maximal": best_max}
