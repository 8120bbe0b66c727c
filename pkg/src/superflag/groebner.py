"""Buchberger over Q in graded-reverse-lexicographic order, degree-truncated.

For homogeneous input, processing S-pairs in ascending lcm degree makes the
truncated basis exact through the truncation degree: the staircase below any
degree d is unaffected by pairs of lcm degree > d.  The Hilbert function is
counted off the staircase; when the algorithm terminates with no deferred
pairs, the Krull dimension of the quotient is the size of a maximal set of
variables containing no leading-term support (which equals the degree of the
Hilbert polynomial plus one).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from gmpy2 import mpq

from .linalg import rref

Expo = tuple  # dense exponent tuple, one entry per variable
Poly = dict  # Expo -> mpq


def grevlex_key(m: Expo):
    return (sum(m), tuple(-e for e in reversed(m)))


def lead(p: Poly) -> Expo:
    return max(p, key=grevlex_key)


def poly_degree(p: Poly) -> int:
    return sum(lead(p)) if p else -1


def expo_mul(a: Expo, b: Expo) -> Expo:
    return tuple(x + y for x, y in zip(a, b))


def expo_divides(a: Expo, b: Expo) -> bool:
    return all(x <= y for x, y in zip(a, b))


def expo_lcm(a: Expo, b: Expo) -> Expo:
    return tuple(max(x, y) for x, y in zip(a, b))


def expo_sub(a: Expo, b: Expo) -> Expo:
    return tuple(x - y for x, y in zip(a, b))


def shift(p: Poly, m: Expo, coef) -> Poly:
    return {expo_mul(mono, m): c * coef for mono, c in p.items()}


def monic(p: Poly) -> Poly:
    inv = 1 / p[lead(p)]
    return {m: c * inv for m, c in p.items()}


class WorkLimit(Exception):
    """Raised internally when the reduction budget is exhausted."""


class _Budget:
    __slots__ = ("left", "used")

    def __init__(self, limit: int):
        self.left = limit
        self.used = 0

    def spend(self, n: int = 1) -> None:
        self.left -= n
        self.used += n
        if self.left < 0:
            raise WorkLimit


def normal_form(p: Poly, basis: list, budget: _Budget) -> Poly:
    """Fully reduce p modulo the (monic) basis; deterministic divisor choice."""
    out: Poly = {}
    work = dict(p)
    while work:
        m = lead(work)
        c = work[m]
        reducer = None
        for lt, q in basis:
            if expo_divides(lt, m):
                reducer = (lt, q)
                break
        if reducer is None:
            out[m] = c
            del work[m]
            continue
        lt, q = reducer
        budget.spend(len(q))
        quot = expo_sub(m, lt)
        for mono, qc in q.items():
            key = expo_mul(mono, quot)
            w = work.get(key, 0) - c * qc
            if w:
                work[key] = w
            else:
                work.pop(key, None)
    return out


@dataclass
class GroebnerResult:
    n_vars: int
    d_max: int
    basis: list  # reduced Groebner elements (monic dicts), truncated at d_max
    lead_terms: list
    hilbert: list  # h(0..d_max) of the quotient
    stabilized: bool  # no pairs deferred: the basis is the full Groebner basis
    work_limited: bool
    hilbert_exact_through: int
    krull_dim: Optional[int]
    work: int


def groebner_hilbert(gens: list, n_vars: int, d_max: int,
                     work_limit: int = 20_000_000) -> GroebnerResult:
    """Truncated Groebner basis and Hilbert data for a homogeneous ideal."""
    budget = _Budget(work_limit)
    basis: list = []  # (lead, poly) with poly monic

    def add(p: Poly) -> None:
        basis.append((lead(p), monic(p)))

    work_limited = False
    processed_through = d_max
    try:
        seeds = []
        for g in gens:
            g = {m: mpq(c) for m, c in g.items() if c}
            if not g:
                continue
            degs = {sum(m) for m in g}
            if len(degs) != 1:
                raise ValueError("ideal generators must be homogeneous")
            seeds.append(g)
        for g in sorted(seeds, key=lambda q: grevlex_key(lead(q))):
            r = normal_form(g, basis, budget)
            if r:
                add(r)
        pairs = {(i, j) for i in range(len(basis)) for j in range(i)}
        deferred = False
        while pairs:
            best = min(pairs, key=lambda ij: (
                sum(expo_lcm(basis[ij[0]][0], basis[ij[1]][0])),
                ij[1], ij[0]))
            pairs.remove(best)
            i, j = best
            li, lj = basis[i][0], basis[j][0]
            lcm = expo_lcm(li, lj)
            deg = sum(lcm)
            if deg > d_max:
                deferred = True
                continue
            if sum(li) + sum(lj) == deg:  # coprime leads: S-poly reduces to zero
                continue
            pi, pj = basis[i][1], basis[j][1]
            s = shift(pi, expo_sub(lcm, li), mpq(1))
            for m, c in shift(pj, expo_sub(lcm, lj), mpq(1)).items():
                w = s.get(m, 0) - c
                if w:
                    s[m] = w
                else:
                    s.pop(m, None)
            r = normal_form(s, basis, budget)
            if r:
                new = len(basis)
                add(r)
                pairs.update((new, k) for k in range(new))
        stabilized = not deferred
    except WorkLimit:
        work_limited = True
        stabilized = False
        remaining = [sum(expo_lcm(basis[i][0], basis[j][0])) for i, j in pairs]
        processed_through = min(remaining + [d_max + 1]) - 1

    reduced = _interreduce(basis, budget, work_limited)
    leads = [lt for lt, _ in reduced]
    hilbert = staircase_hilbert(leads, n_vars, d_max)
    krull = staircase_dimension(leads, n_vars) if stabilized else None
    return GroebnerResult(
        n_vars=n_vars, d_max=d_max,
        basis=[q for _, q in reduced], lead_terms=leads, hilbert=hilbert,
        stabilized=stabilized, work_limited=work_limited,
        hilbert_exact_through=processed_through if work_limited else d_max,
        krull_dim=krull, work=budget.used)


def _interreduce(basis: list, budget: _Budget, limited: bool) -> list:
    """Reduce each element against the others; keep going even if limited."""
    out = []
    leads = [lt for lt, _ in basis]
    for idx, (lt, p) in enumerate(basis):
        if any(expo_divides(leads[k], lt) for k in range(len(basis)) if k != idx
               and leads[k] != lt):
            continue
        others = [basis[k] for k in range(len(basis)) if basis[k][0] != lt]
        try:
            tail = dict(p)
            del tail[lt]
            red = normal_form(tail, others, budget) if not limited else tail
            red[lt] = mpq(1)
            out.append((lt, red))
        except WorkLimit:
            out.append((lt, p))
    seen = set()
    unique = []
    for lt, p in sorted(out, key=lambda lp: grevlex_key(lp[0])):
        if lt not in seen:
            seen.add(lt)
            unique.append((lt, p))
    return unique


def staircase_hilbert(leads: list, n_vars: int, d_max: int) -> list:
    """h(d) = number of degree-d monomials divisible by no leading term.

    Depth-first over exponent vectors in non-decreasing variable order; a
    branch dies as soon as some leading term divides the current monomial,
    since every extension stays divisible.  Divisibility is tracked by a
    per-lead deficit counter (coordinates still short of the lead), updated
    only for leads involving the variable being stepped.
    """
    counts = [0] * (d_max + 1)
    deficits = [sum(1 for e in m if e) for m in leads]
    by_var = [[] for _ in range(n_vars)]
    for idx, m in enumerate(leads):
        for i, e in enumerate(m):
            if e:
                by_var[i].append(idx)
    if 0 in deficits:  # a constant lead: unit ideal, empty staircase
        return counts
    expo = [0] * n_vars

    def count(var: int, deg: int):
        counts[deg] += 1
        if deg == d_max:
            return
        for i in range(var, n_vars):
            expo[i] += 1
            blocked = False
            for idx in by_var[i]:
                if expo[i] == leads[idx][i]:
                    deficits[idx] -= 1
                    if not deficits[idx]:
                        blocked = True
            if not blocked:
                count(i, deg + 1)
            for idx in by_var[i]:
                if expo[i] == leads[idx][i]:
                    deficits[idx] += 1
            expo[i] -= 1

    count(0, 0)
    return counts


def staircase_dimension(leads: list, n_vars: int) -> int:
    """Largest number of variables spanning no leading-term support."""
    if any(not any(m) for m in leads):
        return -1  # unit ideal: zero ring
    supports = sorted({frozenset(i for i, e in enumerate(m) if e) for m in leads},
                      key=lambda s: (len(s), sorted(s)))
    best = 0

    def extend(i: int, current: frozenset, pool: list):
        nonlocal best
        best = max(best, len(current))
        for k in range(i, len(pool)):
            v = pool[k]
            cand = current | {v}
            if len(cand) + (len(pool) - k - 1) <= best:
                continue
            if any(s <= cand for s in supports):
                continue
            extend(k + 1, cand, pool)

    extend(0, frozenset(), list(range(n_vars)))
    return best


def hilbert_by_rank(gens: list, n_vars: int, d: int) -> int:
    """dim of degree-d quotient via the rank of the multiplication span.

    Independent of Buchberger: h(d) = dim R_d - rank{m * g : deg(m g) = d}.
    """
    gens = [{m: mpq(c) for m, c in g.items() if c} for g in gens]
    gens = [g for g in gens if g]
    all_monos = sorted(_monomials(n_vars, d), key=grevlex_key)
    index = {m: i for i, m in enumerate(all_monos)}
    rows = []
    for g in gens:
        gdeg = poly_degree(g)
        if gdeg > d:
            continue
        for m in _monomials(n_vars, d - gdeg):
            rows.append({index[expo_mul(mono, m)]: c for mono, c in g.items()})
    basis, _ = rref(rows)
    return len(all_monos) - len(basis)


def _monomials(n_vars: int, d: int):
    if d == 0:
        yield tuple([0] * n_vars)
        return
    expo = [0] * n_vars

    def walk(var: int, remaining: int):
        if var == n_vars - 1:
            expo[var] = remaining
            yield tuple(expo)
            expo[var] = 0
            return
        for e in range(remaining, -1, -1):
            expo[var] = e
            yield from walk(var + 1, remaining - e)
            expo[var] = 0

    yield from walk(0, d)
