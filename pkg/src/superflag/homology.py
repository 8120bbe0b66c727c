"""Blockwise cohomology of sector-split chain complexes with contraction data.

A chain here is a finite list of graded blocks joined by degree-raising maps
that are block diagonal with respect to a common sector labelling.  For each
sector we compute, in exact arithmetic, reduced-echelon bases of cycles and
boundaries, canonical homology representatives, and an explicit homotopy; the
global answer is assembled sector-major, which reproduces the echelon form of
the unsplit problem because reduced echelon bases are unique.

Representatives follow the echelon rule: cycle rows whose pivot is not a
boundary pivot.  The homotopy sends each boundary-basis row to its unique
preimage supported on the non-kernel (free) coordinates of the previous block,
and kills representatives and the echelon complement of the cycles.  A second
deterministic pivot rule ("reversed", echelon after reversing coordinate
order) yields an alternative contraction used to probe basis invariance.
"""

from __future__ import annotations

from bisect import bisect_right

from .linalg import (ONE, SparseMatrix, Subspace, matrix_rank,
                     rank_kernel_image, solve)

RULES = ("standard", "reversed")

Vec = dict


def _flip_vec(v: Vec, n: int) -> Vec:
    return {n - 1 - k: x for k, x in v.items()}


def _flip_matrix(m: SparseMatrix) -> SparseMatrix:
    entries = {(m.rows - 1 - r, m.cols - 1 - c): x
               for (r, c), x in m.entries.items()}
    return SparseMatrix(m.rows, m.cols, entries)


def _full_subspace(n: int) -> Subspace:
    return Subspace(n, [{j: ONE} for j in range(n)], list(range(n)))


class LocalContraction:
    """Cycles, boundaries, representatives and homotopy for one sector block."""

    __slots__ = ("dim", "prev_dim", "rule", "cycles", "boundaries",
                 "reps_int", "rep_pivots", "h_int")

    def __init__(self, dim: int, prev_dim: int, d_in, d_out, rule: str = "standard"):
        if rule not in RULES:
            raise ValueError(f"unknown pivot rule {rule!r}")
        self.dim = dim
        self.prev_dim = prev_dim
        self.rule = rule
        flip = rule == "reversed"
        if d_out is not None and flip:
            d_out = _flip_matrix(d_out)
        if d_in is not None and flip:
            d_in = _flip_matrix(d_in)
        if d_out is None or d_out.rows == 0:
            self.cycles = _full_subspace(dim)
        else:
            _, self.cycles, _ = rank_kernel_image(d_out)
        self.h_int = {}
        if d_in is None or d_in.cols == 0 or not d_in.entries:
            self.boundaries = Subspace(dim, [], [])
        else:
            _, prev_kernel, self.boundaries = rank_kernel_image(d_in)
            kernel_pivots = set(prev_kernel.pivots)
            free = [j for j in range(prev_dim) if j not in kernel_pivots]
            pos = {j: jj for jj, j in enumerate(free)}
            restricted = SparseMatrix(
                dim, len(free),
                {(r, pos[c]): x for (r, c), x in d_in.entries.items()
                 if c in pos})
            for pivot, row in zip(self.boundaries.pivots, self.boundaries.basis):
                x = solve(restricted, row)
                if x is None:
                    raise AssertionError("boundary row escaped the image")
                self.h_int[pivot] = {free[j]: xv for j, xv in x.items()}
        boundary_pivots = set(self.boundaries.pivots)
        for row in self.boundaries.basis:
            if not self.cycles.contains(row):
                raise AssertionError("boundaries are not cycles (d*d != 0?)")
        self.reps_int = []
        self.rep_pivots = []
        for pivot, row in zip(self.cycles.pivots, self.cycles.basis):
            if pivot not in boundary_pivots:
                self.reps_int.append(row)
                self.rep_pivots.append(pivot)

    @property
    def hdim(self) -> int:
        return len(self.reps_int)

    def _in(self, v: Vec) -> Vec:
        return _flip_vec(v, self.dim) if self.rule == "reversed" else v

    def _out(self, v: Vec, n: int) -> Vec:
        return _flip_vec(v, n) if self.rule == "reversed" else v

    def reps(self) -> list:
        return [self._out(r, self.dim) for r in self.reps_int]

    def _cycle_part(self, v: Vec) -> Vec:
        rem = self.cycles.reduce(v)
        return {k: x for k, x in
                ((k, v.get(k, 0) - rem.get(k, 0))
                 for k in set(v) | set(rem)) if x}

    def p(self, v: Vec) -> dict:
        z = self._cycle_part(self._in(v))
        z0 = self.boundaries.reduce(z)
        return {k: z0[pv] for k, pv in enumerate(self.rep_pivots) if pv in z0}

    def i(self, coords: dict) -> Vec:
        out: Vec = {}
        for k, coef in coords.items():
            if not coef:
                continue
            for j, x in self.reps_int[k].items():
                w = out.get(j, 0) + coef * x
                if w:
                    out[j] = w
                else:
                    out.pop(j, None)
        return self._out(out, self.dim)

    def h(self, v: Vec) -> Vec:
        z = self._cycle_part(self._in(v))
        z0 = self.boundaries.reduce(z)
        out: Vec = {}
        for pivot, row in zip(self.boundaries.pivots, self.boundaries.basis):
            coef = z.get(pivot, 0) - z0.get(pivot, 0)
            if not coef:
                continue
            for j, x in self.h_int[pivot].items():
                w = out.get(j, 0) + coef * x
                if w:
                    out[j] = w
                else:
                    out.pop(j, None)
        return self._out(out, self.prev_dim)


def chain_dims(tables, transitions) -> list:
    """Homology dimensions of a sector-split chain via ranks only.

    Much cheaper than a full contraction: no kernel bases, no homotopy
    solves, and each sector is eliminated once in its narrower orientation.
    """
    ranks = [sum(matrix_rank(m) for m in local.values())
             for local in transitions]
    dims = []
    for c, (n_c, _) in enumerate(tables):
        r_out = ranks[c] if c < len(ranks) else 0
        r_in = ranks[c - 1] if c > 0 else 0
        dims.append(n_c - r_out - r_in)
    return dims


def block_table(block_data) -> tuple:
    """(dimension, sectors) extracted from GradedAlgebra.block_data output."""
    basis, _, sectors = block_data
    return (len(basis), sectors)


class ChainContraction:
    """Contraction data for every degree of a sector-split chain.

    ``tables``: per degree, (dimension, [(label, start, stop)]).
    ``transitions``: per degree k, dict label -> local matrix of the map from
    degree k to k+1 (missing labels act by zero).
    ``tail``: trailing degrees that serve only as targets; no contraction (and
    no meaningful homology) is produced for them.
    """

    def __init__(self, tables: list, transitions: list, rule: str = "standard",
                 tail: int = 0):
        if len(transitions) != len(tables) - 1:
            raise ValueError("need one transition per adjacent pair of degrees")
        self.tables = tables
        self.transitions = transitions
        self.rule = rule
        self.tail = tail
        self._sector_maps = []
        for dim, sectors in tables:
            table = {label: (start, stop) for label, start, stop in sectors}
            starts = [start for _, start, _ in sectors]
            labels = [label for label, _, _ in sectors]
            self._sector_maps.append((table, starts, labels))
        self.degrees = len(tables) - tail
        self.locals: list = []
        for k in range(self.degrees):
            self.locals.append({label: self._build_local(k, label)
                                for label in self._labels_at(k)})
        self._h_offsets = []
        for k in range(self.degrees):
            offsets = {}
            total = 0
            for label in self._labels_at(k):
                offsets[label] = total
                total += self.locals[k][label].hdim
            self._h_offsets.append((offsets, total))

    # -- construction ----------------------------------------------------

    def _labels_at(self, k: int) -> list:
        return [label for label, _, _ in self.tables[k][1]]

    def _local_dim(self, k: int, label) -> int:
        if k < 0 or k >= len(self.tables):
            return 0
        table = self._sector_maps[k][0]
        if label not in table:
            return 0
        start, stop = table[label]
        return stop - start

    def _build_local(self, k: int, label) -> LocalContraction:
        dim = self._local_dim(k, label)
        prev_dim = self._local_dim(k - 1, label)
        d_in = self.transitions[k - 1].get(label) if k > 0 else None
        d_out = self.transitions[k].get(label) if k < len(self.transitions) else None
        if d_out is not None and d_out.rows == 0:
            d_out = None
        return LocalContraction(dim, prev_dim, d_in, d_out, self.rule)

    # -- coordinates -------------------------------------------------------

    def split(self, k: int, v: Vec) -> dict:
        """Global vector at degree k -> {label: local vector}."""
        table, starts, labels = self._sector_maps[k]
        out: dict = {}
        for j, x in v.items():
            if not x:
                continue
            idx = bisect_right(starts, j) - 1
            label = labels[idx]
            start, stop = table[label]
            if not start <= j < stop:
                raise IndexError(f"coordinate {j} outside sectors of degree {k}")
            out.setdefault(label, {})[j - start] = x
        return out

    def unsplit(self, k: int, parts: dict) -> Vec:
        table = self._sector_maps[k][0]
        out: Vec = {}
        for label, local in parts.items():
            start = table[label][0]
            for j, x in local.items():
                if x:
                    out[start + j] = x
        return out

    # -- public api --------------------------------------------------------

    def hdim(self, k: int) -> int:
        return self._h_offsets[k][1]

    def homology_dims(self) -> list:
        return [self.hdim(k) for k in range(self.degrees)]

    def reps(self, k: int) -> list:
        out = []
        table = self._sector_maps[k][0]
        for label in self._labels_at(k):
            start = table[label][0]
            for row in self.locals[k][label].reps():
                out.append({start + j: x for j, x in row.items()})
        return out

    def p_apply(self, k: int, v: Vec) -> dict:
        offsets = self._h_offsets[k][0]
        out: dict = {}
        for label, local in self.split(k, v).items():
            coords = self.locals[k][label].p(local)
            base = offsets[label]
            for kk, x in coords.items():
                if x:
                    out[base + kk] = x
        return out

    def i_apply(self, k: int, coords: dict) -> Vec:
        offsets, total = self._h_offsets[k]
        order = self._labels_at(k)
        parts: dict = {}
        bounds = [(offsets[label], self.locals[k][label].hdim, label)
                  for label in order]
        for kk, x in coords.items():
            if not (0 <= kk < total):
                raise IndexError(f"homology coordinate {kk} out of range")
            for base, size, label in bounds:
                if base <= kk < base + size:
                    parts.setdefault(label, {})[kk - base] = x
                    break
        out: Vec = {}
        table = self._sector_maps[k][0]
        for label, local_coords in parts.items():
            start = table[label][0]
            for j, x in self.locals[k][label].i(local_coords).items():
                out[start + j] = x
        return out

    def h_apply(self, k: int, v: Vec) -> Vec:
        parts = {}
        for label, local in self.split(k, v).items():
            image = self.locals[k][label].h(local)
            if image:
                parts[label] = image
        return self.unsplit(k - 1, parts)

    # -- checks --------------------------------------------------------------

    def verify(self, k: int) -> None:
        """Exact side conditions and the homotopy identity at degree k."""
        if k >= self.degrees:
            raise ValueError(f"degree {k} was not contracted (tail buffer)")
        if self.tail and k == self.degrees - 1:
            raise ValueError(
                "cannot verify the homotopy identity next to the tail buffer")
        for label in self._labels_at(k):
            loc = self.locals[k][label]
            dim = loc.dim
            d_in = self.transitions[k - 1].get(label) if k > 0 else None
            d_out = self.transitions[k].get(label) if k < len(self.transitions) else None
            next_loc = None
            if k + 1 < self.degrees:
                next_loc = self.locals[k + 1].get(label)
            for rep in loc.reps():
                if d_out is not None and d_out.matvec(rep):
                    raise AssertionError("representative is not a cycle")
            for kk in range(loc.hdim):
                if loc.p(loc.i({kk: ONE})) != {kk: ONE}:
                    raise AssertionError("p i != identity")
            for j in range(dim):
                u = {j: ONE}
                rhs: Vec = {}
                if d_in is not None:
                    for jj, x in d_in.matvec(loc.h(u)).items():
                        rhs[jj] = rhs.get(jj, 0) + x
                if d_out is not None and next_loc is not None:
                    hd = next_loc.h(d_out.matvec(u))
                    for jj, x in hd.items():
                        rhs[jj] = rhs.get(jj, 0) + x
                rhs = {jj: x for jj, x in rhs.items() if x}
                lhs = dict(loc.i(loc.p(u)))
                lhs = {jj: -x for jj, x in lhs.items()}
                lhs[j] = lhs.get(j, 0) + ONE
                lhs = {jj: x for jj, x in lhs.items() if x}
                if lhs != rhs:
                    raise AssertionError(
                        f"homotopy identity fails at degree {k}, sector {label}, "
                        f"basis vector {j}")

    def verify_all(self) -> None:
        for k in range(self.degrees):
            self.verify(k)
