"""Graded free modules, degree-0 graded maps and cohomologically indexed
free complexes over S or E.

Free modules carry explicit generator degrees.  A map f stores the images of
the source generators in its columns: entry(r, c) is homogeneous of degree
gen_deg_source(c) - gen_deg_target(r).  Module elements are written
m * g (monomial times generator) and maps apply on the right:

    m * g_c  |->  sum_r (m * entry[r][c]) * g_r

so composition multiplies the inner map's entry first.  Over E the K-dual of
a complex transposes matrices through the reversal anti-automorphism alpha
(alpha(ab) = alpha(b) alpha(a)), which preserves d^2 = 0 on the nose.

Complexes are stored on finite windows [lo, hi]; homology is only reported
where both neighboring differentials are inside the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import linalg
from .rings import (Poly, RingSig, exponents_of_degree, mask_word,
                    masks_of_size, merge_sign, scalar, unit_inverse)


@dataclass(frozen=True)
class GradedFree:
    """Free graded module with one entry of gen_degrees per generator."""

    ring: RingSig
    gen_degrees: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.gen_degrees)

    def piece_basis(self, j: int) -> tuple:
        """Monomial basis ((gen_index, monomial), ...) of the degree-j piece."""
        return _piece_basis(self.ring, self.gen_degrees, j)

    def piece_dim(self, j: int) -> int:
        return len(self.piece_basis(j))

    def piece_index(self, j: int) -> dict:
        return _piece_index(self.ring, self.gen_degrees, j)

    def support(self) -> tuple[int, int] | None:
        """Degree range with nonzero pieces; None for the zero module.
        Over S the support is unbounded above and the second entry is the
        minimum generator degree."""
        if not self.gen_degrees:
            return None
        if self.ring.kind == "E":
            return (min(self.gen_degrees) - self.ring.v, max(self.gen_degrees))
        return (min(self.gen_degrees), min(self.gen_degrees))

    def twist(self, a: int) -> "GradedFree":
        return GradedFree(self.ring, tuple(g - a for g in self.gen_degrees))

    def dual(self) -> "GradedFree":
        """Hom_K(-, wedge^v W): generator degrees g -> v - g."""
        return GradedFree(self.ring, tuple(self.ring.v - g for g in self.gen_degrees))


@lru_cache(maxsize=None)
def _piece_basis(ring: RingSig, gen_degrees: tuple[int, ...], j: int) -> tuple:
    out = []
    if ring.kind == "E":
        for gi, g in enumerate(gen_degrees):
            for m in masks_of_size(ring.v, g - j):
                out.append((gi, m))
    else:
        for gi, g in enumerate(gen_degrees):
            for m in exponents_of_degree(ring.v, j - g):
                out.append((gi, m))
    return tuple(out)


@lru_cache(maxsize=None)
def _piece_index(ring: RingSig, gen_degrees: tuple[int, ...], j: int) -> dict:
    return {bm: i for i, bm in enumerate(_piece_basis(ring, gen_degrees, j))}


class GradedMap:
    """Degree-0 homogeneous map between graded free modules."""

    def __init__(self, source: GradedFree, target: GradedFree, entries):
        if source.ring != target.ring:
            raise ValueError("source and target over different rings")
        self.source = source
        self.target = target
        self.ring = source.ring
        # entries[r][c], r over target generators, c over source generators
        self.entries = [list(row) for row in entries]
        if len(self.entries) != target.rank or \
                any(len(row) != source.rank for row in self.entries):
            raise ValueError("entry matrix shape mismatch")

    @staticmethod
    def zero(source: GradedFree, target: GradedFree) -> "GradedMap":
        z = source.ring.zero()
        return GradedMap(source, target,
                         [[z] * source.rank for _ in range(target.rank)])

    @staticmethod
    def identity(module: GradedFree) -> "GradedMap":
        one = module.ring.one()
        z = module.ring.zero()
        ent = [[one if r == c else z for c in range(module.rank)]
               for r in range(module.rank)]
        return GradedMap(module, module, ent)

    def check_homogeneous(self):
        for r, row in enumerate(self.entries):
            for c, e in enumerate(row):
                if e.is_zero():
                    continue
                want = self.source.gen_degrees[c] - self.target.gen_degrees[r]
                if e.degree() != want:
                    raise ValueError(
                        f"entry ({r},{c}) has degree {e.degree()}, expected {want}")

    def compose(self, inner: "GradedMap") -> "GradedMap":
        """self o inner (inner applied first)."""
        if inner.target != self.source:
            raise ValueError("compose shape mismatch")
        z = self.ring.zero()
        out = [[z] * inner.source.rank for _ in range(self.target.rank)]
        for s in range(self.target.rank):
            row_outer = self.entries[s]
            for c in range(inner.source.rank):
                acc = z
                for r in range(self.source.rank):
                    a = inner.entries[r][c]
                    b = row_outer[r]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
                out[s][c] = acc
        return GradedMap(inner.source, self.target, out)

    def degreewise_piece(self, j: int) -> np.ndarray:
        """K-matrix of the induced map (source)_j -> (target)_j in the
        canonical monomial bases."""
        ring = self.ring
        p = ring.p
        src, tgt = self.source, self.target
        sb = src.piece_basis(j)
        tb = tgt.piece_basis(j)
        A = linalg.zeros(len(tb), len(sb))
        if not sb or not tb:
            return A
        tidx = tgt.piece_index(j)
        sidx = src.piece_index(j)
        # group generators by degree so monomial transfer maps can be shared
        src_by_deg: dict[int, list[int]] = {}
        for c, g in enumerate(src.gen_degrees):
            src_by_deg.setdefault(g, []).append(c)
        tgt_by_deg: dict[int, list[int]] = {}
        for r, g in enumerate(tgt.gen_degrees):
            tgt_by_deg.setdefault(g, []).append(r)
        for a, cols in src_by_deg.items():
            if ring.kind == "E":
                smonos = masks_of_size(ring.v, a - j)
            else:
                smonos = exponents_of_degree(ring.v, j - a)
            if not smonos:
                continue
            for b, rows in tgt_by_deg.items():
                # collect block coefficients per entry monomial
                coeff: dict = {}
                for bi, r in enumerate(rows):
                    for ai, c in enumerate(cols):
                        for nu, cf in self.entries[r][c].terms.items():
                            mat = coeff.get(nu)
                            if mat is None:
                                mat = linalg.zeros(len(rows), len(cols))
                                coeff[nu] = mat
                            mat[bi, ai] = cf % p
                if not coeff:
                    continue
                col_pos = [np.array([sidx[(c, m)] for c in cols])
                           for m in smonos]
                for nu, mat in coeff.items():
                    for ai, m in enumerate(smonos):
                        if ring.kind == "E":
                            s = merge_sign(m, nu)
                            if s == 0:
                                continue
                            key = m | nu
                        else:
                            s = 1
                            key = tuple(x + y for x, y in zip(m, nu))
                        if (rows[0], key) not in tidx:
                            continue
                        row_pos = np.array([tidx[(r, key)] for r in rows])
                        sel = np.ix_(row_pos, col_pos[ai])
                        A[sel] = (A[sel] + s * mat) % p
        return A

    def twist(self, a: int) -> "GradedMap":
        return GradedMap(self.source.twist(a), self.target.twist(a), self.entries)

    def dual(self) -> "GradedMap":
        """alpha-transpose: Hom_K(-, wedge^v W) applied to the map."""
        ent = [[self.entries[r][c].alpha() for r in range(self.target.rank)]
               for c in range(self.source.rank)]
        return GradedMap(self.target.dual(), self.source.dual(), ent)

    def linear_part(self) -> "GradedMap":
        ent = [[e.linear_component() for e in row] for row in self.entries]
        return GradedMap(self.source, self.target, ent)

    def is_minimal(self) -> bool:
        return all(e.constant_term() == 0 for row in self.entries for e in row)

    def restrict(self, rows: list[int], cols: list[int]) -> "GradedMap":
        src = GradedFree(self.ring, tuple(self.source.gen_degrees[c] for c in cols))
        tgt = GradedFree(self.ring, tuple(self.target.gen_degrees[r] for r in rows))
        ent = [[self.entries[r][c] for c in cols] for r in rows]
        return GradedMap(src, tgt, ent)


def polycol_from_vector(module: GradedFree, j: int, vec) -> list[Poly]:
    """Convert a coordinate vector of (module)_j into a polynomial column."""
    basis = module.piece_basis(j)
    cols: list[dict] = [dict() for _ in range(module.rank)]
    for idx, val in enumerate(np.asarray(vec).ravel()):
        val = int(val)
        if val == 0:
            continue
        gi, mono = basis[idx]
        cols[gi][mono] = cols[gi].get(mono, 0) + val
    return [Poly(module.ring, c) for c in cols]


@dataclass
class FreeComplex:
    """Cohomologically indexed complex of graded free modules on [lo, hi].

    diffs[i] : terms[i] -> terms[i+1]; missing terms are rank 0.
    """

    ring: RingSig
    terms: dict[int, GradedFree]
    diffs: dict[int, GradedMap]
    lo: int
    hi: int
    labels: dict = field(default_factory=dict)  # optional provenance per term
    bounded_below: bool = False  # zero in positions < lo
    bounded_above: bool = False  # zero in positions > hi

    def term(self, i: int) -> GradedFree:
        t = self.terms.get(i)
        if t is None:
            t = GradedFree(self.ring, ())
        return t

    def diff(self, i: int) -> GradedMap:
        d = self.diffs.get(i)
        if d is None:
            d = GradedMap.zero(self.term(i), self.term(i + 1))
        return d

    def positions(self):
        return range(self.lo, self.hi + 1)

    def degree_support(self) -> tuple[int, int]:
        los, his = [], []
        for i in self.positions():
            t = self.term(i)
            if not t.rank:
                continue
            if self.ring.kind == "E":
                los.append(min(t.gen_degrees) - self.ring.v)
                his.append(max(t.gen_degrees))
            else:
                los.append(min(t.gen_degrees))
                his.append(max(t.gen_degrees) + 1)
        if not los:
            return (0, -1)
        return (min(los), max(his))

    def verify(self, degree_range: tuple[int, int] | None = None):
        """Check entry homogeneity and d^2 = 0 exactly.

        A homogeneous composite vanishes iff its degreewise pieces vanish at
        the source generator degrees (the identity-monomial columns there
        carry the raw entry coefficients), so only those degrees are
        checked unless a degree_range is forced."""
        for i in self.positions():
            if i in self.diffs:
                self.diffs[i].check_homogeneous()
        for i in range(self.lo, self.hi - 1):
            d0, d1 = self.diff(i), self.diff(i + 1)
            if d0.target != d1.source:
                raise ValueError(f"terms disagree at position {i + 1}")
            if degree_range is None:
                degrees = sorted(set(self.term(i).gen_degrees))
            else:
                degrees = range(degree_range[0], degree_range[1] + 1)
            for j in degrees:
                a = d0.degreewise_piece(j)
                b = d1.degreewise_piece(j)
                if a.size and b.size and np.any(linalg.matmul(b, a, self.ring.p)):
                    raise ValueError(f"d^2 != 0 at position {i}, degree {j}")

    def homology_dim(self, i: int, j: int) -> int:
        """dim ker(d^i)_j - rank(d^{i-1})_j.  Positions at the window
        boundary are only meaningful on a side where the complex is known to
        be zero beyond it (bounded_below/bounded_above)."""
        if i - 1 < self.lo and not self.bounded_below:
            raise ValueError(f"position {i} needs a left neighbor in the window")
        if i + 1 > self.hi and not self.bounded_above:
            raise ValueError(f"position {i} needs a right neighbor in the window")
        p = self.ring.p
        dim_here = self.term(i).piece_dim(j)
        if i - 1 >= self.lo:
            rk_in = linalg.rank(self.diff(i - 1).degreewise_piece(j), p)
        else:
            rk_in = 0
        if i + 1 <= self.hi:
            rk_out = linalg.rank(self.diff(i).degreewise_piece(j), p)
        else:
            rk_out = 0
        return dim_here - rk_out - rk_in

    def homology_dims_at(self, i: int) -> dict[int, int]:
        """All nonzero homology dimensions at position i, keyed by degree."""
        out = {}
        t = self.term(i)
        if not t.rank:
            return out
        sup = _term_support(t)
        for j in range(sup[0], sup[1] + 1):
            h = self.homology_dim(i, j)
            if h:
                out[j] = h
        return out

    def is_exact_at(self, i: int) -> bool:
        return not self.homology_dims_at(i)

    def euler_per_degree(self, j: int) -> int:
        return sum((-1) ** i * self.term(i).piece_dim(j) for i in self.positions())

    def is_minimal(self) -> bool:
        return all(self.diff(i).is_minimal() for i in range(self.lo, self.hi))

    def shift(self, a: int) -> "FreeComplex":
        """C<a>: term of cohomological degree j is C^{a+j}."""
        terms = {i - a: t for i, t in self.terms.items()}
        diffs = {i - a: d for i, d in self.diffs.items()}
        labels = {i - a: l for i, l in self.labels.items()}
        return FreeComplex(self.ring, terms, diffs, self.lo - a, self.hi - a,
                           labels, self.bounded_below, self.bounded_above)

    def twist(self, a: int) -> "FreeComplex":
        terms = {i: t.twist(a) for i, t in self.terms.items()}
        diffs = {i: d.twist(a) for i, d in self.diffs.items()}
        return FreeComplex(self.ring, terms, diffs, self.lo, self.hi,
                           dict(self.labels), self.bounded_below,
                           self.bounded_above)

    def dualize(self) -> "FreeComplex":
        """Hom_K(-, wedge^v W): term i of the dual is the dual of C^{-i}."""
        terms = {-i: t.dual() for i, t in self.terms.items()}
        diffs = {}
        for i, d in self.diffs.items():
            diffs[-i - 1] = d.dual()
        return FreeComplex(self.ring, terms, diffs, -self.hi, -self.lo,
                           bounded_below=self.bounded_above,
                           bounded_above=self.bounded_below)

    def gen_degree_multisets(self) -> dict[int, tuple[int, ...]]:
        return {i: tuple(sorted(self.term(i).gen_degrees))
                for i in self.positions() if self.term(i).rank}

    def to_json_dict(self) -> dict:
        cols = []
        for i in self.positions():
            t = self.term(i)
            cols.append({
                "position": i,
                "gen_degrees": list(t.gen_degrees),
                "entries": [[e.render() for e in row]
                            for row in self.diff(i).entries] if i < self.hi else [],
            })
        return {"schema": 1, "window": [self.lo, self.hi], "terms": cols}


def _term_support(t: GradedFree) -> tuple[int, int]:
    if t.ring.kind == "E":
        return (min(t.gen_degrees) - t.ring.v, max(t.gen_degrees))
    # S-free modules are unbounded above; callers pick their own cutoffs
    return (min(t.gen_degrees), max(t.gen_degrees) + t.ring.v)


def minimize(cx: FreeComplex) -> FreeComplex:
    """Cancel unit (degree-0 scalar) entries one at a time, Gaussian style.

    The result is homotopy equivalent to the input with no unit entries left;
    homology dimensions are unchanged at every (position, degree).
    """
    terms = {i: list(cx.term(i).gen_degrees) for i in cx.positions()}
    ents = {i: [row[:] for row in cx.diff(i).entries]
            for i in range(cx.lo, cx.hi)}
    p = cx.ring.p

    def find_unit(i):
        mat = ents[i]
        for r, row in enumerate(mat):
            for c, e in enumerate(row):
                if e.constant_term():
                    return r, c
        return None

    i = cx.lo
    while i < cx.hi:
        hit = find_unit(i)
        if hit is None:
            i += 1
            continue
        r, c = hit
        mat = ents[i]
        u = mat[r][c].constant_term()
        uinv = unit_inverse(cx.ring, u)
        keep_rows = [rr for rr in range(len(terms[i + 1])) if rr != r]
        keep_cols = [cc for cc in range(len(terms[i])) if cc != c]
        # d' = delta - u^{-1} * (row r entries) * (column c entries)
        beta = [mat[r][cc] for cc in keep_cols]
        gamma = [mat[rr][c] for rr in keep_rows]
        new = []
        for rr_i, rr in enumerate(keep_rows):
            row = []
            for cc_i, cc in enumerate(keep_cols):
                corr = beta[cc_i] * gamma[rr_i]
                row.append(mat[rr][cc] - corr.scale(uinv))
            new.append(row)
        ents[i] = new
        if i - 1 >= cx.lo:
            # incoming map loses row c of its target = generator c of terms[i]
            ents[i - 1] = [ents[i - 1][rr] for rr in range(len(ents[i - 1])) if rr != c]
        if i + 1 < cx.hi:
            ents[i + 1] = [[row[cc] for cc in range(len(row)) if cc != r]
                           for row in ents[i + 1]]
        terms[i] = [g for k, g in enumerate(terms[i]) if k != c]
        terms[i + 1] = [g for k, g in enumerate(terms[i + 1]) if k != r]
        # new units may appear one step earlier
        if i - 1 >= cx.lo:
            i -= 1

    new_terms = {i: GradedFree(cx.ring, tuple(terms[i])) for i in cx.positions()}
    new_diffs = {}
    for i in range(cx.lo, cx.hi):
        new_diffs[i] = GradedMap(new_terms[i], new_terms[i + 1], ents[i])
    return FreeComplex(cx.ring, new_terms, new_diffs, cx.lo, cx.hi,
                       bounded_below=cx.bounded_below,
                       bounded_above=cx.bounded_above)


def linear_part(cx: FreeComplex) -> FreeComplex:
    """Erase all entry components of absolute degree > 1.  Requires a minimal
    complex so that the result is again a complex."""
    if not cx.is_minimal():
        raise ValueError("linear_part requires a minimal complex")
    diffs = {i: d.linear_part() for i, d in cx.diffs.items()}
    return FreeComplex(cx.ring, dict(cx.terms), diffs, cx.lo, cx.hi,
                       dict(cx.labels), cx.bounded_below, cx.bounded_above)


def mapping_cone(f_blocks: dict[int, GradedMap], a: FreeComplex,
                 b: FreeComplex) -> FreeComplex:
    """Cone of a chain map f: a -> b given by degree-0 blocks per position.

    cone^k = a^{k+1} (+) b^k with differential [[-d_a, 0], [f, d_b]].
    """
    ring = a.ring
    lo = min(a.lo - 1, b.lo)
    hi = max(a.hi - 1, b.hi)
    terms = {}
    for k in range(lo, hi + 1):
        terms[k] = GradedFree(ring, a.term(k + 1).gen_degrees + b.term(k).gen_degrees)
    diffs = {}
    z = ring.zero()
    for k in range(lo, hi):
        src, tgt = terms[k], terms[k + 1]
        na, nb = a.term(k + 1).rank, b.term(k).rank
        ma, mb = a.term(k + 2).rank, b.term(k + 1).rank
        ent = [[z] * (na + nb) for _ in range(ma + mb)]
        da = a.diff(k + 1)
        for r in range(ma):
            for c in range(na):
                ent[r][c] = -da.entries[r][c]
        fb = f_blocks.get(k + 1)
        if fb is not None:
            for r in range(mb):
                for c in range(na):
                    ent[ma + r][c] = fb.entries[r][c]
        db = b.diff(k)
        for r in range(mb):
            for c in range(nb):
                ent[ma + r][na + c] = db.entries[r][c]
        diffs[k] = GradedMap(src, tgt, ent)
    return FreeComplex(ring, terms, diffs, lo, hi)


def binomial(n: int, k: int) -> int:
    """C(n, k) with the convention used for cohomology of line bundles:
    zero when k < 0 or n < k."""
    if k < 0 or n < 0 or n < k:
        return 0
    return comb(n, k)
