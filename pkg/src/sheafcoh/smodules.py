"""Graded S-modules: finite presentations and explicit graded pieces.

A finitely presented module is a cokernel of a map of graded free S-modules
(relations -> generators).  Graded pieces and the multiplication maps
x_i : M_j -> M_{j+1} are computed degreewise by pure linear algebra over K:
the degree-j piece is the cokernel of the degreewise piece of the
presentation, represented on the monomial basis rows selected by
linalg.coker_basis.  No Groebner machinery is involved anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import linalg
from .complexes import GradedFree, GradedMap
from .rings import RingSig, exponents_of_degree, masks_of_size


@dataclass
class GradedPiecesModule:
    """A graded S-module given by finite-dimensional pieces on [lo, hi] plus
    multiplication-by-variable matrices mult[(i, j)] : M_j -> M_{j+1}."""

    ring: RingSig
    lo: int
    dims: list[int]
    mult: dict[tuple[int, int], np.ndarray]

    @property
    def hi(self) -> int:
        return self.lo + len(self.dims) - 1

    def dim(self, j: int) -> int:
        if self.lo <= j <= self.hi:
            return self.dims[j - self.lo]
        return 0

    def mult_map(self, i: int, j: int) -> np.ndarray:
        m = self.mult.get((i, j))
        if m is None:
            m = linalg.zeros(self.dim(j + 1), self.dim(j))
        return m

    def check_commutativity(self):
        """x_i x_k = x_k x_i on every piece; this is exactly the condition
        that makes the associated linear E-complex a complex.  Large pieces
        are checked through random projections (false-accept probability
        about p^-2 per pair), small ones exactly."""
        p = self.ring.p
        rng = np.random.default_rng(492)
        for j in range(self.lo, self.hi - 1):
            n = self.dim(j)
            if n == 0 or self.dim(j + 2) == 0:
                continue
            probes = None
            if n > 120:
                probes = rng.integers(0, p, size=(n, 2))
            for i in range(self.ring.v):
                for k in range(i):
                    src_i = self.mult_map(i, j)
                    src_k = self.mult_map(k, j)
                    if probes is not None:
                        src_i = linalg.matmul(src_i, probes, p)
                        src_k = linalg.matmul(src_k, probes, p)
                    a = linalg.matmul(self.mult_map(i, j + 1), src_k, p)
                    b = linalg.matmul(self.mult_map(k, j + 1), src_i, p)
                    if np.any((a - b) % p):
                        raise ValueError(
                            f"multiplication maps do not commute at degree {j} "
                            f"(variables {i}, {k})")

    def truncate(self, d: int) -> "GradedPiecesModule":
        if d < self.lo:
            raise ValueError("truncation below available range")
        off = d - self.lo
        dims = self.dims[off:]
        mult = {(i, j): m for (i, j), m in self.mult.items() if j >= d}
        return GradedPiecesModule(self.ring, d, dims, mult)

    def twist(self, a: int) -> "GradedPiecesModule":
        """M(a): piece at b is M_{a+b}."""
        mult = {(i, j - a): m for (i, j), m in self.mult.items()}
        return GradedPiecesModule(self.ring, self.lo - a, list(self.dims), mult)

    def mult_monomial(self, exp: tuple[int, ...], j: int) -> np.ndarray:
        """Matrix of multiplication by x^exp : M_j -> M_{j+|exp|}."""
        deg = sum(exp)
        out = linalg.identity(self.dim(j))
        cur = j
        for i, e in enumerate(exp):
            for _ in range(e):
                out = linalg.matmul(self.mult_map(i, cur), out, self.ring.p)
                cur += 1
        assert cur == j + deg
        return out

    def hilbert(self, lo: int, hi: int) -> list[int]:
        return [self.dim(j) for j in range(lo, hi + 1)]


class FPModuleS:
    """Finitely presented graded S-module, the cokernel of `presentation`
    (relations -> generators)."""

    def __init__(self, presentation: GradedMap):
        if presentation.ring.kind != "S":
            raise ValueError("presentation must be over S")
        presentation.check_homogeneous()
        self.presentation = presentation
        self.ring = presentation.ring
        self._piece_cache: dict[int, linalg.Reducer] = {}

    @staticmethod
    def free(ring: RingSig, gen_degrees: tuple[int, ...]) -> "FPModuleS":
        gens = GradedFree(ring, gen_degrees)
        rels = GradedFree(ring, ())
        return FPModuleS(GradedMap(rels, gens, [[] for _ in gen_degrees]))

    @staticmethod
    def from_quotient(ring: RingSig, polys) -> "FPModuleS":
        """S / (f_1, .., f_k) for homogeneous f_i."""
        gens = GradedFree(ring, (0,))
        degs = tuple(f.degree() for f in polys)
        rels = GradedFree(ring, degs)
        return FPModuleS(GradedMap(rels, gens, [list(polys)]))

    @property
    def generator_module(self) -> GradedFree:
        return self.presentation.target

    def reducer(self, j: int) -> linalg.Reducer:
        red = self._piece_cache.get(j)
        if red is None:
            A = self.presentation.degreewise_piece(j)
            red = linalg.Reducer(A, self.ring.p)
            self._piece_cache[j] = red
        return red

    def dim(self, j: int) -> int:
        return len(self.reducer(j).quot)

    def piece_rep_basis(self, j: int) -> list:
        """Monomial representatives of the degree-j piece inside the free
        cover (indices into the cover's piece basis)."""
        return self.reducer(j).quot

    def mult_map(self, i: int, j: int) -> np.ndarray:
        """x_i : M_j -> M_{j+1} in the cokernel representative bases."""
        F0 = self.generator_module
        red_j = self.reducer(j)
        red_j1 = self.reducer(j + 1)
        basis = F0.piece_basis(j)
        tidx = F0.piece_index(j + 1)
        cols = linalg.zeros(F0.piece_dim(j + 1), len(red_j.quot))
        for k, bidx in enumerate(red_j.quot):
            gi, exp = basis[bidx]
            new = list(exp)
            new[i] += 1
            cols[tidx[(gi, tuple(new))], k] = 1
        return red_j1.coords(cols)

    def pieces(self, lo: int, hi: int) -> GradedPiecesModule:
        dims = [self.dim(j) for j in range(lo, hi + 1)]
        mult = {}
        for j in range(lo, hi):
            for i in range(self.ring.v):
                mult[(i, j)] = self.mult_map(i, j)
        return GradedPiecesModule(self.ring, lo, dims, mult)

    def twist(self, a: int) -> "FPModuleS":
        return FPModuleS(self.presentation.twist(a))

    def tensor(self, other: "FPModuleS") -> "FPModuleS":
        """M (x)_S N via the standard presentation of a tensor product."""
        if self.ring != other.ring:
            raise ValueError("mixed rings")
        ring = self.ring
        gA, gB = self.generator_module, other.generator_module
        rA, rB = self.presentation.source, other.presentation.source
        gens = GradedFree(ring, tuple(a + b for a in gA.gen_degrees
                                      for b in gB.gen_degrees))
        rel_degs = tuple(a + b for a in rA.gen_degrees for b in gB.gen_degrees) \
            + tuple(a + b for a in gA.gen_degrees for b in rB.gen_degrees)
        rels = GradedFree(ring, rel_degs)
        z = ring.zero()
        nB = gB.rank
        ent = [[z] * rels.rank for _ in range(gens.rank)]
        col = 0
        for ca in range(rA.rank):
            for cb in range(nB):
                for ra in range(gA.rank):
                    ent[ra * nB + cb][col] = self.presentation.entries[ra][ca]
                col += 1
        for ca in range(gA.rank):
            for cb in range(rB.rank):
                for rb in range(nB):
                    ent[ca * nB + rb][col] = other.presentation.entries[rb][cb]
                col += 1
        return FPModuleS(GradedMap(rels, gens, ent))


def as_pieces(m, lo: int, hi: int) -> GradedPiecesModule:
    """Normalize FPModuleS | GradedPiecesModule to pieces on [lo, hi].

    A pieces module is treated as zero below its stored range (that is how
    truncations are used throughout); degrees above the stored range cannot
    be extrapolated and raise."""
    if isinstance(m, GradedPiecesModule):
        if m.hi < hi:
            raise ValueError(f"pieces available on [{m.lo},{m.hi}], need [{lo},{hi}]")
        out = m if lo <= m.lo else m.truncate(lo)
        dims = [out.dim(j) for j in range(lo, hi + 1)]
        mult = {(i, j): mm for (i, j), mm in out.mult.items() if lo <= j < hi}
        return GradedPiecesModule(m.ring, lo, dims, mult)
    return m.pieces(lo, hi)


def koszul_differential_piece(ring: RingSig, M: GradedPiecesModule,
                              k: int, d: int) -> np.ndarray:
    """Matrix of wedge^k W (x) M_d -> wedge^{k-1} W (x) M_{d+1},
    x_T (x) m |-> sum_t (-1)^{pos} x_{T-t} (x) x_t m."""
    v, p = ring.v, ring.p
    src_masks = masks_of_size(v, k)
    tgt_masks = masks_of_size(v, k - 1)
    tgt_index = {m: i for i, m in enumerate(tgt_masks)}
    dim_d, dim_d1 = M.dim(d), M.dim(d + 1)
    A = linalg.zeros(len(tgt_masks) * dim_d1, len(src_masks) * dim_d)
    for si, mask in enumerate(src_masks):
        sign = 1
        mm = mask
        while mm:
            t = (mm & -mm).bit_length() - 1  # smallest index first
            rest = mask & ~(1 << t)
            block = sign * M.mult_map(t, d)
            ti = tgt_index[rest]
            A[ti * dim_d1:(ti + 1) * dim_d1, si * dim_d:(si + 1) * dim_d] = \
                (A[ti * dim_d1:(ti + 1) * dim_d1, si * dim_d:(si + 1) * dim_d]
                 + block) % p
            sign = -sign
            mm &= mm - 1
    return A % p


def koszul_tor(M, i: int, j: int) -> int:
    """dim Tor_i^S(K, M)_j, computed as the middle homology of the Koszul
    three-term complex.  Needs pieces in degrees j-i-1 .. j-i+1; a
    GradedPiecesModule is treated as zero outside its stored range."""
    if isinstance(M, FPModuleS):
        M = M.pieces(j - i - 1, j - i + 1)
    ring = M.ring
    if i < 0 or i > ring.v:
        return 0
    d_in = koszul_differential_piece(ring, M, i + 1, j - i - 1)
    d_out = koszul_differential_piece(ring, M, i, j - i)
    p = ring.p
    middle = comb(ring.v, i) * M.dim(j - i)
    ker = middle - linalg.rank(d_out, p)
    return ker - linalg.rank(d_in, p)


def regularity(M: FPModuleS, hard_limit: int = 20,
               certify: bool = True) -> tuple[int, bool]:
    """Castelnuovo-Mumford regularity estimate with certification.

    Scans r = max{j - i : Tor_i(K, M)_j != 0}, stopping after v+1 empty
    diagonals above the current candidate (a heuristic, not a theorem); the
    certified flag additionally requires the truncation criterion: the
    associated linear E-complex of M_{>= r} is exact right of its start, and
    Tate generator data built from truncations r and r+1 agree.
    """
    ring = M.ring
    v = ring.v
    gen_degs = M.generator_module.gen_degrees
    if not gen_degs:
        return (0, True)
    dmin = min(gen_degs)
    if hard_limit < max(gen_degs):
        raise ValueError("hard_limit below maximal generator degree")
    best = None
    empty_run = 0
    d = dmin
    while d <= hard_limit:
        found = False
        for i in range(0, v + 1):
            if koszul_tor(M, i, d + i):
                found = True
                break
        if found:
            best = d
            empty_run = 0
        else:
            empty_run += 1
            if best is not None and empty_run > v:
                break
        d += 1
    if best is None:
        best = dmin
    certified = False
    if d <= hard_limit and certify:
        certified = _certify_regularity(M, best)
    return (best, certified)


def regularity_scan(M: GradedPiecesModule, lo: int, hi: int) -> int:
    """Uncertified regularity estimate on pieces data: the max nonempty Tor
    diagonal found scanning [lo, hi] with the v+1-gap stopping rule."""
    v = M.ring.v
    best = None
    empty_run = 0
    d = lo
    while d <= hi:
        found = any(koszul_tor(M, i, d + i) for i in range(0, v + 1))
        if found:
            best = d
            empty_run = 0
        else:
            empty_run += 1
            if best is not None and empty_run > v:
                break
        d += 1
    return lo if best is None else best


def _certify_regularity(M: FPModuleS, r: int) -> bool:
    from .bgg import R_module  # local import; bgg builds on this module
    v = M.ring.v
    pieces = M.pieces(r, r + v + 3)
    cx = R_module(pieces.truncate(r), r, r + v + 2)
    for pos in range(r + 1, r + v + 2):
        if not cx.is_exact_at(pos):
            return False
    # Tate column data from truncations r and r+1 agree where both exist
    from .tate import tate_from_module
    lo = r - 1
    t1 = tate_from_module(M, r + 1, lo, r + 2, assume_regular=True, verify=False)
    t2 = tate_from_module(M, r + 2, lo, r + 2, assume_regular=True, verify=False)
    for e in range(lo, r + 3):
        if sorted(t1.complex.term(e).gen_degrees) != \
                sorted(t2.complex.term(e).gen_degrees):
            return False
    return True


def free_module_pieces(ring: RingSig, gen_degrees: tuple[int, ...],
                       lo: int, hi: int) -> GradedPiecesModule:
    """Pieces of a free S-module (used for S itself and its twists)."""
    return FPModuleS.free(ring, gen_degrees).pieces(lo, hi)


def module_hom_space(A: GradedPiecesModule, B: GradedPiecesModule,
                     lo: int, hi: int) -> list[dict[int, np.ndarray]]:
    """Basis of degree-0 module homomorphisms A -> B on the window [lo, hi]:
    families phi_j with phi_{j+1} a_i = b_i phi_j for all i, j."""
    p = A.ring.p
    degs = list(range(lo, hi + 1))
    sizes = {j: B.dim(j) * A.dim(j) for j in degs}
    offset, total = {}, 0
    for j in degs:
        offset[j] = total
        total += sizes[j]
    rows = []
    for j in degs[:-1]:
        for i in range(A.ring.v):
            a = A.mult_map(i, j)
            b = B.mult_map(i, j)
            # phi_{j+1} @ a - b @ phi_j = 0, unknowns vectorized row-major
            na, nb = A.dim(j), B.dim(j)
            na1, nb1 = A.dim(j + 1), B.dim(j + 1)
            blk = linalg.zeros(nb1 * na, total)
            if nb1 and na:
                if na1:
                    # row-major vec: vec(X @ a) = kron(I, a.T) vec(X)
                    M1 = np.kron(np.eye(nb1, dtype=np.int64), a.T)
                    blk[:, offset[j + 1]:offset[j + 1] + sizes[j + 1]] = M1 % p
                if nb:
                    M2 = np.kron(b, np.eye(na, dtype=np.int64))
                    blk[:, offset[j]:offset[j] + sizes[j]] = (-M2) % p
            rows.append(blk)
    if not rows:
        sys_mat = linalg.zeros(0, total)
    else:
        sys_mat = np.concatenate(rows, axis=0) % p
    basis_vecs = linalg.kernel_basis(sys_mat, p)
    out = []
    for k in range(basis_vecs.shape[1]):
        fam = {}
        for j in degs:
            nb, na = B.dim(j), A.dim(j)
            fam[j] = basis_vecs[offset[j]:offset[j] + sizes[j], k].reshape(nb, na)
        out.append(fam)
    return out


def modules_isomorphic(A: GradedPiecesModule, B: GradedPiecesModule,
                       lo: int, hi: int, tries: int = 12,
                       rng_seed: int = 7) -> bool:
    """Isomorphism test over the window: equal Hilbert functions plus an
    invertible degree-0 homomorphism found among random combinations of a
    hom-space basis."""
    if any(A.dim(j) != B.dim(j) for j in range(lo, hi + 1)):
        return False
    homs = module_hom_space(A, B, lo, hi)
    if not homs:
        return all(A.dim(j) == 0 for j in range(lo, hi + 1))
    p = A.ring.p
    import random
    rng = random.Random(rng_seed)
    for _ in range(tries):
        coeffs = [rng.randrange(p) for _ in homs]
        ok = True
        for j in range(lo, hi + 1):
            n = A.dim(j)
            if n == 0:
                continue
            acc = linalg.zeros(B.dim(j), n)
            for c, fam in zip(coeffs, homs):
                acc = (acc + c * fam[j]) % p
            if linalg.rank(acc, p) != n:
                ok = False
                break
        if ok:
            return True
    return False
