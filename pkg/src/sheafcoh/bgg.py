"""The adjoint functor pair between graded S-modules and linear free
E-complexes, on modules and on complexes.

R sends a module given by graded pieces to the linear complex whose term in
cohomological degree d is free of rank dim M_d with generators in internal
degree d + v, the differential being the matrix of linear forms
sum_i mult_i e_i.  L sends a finite-dimensional E-module to the linear
S-complex with S (x) P_j in cohomological degree -j, generators in internal
degree j.  On complexes both functors total a double complex; the vertical
components carry the sign (-1)^(internal degree), and d^2 = 0 is verified
numerically rather than asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .complexes import FreeComplex, GradedFree, GradedMap
from .emodules import EModule, ambient_action, kernel_module, min_gens, \
    injective_resolution, module_of_free
from .rings import Poly, RingSig, masks_of_size, mask_word
from .smodules import GradedPiecesModule, as_pieces


def R_module(M: GradedPiecesModule, lo: int, hi: int) -> FreeComplex:
    """The linear E-complex of a pieces module on window [lo, hi]; needs
    multiplication maps up to degree hi (pieces up to hi+1)."""
    M.check_commutativity()
    ringE = RingSig("E", M.ring.v, M.ring.p)
    terms = {}
    labels = {}
    for d in range(lo, hi + 1):
        terms[d] = GradedFree(ringE, (d + ringE.v,) * M.dim(d))
        labels[d] = [(0, d, M.dim(d))]
    diffs = {}
    for d in range(lo, hi):
        ent = _linear_entries(ringE, [M.mult_map(i, d) for i in range(ringE.v)])
        diffs[d] = GradedMap(terms[d], terms[d + 1], ent)
    return FreeComplex(ringE, terms, diffs, lo, hi, labels)


def _linear_entries(ring: RingSig, mats: list[np.ndarray]):
    def key(i):
        if ring.kind == "E":
            return 1 << i
        exp = [0] * ring.v
        exp[i] = 1
        return tuple(exp)

    rows, cols = mats[0].shape
    z = ring.zero()
    terms: dict[tuple[int, int], dict] = {}
    for i, m in enumerate(mats):
        ki = key(i)
        rr, cc = np.nonzero(m)
        for b, a in zip(rr.tolist(), cc.tolist()):
            terms.setdefault((b, a), {})[ki] = int(m[b, a])
    ent = [[z] * cols for _ in range(rows)]
    for (b, a), t in terms.items():
        ent[b][a] = Poly(ring, t)
    return ent


def L_module(P: EModule, positions: tuple[int, int] | None = None) -> FreeComplex:
    """The linear S-complex of a finite-dimensional E-module.

    Term S (x) P_j sits in cohomological degree -j with generators in
    internal degree j; the differential acts by sum_i x_i (x) e_i."""
    ringS = RingSig("S", P.ring.v, P.ring.p)
    support = P.support()
    if not support:
        return FreeComplex(ringS, {}, {}, 0, 0)
    jlo, jhi = support[0], support[-1]
    terms = {}
    for j in range(jlo, jhi + 1):
        terms[-j] = GradedFree(ringS, (j,) * P.dim(j))
    diffs = {}
    for j in range(jlo + 1, jhi + 1):
        ent = _linear_entries(ringS, [P.act_map(i, j) for i in range(ringS.v)])
        diffs[-j] = GradedMap(terms[-j], terms[-j + 1], ent)
    cx = FreeComplex(ringS, terms, diffs, -jhi, -jlo,
                     bounded_below=True, bounded_above=True)
    if positions is not None:
        lo, hi = positions
        keep_t = {i: t for i, t in terms.items() if lo <= i <= hi}
        keep_d = {i: d for i, d in diffs.items() if lo <= i < hi}
        cx = FreeComplex(ringS, keep_t, keep_d, lo, hi)
    return cx


def inverse_R(cx: FreeComplex, lo: int, hi: int) -> GradedPiecesModule:
    """Read the pieces module back off a linear E-complex whose term at
    position d has all generators in degree d + v (inverse of R_module)."""
    ringE = cx.ring
    v = ringE.v
    ringS = RingSig("S", v, ringE.p)
    dims = []
    for d in range(lo, hi + 1):
        t = cx.term(d)
        if any(g != d + v for g in t.gen_degrees):
            raise ValueError("complex is not in linear normal form")
        dims.append(t.rank)
    mult = {}
    for d in range(lo, hi):
        dmap = cx.diff(d)
        for i in range(v):
            A = linalg.zeros(cx.term(d + 1).rank, cx.term(d).rank)
            for b in range(A.shape[0]):
                for a in range(A.shape[1]):
                    A[b, a] = dmap.entries[b][a].terms.get(1 << i, 0)
            mult[(i, d)] = A % ringE.p
    return GradedPiecesModule(ringS, lo, dims, mult)


@dataclass
class ModuleComplex:
    """A bounded complex of GradedPiecesModule terms with degreewise chain
    maps; the input shape for R on complexes."""

    ring: RingSig
    terms: dict[int, GradedPiecesModule]
    maps: dict[int, dict[int, np.ndarray]]  # maps[i][j]: (M^i)_j -> (M^{i+1})_j
    lo: int
    hi: int

    def term(self, i: int) -> GradedPiecesModule | None:
        return self.terms.get(i)

    def map_piece(self, i: int, j: int) -> np.ndarray:
        src = self.terms.get(i)
        tgt = self.terms.get(i + 1)
        sdim = src.dim(j) if src else 0
        tdim = tgt.dim(j) if tgt else 0
        m = self.maps.get(i, {}).get(j)
        if m is None:
            m = linalg.zeros(tdim, sdim)
        return m

    def verify(self, jlo: int, jhi: int):
        p = self.ring.p
        for i in range(self.lo, self.hi):
            src = self.terms.get(i)
            tgt = self.terms.get(i + 1)
            if src is None or tgt is None:
                continue
            for j in range(jlo, jhi):
                # chain maps commute with multiplication
                for t in range(self.ring.v):
                    a = linalg.matmul(self.map_piece(i, j + 1), src.mult_map(t, j), p)
                    b = linalg.matmul(tgt.mult_map(t, j), self.map_piece(i, j), p)
                    if np.any((a - b) % p):
                        raise ValueError(f"map at {i} not a module map at degree {j}")
            for j in range(jlo, jhi + 1):
                c = linalg.matmul(self.map_piece(i + 1, j), self.map_piece(i, j), p)
                if np.any(c % p):
                    raise ValueError(f"d^2 != 0 at position {i}, degree {j}")

    def homology_module(self, i: int, jlo: int, jhi: int) -> GradedPiecesModule:
        """Subquotient ker/im at position i with induced multiplication."""
        p = self.ring.p
        term = self.terms.get(i)
        basis, reducers, dims = {}, {}, []
        for j in range(jlo, jhi + 1):
            dout = self.map_piece(i, j)
            din = self.map_piece(i - 1, j)
            K = linalg.kernel_basis(dout, p)
            # coordinates of im(din) in the kernel basis
            piv = linalg.kernel_pivots(dout, p)
            imgK = din[piv, :] if K.shape[1] else linalg.zeros(0, din.shape[1])
            red = linalg.Reducer(imgK, p)
            basis[j] = (K, piv)
            reducers[j] = red
            dims.append(len(red.quot))
        mult = {}
        for j in range(jlo, jhi):
            K, piv = basis[j]
            K1, piv1 = basis[j + 1]
            red, red1 = reducers[j], reducers[j + 1]
            nd = len(red.quot)
            for t in range(self.ring.v):
                if nd == 0 or len(red1.quot) == 0:
                    mult[(t, j)] = linalg.zeros(len(red1.quot), nd)
                    continue
                reps = linalg.zeros(K.shape[1], nd)
                for k, r in enumerate(red.quot):
                    reps[r, k] = 1
                vecs = linalg.matmul(K, reps, p) if K.shape[1] else \
                    linalg.zeros(K.shape[0], nd)
                img = linalg.matmul(term.mult_map(t, j) if term else
                                    linalg.zeros(K1.shape[0], K.shape[0]), vecs, p)
                mult[(t, j)] = red1.coords(img[piv1, :])
        return GradedPiecesModule(self.ring, jlo, dims, mult)


def single_term_complex(M: GradedPiecesModule, position: int = 0) -> ModuleComplex:
    return ModuleComplex(M.ring, {position: M}, {}, position, position)


def module_map_cone(f: dict[int, np.ndarray], A: GradedPiecesModule,
                    B: GradedPiecesModule) -> ModuleComplex:
    """The two-term complex A -> B (at positions -1, 0), which is the cone
    of f up to the usual shift."""
    return ModuleComplex(A.ring, {-1: A, 0: B}, {-1: f}, -1, 0)


def R_chain_map_blocks(f: dict[int, np.ndarray], A: GradedPiecesModule,
                       B: GradedPiecesModule, lo: int, hi: int,
                       RA: FreeComplex, RB: FreeComplex) -> dict[int, GradedMap]:
    """R applied to a module map: per-position scalar blocks R(A)^d -> R(B)^d."""
    ringE = RA.ring
    out = {}
    for d in range(lo, hi + 1):
        mat = f.get(d)
        if mat is None:
            mat = linalg.zeros(B.dim(d), A.dim(d))
        ent = [[Poly(ringE, {0: int(mat[r, c])}) if mat[r, c] else ringE.zero()
                for c in range(A.dim(d))] for r in range(B.dim(d))]
        out[d] = GradedMap(RA.term(d), RB.term(d), ent)
    return out


def R_complex(F: ModuleComplex, lo: int, hi: int) -> FreeComplex:
    """Total complex of the R double complex: the block of (F^i)_d sits at
    cohomological position i + d with generators in degree d + v."""
    ringE = RingSig("E", F.ring.v, F.ring.p)
    v = ringE.v
    blocks: dict[int, list] = {}
    for i in range(F.lo, F.hi + 1):
        M = F.term(i)
        if M is None:
            continue
        for d in range(M.lo, M.hi + 1):
            if M.dim(d):
                blocks.setdefault(i + d, []).append((i, d, M.dim(d)))
    if not blocks:
        return FreeComplex(ringE, {}, {}, lo, hi)
    terms, labels = {}, {}
    for k in range(lo, hi + 1):
        bl = sorted(blocks.get(k, []))
        terms[k] = GradedFree(ringE, tuple((d + v) for (_, d, n) in bl
                                           for _ in range(n)))
        labels[k] = bl
    diffs = {}
    z = ringE.zero()
    for k in range(lo, hi):
        src_bl, tgt_bl = labels.get(k, []), labels.get(k + 1, [])
        ent = [[z] * terms[k].rank for _ in range(terms[k + 1].rank)]
        roff = _offsets(tgt_bl)
        coff = _offsets(src_bl)
        for (i, d, n) in src_bl:
            M = F.term(i)
            # horizontal: R-differential within the row of F^i
            if (i, d + 1) in roff:
                sub = _linear_entries(ringE, [M.mult_map(t, d)
                                              for t in range(v)])
                _paste(ent, sub, roff[(i, d + 1)], coff[(i, d)])
            # vertical: the chain map of F, with sign (-1)^d
            if (i + 1, d) in roff:
                A = F.map_piece(i, d)
                sgn = -1 if d % 2 else 1
                sub = [[Poly(ringE, {0: sgn * int(A[b, a])}) if A[b, a] else z
                        for a in range(A.shape[1])] for b in range(A.shape[0])]
                _paste(ent, sub, roff[(i + 1, d)], coff[(i, d)])
        diffs[k] = GradedMap(terms[k], terms[k + 1], ent)
    return FreeComplex(ringE, terms, diffs, lo, hi, labels)


def _offsets(blocks):
    out = {}
    pos = 0
    for (i, d, n) in blocks:
        out[(i, d)] = pos
        pos += n
    return out


def _paste(ent, sub, r0, c0):
    for r, row in enumerate(sub):
        for c, e in enumerate(row):
            if not e.is_zero():
                ent[r0 + r][c0 + c] = ent[r0 + r][c0 + c] + e


def L_complex(G: FreeComplex, positions: tuple[int, int] | None = None) -> FreeComplex:
    """Total complex of the L double complex of a complex of free E-modules:
    the block S (x) (G^i)_j sits at position i - j with generators in
    internal degree j."""
    ringE = G.ring
    v = ringE.v
    ringS = RingSig("S", v, ringE.p)
    blocks: dict[int, list] = {}
    emods = {}
    for i in G.positions():
        t = G.term(i)
        if not t.rank:
            continue
        emods[i] = module_of_free(t)
        sup = t.support()
        for j in range(sup[0], sup[1] + 1):
            n = t.piece_dim(j)
            if n:
                blocks.setdefault(i - j, []).append((i, j, n))
    if not blocks:
        return FreeComplex(ringS, {}, {}, 0, 0)
    klo = min(blocks)
    khi = max(blocks)
    full = (klo, khi)
    if positions is not None:
        klo, khi = positions
    terms, labels = {}, {}
    for k in range(klo, khi + 1):
        bl = sorted(blocks.get(k, []))
        terms[k] = GradedFree(ringS, tuple(j for (_, j, n) in bl
                                           for _ in range(n)))
        labels[k] = bl
    diffs = {}
    z = ringS.zero()
    for k in range(klo, khi):
        src_bl, tgt_bl = labels.get(k, []), labels.get(k + 1, [])
        ent = [[z] * terms[k].rank for _ in range(terms[k + 1].rank)]
        roff = _offsets(tgt_bl)
        coff = _offsets(src_bl)
        for (i, j, n) in src_bl:
            # horizontal: L-differential x_t (x) e_t within L(G^i)
            if (i, j - 1) in roff:
                P = emods[i]
                sub = _linear_entries(ringS, [P.act_map(t, j)
                                              for t in range(v)])
                _paste(ent, sub, roff[(i, j - 1)], coff[(i, j)])
            # vertical: degreewise piece of d_G with sign (-1)^j
            if (i + 1, j) in roff:
                A = G.diff(i).degreewise_piece(j)
                sgn = -1 if j % 2 else 1
                sub = [[Poly(ringS, {(0,) * v: sgn * int(A[b, a])})
                        if A[b, a] else z
                        for a in range(A.shape[1])] for b in range(A.shape[0])]
                _paste(ent, sub, roff[(i + 1, j)], coff[(i, j)])
        diffs[k] = GradedMap(terms[k], terms[k + 1], ent)
    return FreeComplex(ringS, terms, diffs, klo, khi, labels,
                       bounded_below=klo <= full[0],
                       bounded_above=khi >= full[1])


def acyclicity_check(M, d: int, depth: int) -> bool:
    """True when the linear E-complex of M_{>= d} is exact at positions
    d+1 .. d+depth (the truncation criterion for d-regularity)."""
    pieces = as_pieces(M, d, d + depth + 2)
    cx = R_module(pieces.truncate(d), d, d + depth + 1)
    return all(cx.is_exact_at(pos) for pos in range(d + 1, d + depth + 1))


@dataclass
class LRData:
    complex: FreeComplex
    counit_positions: dict  # block offsets of the position-0 socle blocks


def LR_resolution(M: GradedPiecesModule, lo: int, hi: int,
                  positions: tuple[int, int] | None = None) -> FreeComplex:
    """L applied to the R-complex of M on [lo, hi]: a (window of a) free
    resolution of M surjecting onto it; H^0 has the Hilbert function of M on
    the window interior."""
    return L_complex(R_module(M, lo, hi), positions)


def irredundancy_test(P: EModule) -> tuple[bool, bool]:
    """(generated in top degree, additionally linearly copresented).

    The second flag asks that the minimal injective resolution start with
    two terms whose generator degrees are concentrated and consecutive,
    which is the dual form of linear presentation."""
    support = P.support()
    if not support:
        return (True, True)
    top = support[-1]
    gens = min_gens(P)
    first = all(g == top for g, _ in gens)
    if not first:
        return (False, False)
    I = injective_resolution(P, 1)
    g0 = set(I.term(I.lo).gen_degrees)
    g1 = set(I.term(I.lo + 1).gen_degrees)
    linear = len(g0) <= 1 and len(g1) <= 1 and \
        (not g1 or not g0 or list(g1)[0] == list(g0)[0] + 1)
    return (True, linear)


# ---------------------------------------------------------------------------
# adjunction transfer
#
# A chain map L(P) -> M and a chain map P -> R(M), for P a bounded complex
# of free E-modules and M a one-term module in cohomological degree 0, are
# both determined by the same bigraded core: K-linear maps
# f_i : (P^i)_i -> M_i.  The chain condition, read off the degree-(i+1)
# sources of L(P)^{-1}, is
#
#     sum_t mult_t . f_i . (e_t . -)  +  (-1)^{i+1} f_{i+1} . (d_P piece) = 0
#
# on (P^i)_{i+1}, matching the vertical sign used by L_complex/R_complex.
# ---------------------------------------------------------------------------

def _core_layout(P: FreeComplex, M: GradedPiecesModule):
    sizes, offsets = {}, {}
    total = 0
    for i in P.positions():
        sizes[i] = M.dim(i) * P.term(i).piece_dim(i)
        offsets[i] = total
        total += sizes[i]
    return sizes, offsets, total


def adjunction_condition_matrix(P: FreeComplex, M: GradedPiecesModule) -> np.ndarray:
    """Constraint matrix whose kernel (row-major vectorized cores) is the
    space of valid adjoint pairs.

    Built directly from the realized total complex L(P): the induced map
    must kill the generator columns of L(P)^{-1}, and since everything is
    S-linear those conditions generate all of Phi o d = 0."""
    from .rings import exponents_of_degree
    p = M.ring.p
    v = P.ring.v
    sizes, offsets, total = _core_layout(P, M)
    LP = L_complex(P)
    if -1 not in LP.terms or 0 not in LP.terms:
        return linalg.zeros(0, total)
    blocks0 = LP.labels.get(0, [])
    blocks1 = LP.labels.get(-1, [])
    if not P.bounded_above:
        # on a right-truncated window the block (hi, hi+1) would constrain a
        # core block beyond the window; its condition is not meaningful
        blocks1 = [b for b in blocks1 if b[0] < P.hi]
    rows = []
    src_free = LP.term(-1)
    for (i, j, n) in blocks1:
        # generator columns of the block S (x) (P^i)_{i+1}; their internal
        # degree is j = i + 1
        t = j
        dpiece = LP.diff(-1).degreewise_piece(t)
        sidx = src_free.piece_index(t)
        tgt_free = LP.term(0)
        tb = tgt_free.piece_basis(t)
        goff = sum(nn for (_, _, nn) in blocks1[:blocks1.index((i, j, n))])
        tgt_offsets = {}
        acc_off = 0
        for (i0, j0, n0) in blocks0:
            tgt_offsets[(i0, j0)] = (acc_off, n0)
            acc_off += n0
        for q in range(n):
            col = dpiece[:, sidx[(goff + q, (0,) * v)]]
            blk = linalg.zeros(M.dim(t), total)
            nz = np.nonzero(col)[0]
            for slot in nz:
                gen_global, alpha = tb[slot]
                # locate the block (i0, i0) owning this generator
                run = 0
                for (i0, j0, n0) in blocks0:
                    if run <= gen_global < run + n0:
                        q0 = gen_global - run
                        c = int(col[slot])
                        mm = (c * M.mult_monomial(alpha, i0)) % p
                        # unknown column q0 of core[i0]
                        ncols = P.term(i0).piece_dim(i0)
                        for r in range(M.dim(i0)):
                            blk[:, offsets[i0] + r * ncols + q0] = \
                                (blk[:, offsets[i0] + r * ncols + q0]
                                 + mm[:, r]) % p
                        break
                    run += n0
            rows.append(blk)
    if not rows:
        return linalg.zeros(0, total)
    return np.concatenate(rows, axis=0) % p


def core_from_vector(P: FreeComplex, M: GradedPiecesModule, vec) -> dict[int, np.ndarray]:
    sizes, offsets, total = _core_layout(P, M)
    v = np.asarray(vec, dtype=np.int64).ravel()
    out = {}
    for i in P.positions():
        n = P.term(i).piece_dim(i)
        out[i] = v[offsets[i]:offsets[i] + sizes[i]].reshape(M.dim(i), n)
    return out


def counit_core(RM: FreeComplex, M: GradedPiecesModule) -> dict[int, np.ndarray]:
    """Core of the canonical map LR(M) -> M adjoint to the identity: the
    socle block of R(M)^i identified with M_i up to a scalar per block; the
    scalars (alternating signs of the total-complex convention) are solved
    for, normalized to +1 at the left edge."""
    p = M.ring.p
    for i in RM.positions():
        if RM.term(i).piece_dim(i) != M.dim(i):
            raise ValueError("complex is not R(M) on this window")
    cond = adjunction_condition_matrix(RM, M)
    positions = [i for i in RM.positions()]
    cols = []
    for i in positions:
        core = {k: (linalg.identity(RM.term(k).piece_dim(k)) if k == i else
                    linalg.zeros(M.dim(k), RM.term(k).piece_dim(k)))
                for k in positions}
        cols.append(core_to_vector(RM, M, core))
    small = linalg.matmul(cond, np.stack(cols, axis=1), p) if cond.size else \
        linalg.zeros(0, len(cols))
    sols = linalg.kernel_basis(small, p)
    pick = None
    for k in range(sols.shape[1]):
        if sols[0, k] % p:
            pick = (sols[:, k] * linalg.inv_mod(int(sols[0, k]), p)) % p
            break
    if pick is None:
        raise ValueError("no scalar-block counit exists; window too small")
    return {i: (int(pick[t]) * linalg.identity(RM.term(i).piece_dim(i))) % p
            for t, i in enumerate(positions)}


def core_to_vector(P: FreeComplex, M: GradedPiecesModule, core) -> np.ndarray:
    sizes, offsets, total = _core_layout(P, M)
    vec = linalg.zeros(total, 1)[:, 0]
    for i in P.positions():
        block = np.asarray(core[i], dtype=np.int64).ravel()
        if block.size:
            vec[offsets[i]:offsets[i] + sizes[i]] = block % M.ring.p
    return vec


def _tau(i: int) -> int:
    """Convention sign (-1)^{i(i+1)/2} mediating between the evaluation
    formula psi(q) = [x -> f(x q)] and the total-complex differentials."""
    return -1 if (i * (i + 1) // 2) % 2 else 1


def realize_chain_map_to_R(P: FreeComplex, M: GradedPiecesModule,
                           core: dict[int, np.ndarray], lo: int, hi: int):
    """Chain map psi : P -> R(M) realized as degreewise matrices
    psi[i][j] : (P^i)_j -> (R(M)^i)_j, from psi(q) = tau_i [x -> f(x q)]."""
    from .rings import merge_sign
    ringE = P.ring
    v, p = ringE.v, ringE.p
    RM = R_module(M, lo, hi)
    psi: dict[int, dict[int, np.ndarray]] = {}
    top = (1 << v) - 1
    Pmods = {i: module_of_free(P.term(i)) for i in P.positions()}
    for i in P.positions():
        if not (lo <= i <= hi):
            continue
        src = P.term(i)
        tgt = RM.term(i)
        psi[i] = {}
        sup = src.support()
        if sup is None:
            continue
        f = core[i]
        for j in range(sup[0], sup[1] + 1):
            sb = src.piece_basis(j)
            tb = tgt.piece_basis(j)
            A = linalg.zeros(len(tb), len(sb))
            if len(sb) and len(tb):
                tidx = tgt.piece_index(j)
                # target slots are (b, mu) with |mu| = i + v - j
                for mu in masks_of_size(v, i + v - j):
                    comp = top ^ mu
                    sgn = _tau(i) * merge_sign(comp, mu)
                    # f(e_comp . q) for all source basis vectors q
                    img = Pmods[i].act_monomial(comp, j, linalg.identity(len(sb)))
                    vals = (sgn * linalg.matmul(f, img, p)) % p
                    for b in range(M.dim(i)):
                        A[tidx[(b, mu)], :] = vals[b, :]
            psi[i][j] = A
    return RM, psi


def verify_chain_map_to_R(P: FreeComplex, RM: FreeComplex, psi,
                          lo: int, hi: int) -> bool:
    p = P.ring.p
    for i in range(max(P.lo, lo), min(P.hi, hi)):
        src = P.term(i)
        sup = src.support()
        if sup is None:
            continue
        for j in range(sup[0], sup[1] + 1):
            a = linalg.matmul(RM.diff(i).degreewise_piece(j), psi[i][j], p)
            fallback = linalg.zeros(RM.term(i + 1).piece_dim(j),
                                    P.term(i + 1).piece_dim(j))
            b = linalg.matmul(psi[i + 1].get(j, fallback),
                              P.diff(i).degreewise_piece(j), p)
            if np.any((a - b) % p):
                return False
    return True


def realize_chain_map_to_module(P: FreeComplex, M: GradedPiecesModule,
                                core: dict[int, np.ndarray],
                                tlo: int, thi: int):
    """Chain map L(P) -> M as degreewise matrices Phi[t] on the position-0
    term of L(P); x^alpha (x) q in the (i, i) block maps to x^alpha f_i(q)."""
    from .rings import exponents_of_degree
    LP = L_complex(P)
    p = M.ring.p
    v = P.ring.v
    Phi = {}
    for t in range(tlo, thi + 1):
        blocks = LP.labels.get(0, [])
        cols = LP.term(0).piece_dim(t)
        A = linalg.zeros(M.dim(t), cols)
        sidx = LP.term(0).piece_index(t)
        off = 0
        for (i, j, n) in blocks:
            # block generators have internal degree j = i
            if M.dim(i):
                for q in range(n):
                    for alpha in exponents_of_degree(v, t - i):
                        img = linalg.matmul(M.mult_monomial(alpha, i),
                                            core[i][:, q].reshape(-1, 1), p)
                        A[:, sidx[(off + q, alpha)]] = img[:, 0]
            off += n
        Phi[t] = A % p
    return LP, Phi


def verify_chain_map_to_module(LP: FreeComplex, M: GradedPiecesModule, Phi,
                               tlo: int, thi: int) -> bool:
    """Phi kills the image of d^{-1} and intertwines multiplication."""
    p = M.ring.p
    for t in range(tlo, thi + 1):
        d = LP.diff(-1).degreewise_piece(t)
        if d.size and np.any(linalg.matmul(Phi[t], d, p)):
            return False
    # multiplication compatibility
    for t in range(tlo, thi):
        for i_var in range(M.ring.v):
            # x_i acts on the free S-module by shifting monomial slots
            src = LP.term(0)
            sb = src.piece_basis(t)
            tidx = src.piece_index(t + 1)
            shift = linalg.zeros(src.piece_dim(t + 1), len(sb))
            for k, (g, alpha) in enumerate(sb):
                beta = list(alpha)
                beta[i_var] += 1
                shift[tidx[(g, tuple(beta))], k] = 1
            a = linalg.matmul(Phi[t + 1], shift, p)
            b = linalg.matmul(M.mult_map(i_var, t), Phi[t], p)
            if np.any((a - b) % p):
                return False
    return True


def extract_core_from_R_map(P: FreeComplex, M: GradedPiecesModule,
                            psi) -> dict[int, np.ndarray]:
    """Evaluate at the identity of E: the socle slots (b, top) of
    (R(M)^i)_i recover f_i."""
    v = P.ring.v
    top = (1 << v) - 1
    out = {}
    for i in P.positions():
        n = P.term(i).piece_dim(i)
        A = psi[i].get(i, linalg.zeros(M.dim(i), n))
        ringE = P.ring
        RMterm = GradedFree(ringE, (i + v,) * M.dim(i))
        tidx = RMterm.piece_index(i)
        rows = [tidx[(b, top)] for b in range(M.dim(i))]
        out[i] = (_tau(i) * A[rows, :]) % P.ring.p if rows else \
            linalg.zeros(0, n)
    return out


def extract_core_from_module_map(P: FreeComplex, M: GradedPiecesModule,
                                 LP: FreeComplex, Phi) -> dict[int, np.ndarray]:
    """Restrict to the constant-monomial columns of each (i, i) block."""
    v = P.ring.v
    zero_exp = (0,) * v
    out = {}
    blocks = LP.labels.get(0, [])
    src = LP.term(0)
    for i in P.positions():
        n = P.term(i).piece_dim(i)
        out[i] = linalg.zeros(M.dim(i), n)
    off = 0
    for (i, j, n) in blocks:
        sidx = src.piece_index(i)
        cols = [sidx[(off + q, zero_exp)] for q in range(n)]
        out[i] = Phi[i][:, cols] if M.dim(i) else out[i]
        off += n
    return out
