"""Finitely generated graded E-modules and their minimal resolutions.

An EModule stores finite-dimensional graded pieces plus the action maps
e_i : P_j -> P_{j-1}.  Modules arising as kernels inside a free module also
keep the embedding (ambient free module, per-degree basis columns in reduced
column echelon form, pivot rows), which makes coordinate extraction a row
selection.  Everything is degreewise linear algebra; resolutions are minimal
by construction because each step covers a kernel that sits inside the
maximal ideal times the cover.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import linalg
from .complexes import FreeComplex, GradedFree, GradedMap, polycol_from_vector
from .rings import RingSig, masks_of_size, mask_word, merge_sign, Poly


@lru_cache(maxsize=None)
def ambient_action_table(ring: RingSig, gen_degrees: tuple[int, ...], i: int,
                         j: int):
    """Index/sign arrays describing e_i * (-) : F_j -> F_{j-1} on the
    monomial basis of a free E-module."""
    F = GradedFree(ring, gen_degrees)
    src = F.piece_basis(j)
    tidx = F.piece_index(j - 1)
    src_idx, tgt_idx, signs = [], [], []
    bit = 1 << i
    for k, (g, mask) in enumerate(src):
        if mask & bit:
            continue
        s = merge_sign(bit, mask)
        src_idx.append(k)
        tgt_idx.append(tidx[(g, mask | bit)])
        signs.append(s)
    return (np.array(src_idx, dtype=np.int64),
            np.array(tgt_idx, dtype=np.int64),
            np.array(signs, dtype=np.int64))


def ambient_action(F: GradedFree, i: int, j: int, vecs) -> np.ndarray:
    """Apply e_i to columns of vecs (coordinates in F_j)."""
    V = np.asarray(vecs, dtype=np.int64)
    if V.ndim == 1:
        V = V.reshape(-1, 1)
    out = linalg.zeros(F.piece_dim(j - 1), V.shape[1])
    src, tgt, signs = ambient_action_table(F.ring, F.gen_degrees, i, j)
    if src.size:
        np.add.at(out, tgt, (signs[:, None] * V[src]) % F.ring.p)
        out %= F.ring.p
    return out


@dataclass
class EModule:
    """Graded E-module by pieces; optionally a concrete submodule of a free
    module (ambient/basis/pivots all set)."""

    ring: RingSig
    dims: dict[int, int]
    act: dict[tuple[int, int], np.ndarray]
    ambient: GradedFree | None = None
    basis: dict[int, np.ndarray] = field(default_factory=dict)
    pivots: dict[int, list[int]] = field(default_factory=dict)

    def dim(self, j: int) -> int:
        return self.dims.get(j, 0)

    def support(self) -> list[int]:
        return sorted(j for j, d in self.dims.items() if d)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def act_map(self, i: int, j: int) -> np.ndarray:
        m = self.act.get((i, j))
        if m is None:
            m = linalg.zeros(self.dim(j - 1), self.dim(j))
        return m

    def act_monomial(self, mask: int, j: int, vecs) -> np.ndarray:
        """Apply the monomial e_mask (factors from the largest index first,
        i.e. e_mask * w computed as nested left multiplications)."""
        V = np.asarray(vecs, dtype=np.int64)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        cur = j
        idx = [t for t in range(self.ring.v) if mask & (1 << t)]
        for t in reversed(idx):
            V = linalg.matmul(self.act_map(t, cur), V, self.ring.p)
            cur -= 1
        return V

    def check_closure(self):
        """e_i e_k + e_k e_i = 0 and e_i^2 = 0 as composed action maps."""
        p = self.ring.p
        for j in self.support():
            for i in range(self.ring.v):
                for k in range(i + 1):
                    a = linalg.matmul(self.act_map(i, j - 1), self.act_map(k, j), p)
                    b = linalg.matmul(self.act_map(k, j - 1), self.act_map(i, j), p)
                    if np.any((a + b) % p):
                        raise ValueError(f"action maps violate e_{i} e_{k} "
                                         f"skew-commutation at degree {j}")

    def ambient_vector(self, j: int, coords) -> np.ndarray:
        if self.ambient is None:
            raise ValueError("abstract module has no ambient embedding")
        return linalg.matmul(self.basis[j], np.asarray(coords).reshape(-1, 1),
                             self.ring.p)[:, 0]


def module_of_free(F: GradedFree) -> EModule:
    """A free module regarded as an EModule with identity embedding."""
    ring = F.ring
    dims, act, basis, pivots = {}, {}, {}, {}
    if F.rank:
        lo = min(F.gen_degrees) - ring.v
        hi = max(F.gen_degrees)
        for j in range(lo, hi + 1):
            d = F.piece_dim(j)
            if d:
                dims[j] = d
                basis[j] = linalg.identity(d)
                pivots[j] = list(range(d))
        for j in range(lo, hi + 1):
            if dims.get(j):
                for i in range(ring.v):
                    act[(i, j)] = ambient_action(F, i, j,
                                                 linalg.identity(dims[j]))
    return EModule(ring, dims, act, F, basis, pivots)


def kernel_module(f: GradedMap) -> EModule:
    """Degreewise kernel of a map of free E-modules, as a concrete submodule
    of the source."""
    F = f.source
    ring = f.ring
    mats = {}
    sup = F.support()
    if sup is not None:
        for j in range(sup[0], sup[1] + 1):
            mats[j] = f.degreewise_piece(j)
    return kernel_of_piece_maps(F, mats)


def kernel_of_piece_maps(F: GradedFree, mats: dict[int, np.ndarray]) -> EModule:
    """Kernel of arbitrary degreewise K-linear maps out of a free module."""
    ring = F.ring
    p = ring.p
    dims, basis, pivots = {}, {}, {}
    sup = F.support()
    degs = [] if sup is None else list(range(sup[0], sup[1] + 1))
    for j in degs:
        A = mats.get(j)
        if A is None:
            A = linalg.zeros(0, F.piece_dim(j))
        B = linalg.kernel_basis(A, p)
        if B.shape[1]:
            dims[j] = B.shape[1]
            basis[j] = B
            pivots[j] = linalg.kernel_pivots(A, p)
    act = {}
    rng = np.random.default_rng(20231115)
    for j in degs:
        if not dims.get(j):
            continue
        for i in range(ring.v):
            img = ambient_action(F, i, j, basis[j])
            if dims.get(j - 1):
                coords = img[pivots[j - 1], :]
                # closure check by random projection (cheap, exact up to
                # probability ~ p^-2 per degree)
                for _ in range(2):
                    u = rng.integers(0, p, size=(1, img.shape[0]))
                    lhs = linalg.matmul(linalg.matmul(u, basis[j - 1], p),
                                        coords, p)
                    rhs = linalg.matmul(u, img, p)
                    if np.any((lhs - rhs) % p):
                        raise ValueError("kernel not closed under the action")
                act[(i, j)] = coords
            elif np.any(img % p):
                raise ValueError("kernel not closed under the action")
    return EModule(ring, dims, act, F, basis, pivots)


def quotient_module(f: GradedMap) -> EModule:
    """Cokernel of a map of free E-modules, as an abstract EModule."""
    G = f.target
    ring = f.ring
    p = ring.p
    sup = G.support()
    degs = [] if sup is None else list(range(sup[0], sup[1] + 1))
    reducers = {}
    dims = {}
    for j in degs:
        red = linalg.Reducer(f.degreewise_piece(j), p)
        reducers[j] = red
        if red.quot:
            dims[j] = len(red.quot)
    act = {}
    for j in degs:
        if not dims.get(j):
            continue
        if not dims.get(j - 1):
            continue
        red_j, red_j1 = reducers[j], reducers[j - 1]
        reps = linalg.zeros(G.piece_dim(j), dims[j])
        for k, r in enumerate(red_j.quot):
            reps[r, k] = 1
        for i in range(ring.v):
            act[(i, j)] = red_j1.coords(ambient_action(G, i, j, reps))
    return EModule(ring, dims, act)


def dual_module(P: EModule) -> EModule:
    """Hom_K(P, K) with the transpose action: (e_i f)(x) = f(e_i x)."""
    dims = {-j: d for j, d in P.dims.items() if d}
    act = {}
    for j in dims:
        if dims.get(j - 1):
            for i in range(P.ring.v):
                act[(i, j)] = P.act_map(i, -j + 1).T % P.ring.p
    return EModule(P.ring, dims, act)


def k_module(ring: RingSig, degree: int = 0) -> EModule:
    return EModule(ring, {degree: 1}, {})


def power_of_max_ideal(ring: RingSig, j: int) -> EModule:
    """m^j inside the rank-one free module E (generator in degree 0)."""
    F = GradedFree(ring, (0,))
    mats = {}
    for w in range(0, ring.v + 1):
        deg = -w
        d = F.piece_dim(deg)
        if w >= j:
            mats[deg] = linalg.zeros(0, d)     # full piece survives
        else:
            mats[deg] = linalg.identity(d)     # killed: kernel of identity = 0
    return kernel_of_piece_maps(F, mats)


def omega_mod_power(ring: RingSig, i: int) -> EModule:
    """omega_E / m^{v-i} omega_E: quotient of the rank-one free module with
    generator degree v by word length >= v-i; pieces in degrees i+1..v."""
    v = ring.v
    cut = v - i
    dims, act = {}, {}
    for w in range(0, cut):
        dims[v - w] = len(masks_of_size(v, w))
    for w in range(0, cut):
        j = v - w
        if not dims.get(j - 1):
            continue
        src_masks = masks_of_size(v, w)
        tgt_masks = masks_of_size(v, w + 1)
        tidx = {m: k for k, m in enumerate(tgt_masks)}
        for i_var in range(v):
            A = linalg.zeros(len(tgt_masks), len(src_masks))
            bit = 1 << i_var
            for c, m in enumerate(src_masks):
                if m & bit:
                    continue
                A[tidx[m | bit], c] = merge_sign(bit, m) % ring.p
            act[(i_var, j)] = A
    return EModule(ring, dims, act)


def min_gens(P: EModule) -> list[tuple[int, np.ndarray]]:
    """Basis of P/mP as (degree, coordinate vector in P_degree), sorted by
    degree then index; the vectors are standard basis vectors picked by the
    deterministic cokernel row selection."""
    p = P.ring.p
    out = []
    for j in sorted(d for d, n in P.dims.items() if n):
        if P.dim(j + 1):
            stacked = np.concatenate(
                [P.act_map(i, j + 1) for i in range(P.ring.v)], axis=1) % p
        else:
            stacked = linalg.zeros(P.dim(j), 0)
        for idx in linalg.coker_basis(stacked, p):
            vec = linalg.zeros(P.dim(j), 1)[:, 0]
            vec[idx] = 1
            out.append((j, vec))
    return out


@dataclass
class Resolution:
    """A (piece of a) minimal free resolution ... -> F^{-1} -> F^0 with the
    augmentation F^0 ->> P kept as degreewise matrices."""

    complex: FreeComplex
    cover: dict[int, np.ndarray]
    module: EModule

    def term(self, k: int) -> GradedFree:
        return self.complex.term(k)


def cover_of(P: EModule) -> tuple[GradedFree, dict[int, np.ndarray]]:
    """Minimal free cover F^0 ->> P; returns the free module and the
    degreewise matrices of the cover map."""
    ring = P.ring
    gens = min_gens(P)
    F0 = GradedFree(ring, tuple(g for g, _ in gens))
    sup = F0.support()
    cover = {}
    if sup is None:
        return F0, cover
    for j in range(sup[0], sup[1] + 1):
        pb = F0.piece_basis(j)
        A = linalg.zeros(P.dim(j), len(pb))
        for col, (t, mask) in enumerate(pb):
            gdeg, vec = gens[t]
            img = P.act_monomial(mask, gdeg, vec)
            A[:, col] = img[:, 0]
        cover[j] = A
    return F0, cover


def _gens_as_map(gens, source_free: GradedFree, target_free: GradedFree,
                 to_ambient) -> GradedMap:
    """Polynomial matrix whose column t is the target-module vector of the
    t-th generator."""
    ring = source_free.ring
    z = ring.zero()
    ent = [[z] * source_free.rank for _ in range(target_free.rank)]
    for t, (gdeg, vec) in enumerate(gens):
        amb = to_ambient(gdeg, vec)
        for r, poly in enumerate(polycol_from_vector(target_free, gdeg, amb)):
            ent[r][t] = poly
    return GradedMap(source_free, target_free, ent)


def free_resolution(P: EModule, steps: int) -> Resolution:
    """Minimal free resolution F^{-steps} -> ... -> F^0 with augmentation
    onto P.  Each differential has entries in the maximal ideal.

    For a concrete P the kernel at every step is taken from the degreewise
    pieces of an actual polynomial matrix (the augmentation composed with
    the ambient inclusion), which keeps the linear algebra batched."""
    ring = P.ring
    gens0 = min_gens(P)
    F0 = GradedFree(ring, tuple(g for g, _ in gens0))
    terms = {0: F0}
    diffs: dict[int, GradedMap] = {}
    if P.ambient is not None:
        aug = _gens_as_map(gens0, F0, P.ambient, P.ambient_vector)
        cur_kernel = kernel_module(aug)
        cover = None
    else:
        _, cover = cover_of(P)
        cur_kernel = kernel_of_piece_maps(F0, cover)
    prev = F0
    for k in range(1, steps + 1):
        gens = min_gens(cur_kernel)
        Fk = GradedFree(ring, tuple(g for g, _ in gens))
        diffs[-k] = _gens_as_map(gens, Fk, prev, cur_kernel.ambient_vector)
        terms[-k] = Fk
        if k < steps:
            # the cover is minimal, so ker(differential) = ker(cover)
            cur_kernel = kernel_module(diffs[-k])
        prev = Fk
    cx = FreeComplex(ring, terms, diffs, -steps, 0, bounded_above=True)
    return Resolution(cx, cover, P)


def injective_resolution(P: EModule, steps: int) -> FreeComplex:
    """Minimal injective resolution P -> I^0 -> I^1 -> ..., built as the
    K-dual of the minimal free resolution of the K-dual module."""
    res = free_resolution(dual_module(P), steps)
    return res.complex.dualize()


def cartan_resolution(ring: RingSig, steps: int) -> FreeComplex:
    """Minimal free resolution of K over E; the k-th free module is
    (Sym_k W)* (x) E with generators in degree -k."""
    from .rings import exponents_of_degree
    terms = {}
    diffs = {}
    z = ring.zero()
    gens_by_step = {}
    for k in range(steps + 1):
        exps = exponents_of_degree(ring.v, k)
        gens_by_step[k] = exps
        terms[-k] = GradedFree(ring, (-k,) * len(exps))
    for k in range(1, steps + 1):
        src = gens_by_step[k]
        tgt = gens_by_step[k - 1]
        tidx = {e: i for i, e in enumerate(tgt)}
        ent = [[z] * len(src) for _ in range(len(tgt))]
        for c, alpha in enumerate(src):
            for i in range(ring.v):
                if alpha[i] == 0:
                    continue
                beta = list(alpha)
                beta[i] -= 1
                ent[tidx[tuple(beta)]][c] = ring.variable(i)
        diffs[-k] = GradedMap(terms[-k], terms[-k + 1], ent)
    return FreeComplex(ring, terms, diffs, -steps, 0, bounded_above=True)


def ext_E_K(P: EModule, k: int, j: int) -> int:
    """dim Ext_E^k(K, P)_j via Hom from the Cartan resolution into P.

    A homomorphism of internal degree j sends a generator of degree -k to an
    element of P_{j-k}."""
    ring = P.ring
    cx = cartan_resolution(ring, k + 1)

    def hom_dim(step: int) -> int:
        return cx.term(-step).rank * P.dim(j - step)

    def delta(step: int) -> np.ndarray:
        """Hom(F^{-step}, P)_j -> Hom(F^{-step-1}, P)_j, phi -> phi o d."""
        d = cx.diffs.get(-step - 1)
        rows = cx.term(-step - 1).rank * P.dim(j - step - 1)
        cols = cx.term(-step).rank * P.dim(j - step)
        A = linalg.zeros(rows, cols)
        if d is None or rows == 0 or cols == 0:
            return A
        nP1, nP = P.dim(j - step - 1), P.dim(j - step)
        for beta in range(d.source.rank):
            for gamma in range(d.target.rank):
                poly = d.entries[gamma][beta]
                if poly.is_zero():
                    continue
                blk = linalg.zeros(nP1, nP)
                for mask, cf in poly.terms.items():
                    i_var = mask.bit_length() - 1
                    blk = (blk + cf * P.act_map(i_var, j - step)) % ring.p
                A[beta * nP1:(beta + 1) * nP1, gamma * nP:(gamma + 1) * nP] = blk
        return A

    d_out = delta(k)
    ker = hom_dim(k) - linalg.rank(d_out, ring.p)
    if k == 0:
        return ker
    d_in = delta(k - 1)
    return ker - linalg.rank(d_in, ring.p)


def linear_part_oracle(F: FreeComplex) -> FreeComplex:
    """Reassemble the linear part of a minimal free complex from the
    connecting homomorphisms of the extension 0 -> V -> E/(V)^2 -> K -> 0
    tensored with F.  Must agree with complexes.linear_part entry for entry.
    """
    if not F.is_minimal():
        raise ValueError("oracle requires a minimal complex")
    ring = F.ring
    z = ring.zero()
    diffs = {}
    for i in range(F.lo, F.hi):
        src, tgt = F.term(i), F.term(i + 1)
        ent = [[z] * src.rank for _ in range(tgt.rank)]
        for a in sorted(set(src.gen_degrees)):
            piece = F.diff(i).degreewise_piece(a)
            sidx = src.piece_index(a)
            tb = tgt.piece_basis(a)
            for c in range(src.rank):
                if src.gen_degrees[c] != a:
                    continue
                col = piece[:, sidx[(c, 0)]]
                # reduce modulo (V)^2: keep only word-length <= 1 slots
                for row_i, (r, mask) in enumerate(tb):
                    val = int(col[row_i])
                    if val == 0:
                        continue
                    w = mask_word(mask)
                    if w == 0:
                        raise ValueError("unit entry in a minimal complex")
                    if w == 1:
                        ent[r][c] = ent[r][c] + Poly(ring, {mask: val})
        diffs[i] = GradedMap(src, tgt, ent)
    return FreeComplex(ring, dict(F.terms), diffs, F.lo, F.hi)


def lin_module(P: EModule) -> EModule:
    """Cokernel of the linear part of a minimal presentation of P."""
    res = free_resolution(P, 1)
    d = res.complex.diffs[-1]
    return quotient_module(d.linear_part())


def t_family_check(P: EModule, depth: int) -> tuple[int | None, list[int]]:
    """Hilbert-function consequence of the one-parameter degeneration from a
    module to the cokernel of the linear part of its presentation: for a
    sufficiently deep syzygy N, dim N_j = dim lin_module(N)_j for all j.

    Returns (onset depth or None, list of depths that already agree)."""
    res = free_resolution(P, depth + 1)
    agree = []
    for k in range(1, depth + 1):
        # k-th syzygy module = kernel of d^{-k}: F^{-k} -> F^{-k+1}
        N = kernel_module(res.complex.diffs[-k])
        L = lin_module(N)
        if all(N.dim(j) == L.dim(j) for j in set(N.dims) | set(L.dims)):
            agree.append(k)
    first = None
    for k in range(1, depth + 1):
        if all(kk in agree for kk in range(k, depth + 1)):
            first = k
            break
    return (first, agree)
