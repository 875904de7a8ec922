"""Canned inputs: the example sheaves and matrices used throughout the test
suite and exposed through the CLI `example` stage.

* omega(i):   the twisted cotangent-power module O^i(i), presented by a
              chunk of the Koszul complex (generators in degree 1).
* powers(j):  m^j inside E, and the ideal power (W)^j over S as pieces.
* rnc(d, k):  line bundle of degree k on the rational normal curve of
              degree d, as the pieces module ⊕_m H^0(P^1, O(k + m d)).
* elliptic(lam): the Heisenberg-invariant elliptic quartic curve in P^3,
              as S/(q1, q2), plus the 5x5 matrix of its central Tate
              differential.
* hm():      the 2x5 matrix whose Tate resolution is the Horrocks-Mumford
              bundle's.
"""

from __future__ import annotations

from math import comb

import numpy as np

from . import linalg
from .complexes import GradedFree, GradedMap
from .emodules import EModule, power_of_max_ideal
from .rings import Poly, RingSig, contract_mask, masks_of_size
from .smodules import FPModuleS, GradedPiecesModule


def koszul_chunk(ring: RingSig, k: int) -> GradedMap:
    """S (x) wedge^{k+1} W -> S (x) wedge^k W, w |-> sum_i (e_i -| w) x_i,
    with source generators one degree above the target's."""
    if ring.kind != "S":
        raise ValueError("Koszul chunks live over S")
    v = ring.v
    src_masks = masks_of_size(v, k + 1)
    tgt_masks = masks_of_size(v, k)
    tidx = {m: i for i, m in enumerate(tgt_masks)}
    # generator degrees normalized so wedge^k sits in degree k
    src = GradedFree(ring, (k + 1,) * len(src_masks))
    tgt = GradedFree(ring, (k,) * len(tgt_masks))
    z = ring.zero()
    ent = [[z] * len(src_masks) for _ in range(len(tgt_masks))]
    for c, mask in enumerate(src_masks):
        mm = mask
        while mm:
            i = (mm & -mm).bit_length() - 1
            s, rest = contract_mask(mask, 1 << i)
            ent[tidx[rest]][c] = ent[tidx[rest]][c] + ring.variable(i).scale(s)
            mm &= mm - 1
    return GradedMap(src, tgt, ent)


def omega_module(ring: RingSig, i: int, twist: int | None = None) -> FPModuleS:
    """coker[S (x) wedge^{i+2} W -> S (x) wedge^{i+1} W], twisted; by
    default by (i) so the generators sit in degree 1."""
    if not -1 <= i <= ring.v - 1:
        raise ValueError(f"cotangent power index {i} out of range")
    pres = koszul_chunk(ring, i + 1)
    mod = FPModuleS(pres)
    return mod.twist(i if twist is None else twist)


def ideal_power_pieces(ring: RingSig, j: int, lo: int, hi: int) -> GradedPiecesModule:
    """(W)^j = S_{>= j} as a pieces module."""
    return FPModuleS.free(ring, (0,)).pieces(lo, hi).truncate(max(lo, j))


def max_ideal_power(ring: RingSig, j: int) -> EModule:
    if ring.kind != "E":
        raise ValueError("m^j lives over E")
    return power_of_max_ideal(ring, j)


def rnc_module(d: int, k: int, lo: int, hi: int,
               p: int = linalg.DEFAULT_PRIME) -> GradedPiecesModule:
    """Pieces module of the line bundle L_k on the rational normal curve of
    degree d in P^d: M_m = H^0(P^1, O(k + m d)), with x_i acting as
    multiplication by s^{d-i} t^i."""
    if d < 1:
        raise ValueError("curve degree must be positive")
    if not -1 <= k <= d - 2:
        raise ValueError(f"twist k={k} outside the supported range -1..{d - 2}")
    ring = RingSig("S", d + 1, p)

    def hdim(m):
        n = k + m * d
        return n + 1 if n >= 0 else 0

    dims = [hdim(m) for m in range(lo, hi + 1)]
    mult = {}
    for m in range(lo, hi):
        n = k + m * d
        src, tgt = hdim(m), hdim(m + 1)
        for i in range(d + 1):
            A = linalg.zeros(tgt, src)
            if src:
                for a in range(src):  # basis s^{n-a} t^a
                    A[a + i, a] = 1
            mult[(i, m)] = A
    return GradedPiecesModule(ring, lo, dims, mult)


def elliptic_quartic(lam: int = 1, p: int = linalg.DEFAULT_PRIME) -> FPModuleS:
    """S/(x0^2 + x2^2 + lam x1 x3,  x1^2 + x3^2 + lam x0 x2) on P^3."""
    ring = RingSig("S", 4, p)
    x = [ring.variable(i) for i in range(4)]
    q1 = x[0] * x[0] + x[2] * x[2] + (x[1] * x[3]).scale(lam)
    q2 = x[1] * x[1] + x[3] * x[3] + (x[0] * x[2]).scale(lam)
    return FPModuleS.from_quotient(ring, [q1, q2])


def elliptic_quartic_matrix(lam: int = 1,
                            p: int = linalg.DEFAULT_PRIME) -> GradedMap:
    """The 5x5 central Tate differential of the Heisenberg-invariant
    elliptic quartic (map omega + omega^4(1) -> omega^4(-1) + omega)."""
    ring = RingSig("E", 4, p)
    e = [ring.variable(i) for i in range(4)]
    z = ring.zero()
    half = (p + 1) // 2  # 1/2 mod p, defined since p is odd
    c = (lam * lam * half) % p
    lam %= p

    def q(a, b, scale=1):
        return (e[a] * e[b]).scale(scale)

    rows = [
        [z, e[0], e[1], e[2], e[3]],
        [e[0], q(1, 3, -lam), q(2, 3), z, q(1, 2) + q(0, 3, c)],
        [e[1], q(2, 3), q(0, 2, lam), q(0, 3, -1) + q(1, 2, -c), z],
        [e[2], z, q(0, 3, -1) + q(1, 2, -c), q(1, 3, lam), q(0, 1)],
        [e[3], q(1, 2) + q(0, 3, c), z, q(0, 1), q(0, 2, -lam)],
    ]
    src = GradedFree(ring, (4, 3, 3, 3, 3))
    tgt = GradedFree(ring, (4, 5, 5, 5, 5))
    return GradedMap(src, tgt, rows)


def horrocks_mumford_matrix(p: int = linalg.DEFAULT_PRIME) -> GradedMap:
    """The 2x5 quadratic matrix on P^4 whose Tate resolution is that of the
    rank-2 Horrocks-Mumford bundle (columns in degree 2, rows in degree 4)."""
    ring = RingSig("E", 5, p)
    e = [ring.variable(i) for i in range(5)]
    rows = [
        [e[1] * e[4], e[2] * e[0], e[3] * e[1], e[4] * e[2], e[0] * e[3]],
        [e[2] * e[3], e[3] * e[4], e[4] * e[0], e[0] * e[1], e[1] * e[2]],
    ]
    src = GradedFree(ring, (2,) * 5)
    tgt = GradedFree(ring, (4,) * 2)
    return GradedMap(src, tgt, rows)


def twisted_structure_sheaf(ring: RingSig, d: int) -> FPModuleS:
    """O(d) as the free module S(d)."""
    return FPModuleS.free(ring, (-d,))


def hook_dim_oracle(ring_p: int, v: int, i: int, j: int) -> int:
    """dim of the hook Schur module: the image of
    wedge^i W (x) Sym_{j-1} W -> wedge^{i-1} W (x) Sym_j W, computed as an
    actual matrix rank over F_p (the independent oracle for Betti numbers of
    powers of the maximal ideal)."""
    if i < 1 or j < 1:
        return 0
    ring = RingSig("S", v, ring_p)
    from .rings import exponents_of_degree
    src_masks = masks_of_size(v, i)
    tgt_masks = masks_of_size(v, i - 1)
    src_exps = exponents_of_degree(v, j - 1)
    tgt_exps = exponents_of_degree(v, j)
    tmask_idx = {m: t for t, m in enumerate(tgt_masks)}
    texp_idx = {a: t for t, a in enumerate(tgt_exps)}
    A = linalg.zeros(len(tgt_masks) * len(tgt_exps),
                     len(src_masks) * len(src_exps))
    for cm, mask in enumerate(src_masks):
        for ce, alpha in enumerate(src_exps):
            col = cm * len(src_exps) + ce
            mm = mask
            while mm:
                t = (mm & -mm).bit_length() - 1
                s, rest = contract_mask(mask, 1 << t)
                beta = list(alpha)
                beta[t] += 1
                row = tmask_idx[rest] * len(tgt_exps) + texp_idx[tuple(beta)]
                A[row, col] = (A[row, col] + s) % ring_p
                mm &= mm - 1
    return linalg.rank(A, ring_p)


def hook_dim_closed_form(v: int, i: int, j: int) -> int:
    """Hook dimension C(v+j-1, i+j-1) * C(i+j-2, i-1)."""
    if i < 1 or j < 1:
        return 0
    return comb(v + j - 1, i + j - 1) * comb(i + j - 2, i - 1)
